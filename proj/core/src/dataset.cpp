#include "scgrpo/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>

#include "jsonl.hpp"
#include "text_util.hpp"
#include "scgrpo/errors.hpp"
#include "scgrpo/response_parser.hpp"
#include "scgrpo/rng.hpp"

namespace scgrpo {

std::string_view to_string(Stage stage) {
  return stage == Stage::PaSft ? "pa_sft" : "sc_grpo";
}

std::string_view to_string(SampleRule rule) {
  switch (rule) {
    case SampleRule::ParseFailure: return "ParseFailure";
    case SampleRule::PatternMismatch: return "PatternMismatch";
    case SampleRule::AnswerMismatch: return "AnswerMismatch";
    case SampleRule::MissingGroundTruth: return "MissingGroundTruth";
    case SampleRule::UnexpectedGroundTruth: return "UnexpectedGroundTruth";
    case SampleRule::UnresolvableLocation: return "UnresolvableLocation";
    case SampleRule::UnknownType: return "UnknownType";
    case SampleRule::LocationMismatch: return "LocationMismatch";
    case SampleRule::TypeMismatch: return "TypeMismatch";
  }
  return "?";
}

std::vector<DatasetSample> read_dataset(std::istream& in, const std::string& source) {
  std::vector<DatasetSample> out;
  detail::read_jsonl(in, source, [&](const nlohmann::json& obj, std::size_t) {
    DatasetSample s;
    s.id = detail::require_string(obj, "id");
    s.image_ref = detail::require_string(obj, "image_ref");
    s.prompt = obj.contains("prompt") ? detail::require_string(obj, "prompt") : std::string();
    s.target_output = detail::require_string(obj, "target_output");
    s.ground_truth = ground_truth_from_json(obj);
    if (const auto it = obj.find("stage"); it != obj.end() && !it->is_null()) {
      const std::string st = detail::require_string(obj, "stage");
      if (st == "pa_sft") {
        s.stage_hint = Stage::PaSft;
      } else if (st == "sc_grpo") {
        s.stage_hint = Stage::ScGrpo;
      } else {
        throw std::invalid_argument("stage: expected 'pa_sft' or 'sc_grpo'");
      }
    }
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<DatasetSample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  return read_dataset(in, path.string());
}

void write_dataset(std::ostream& out, std::span<const DatasetSample> samples) {
  for (const DatasetSample& s : samples) {
    nlohmann::ordered_json obj;
    obj["id"] = s.id;
    obj["image_ref"] = s.image_ref;
    obj["prompt"] = s.prompt;
    obj["target_output"] = s.target_output;
    ground_truth_to_json(s.ground_truth, obj);
    if (s.stage_hint) obj["stage"] = std::string(to_string(*s.stage_hint));
    out << obj.dump() << '\n';
  }
}

std::vector<SampleViolation> validate_sample(const DatasetSample& sample, const GridSpec& grid,
                                             const TypeTaxonomy& tax) {
  std::vector<SampleViolation> v;
  const GroundTruthRecord& gt = sample.ground_truth;
  const bool anomalous = gt.label == Label::Anomalous;

  // Ground-truth side.
  std::optional<int> gt_cell;
  std::optional<std::string> gt_type;
  // Target tags repeating an already-reported bad value are not reported again.
  std::string bad_gt_location;
  std::string bad_gt_type;
  if (anomalous) {
    if (gt.location_cell) {
      if (*gt.location_cell < 0 || *gt.location_cell >= grid.cells()) {
        v.push_back({SampleRule::UnresolvableLocation, "location_cell",
                     "cell " + std::to_string(*gt.location_cell) + " is outside the grid"});
      } else {
        gt_cell = gt.location_cell;
      }
    } else if (gt.location) {
      gt_cell = map_location(*gt.location, grid);
      if (!gt_cell) {
        bad_gt_location = detail::normalize(*gt.location);
        v.push_back({SampleRule::UnresolvableLocation, "location",
                     "'" + *gt.location + "' names no grid position"});
      }
    } else {
      v.push_back({SampleRule::MissingGroundTruth, "location", "anomalous sample needs a location"});
    }
    if (!gt.type) {
      v.push_back({SampleRule::MissingGroundTruth, "type", "anomalous sample needs a type"});
    } else {
      gt_type = tax.canonical_of(*gt.type);
      if (!gt_type) {
        bad_gt_type = detail::normalize(*gt.type);
        v.push_back({SampleRule::UnknownType, "type", "'" + *gt.type + "' is not in the taxonomy"});
      }
    }
  } else {
    if (gt.location || gt.location_cell) {
      v.push_back({SampleRule::UnexpectedGroundTruth, "location", "normal sample has a location"});
    }
    if (gt.type) {
      v.push_back({SampleRule::UnexpectedGroundTruth, "type", "normal sample has a type"});
    }
  }

  // Target side.
  const ParseOutcome parsed = parse(sample.target_output);
  if (!parsed.ok()) {
    const MalformedReport& err = parsed.error();
    v.push_back({SampleRule::ParseFailure, "target_output",
                 std::string(to_string(err.first_violation)) + " at byte " +
                     std::to_string(err.byte_offset)});
    return v;
  }
  const StructuredResponse& r = parsed.response();
  if (r.pattern != pattern_for(gt.label)) {
    v.push_back({SampleRule::PatternMismatch, "target_output",
                 std::string(to_string(r.pattern)) + " pattern for a " +
                     std::string(to_string(gt.label)) + " label"});
  }
  if (label_of(r.answer) != gt.label) {
    v.push_back({SampleRule::AnswerMismatch, "target_output.answer",
                 "answer " + std::string(to_string(r.answer)) + " contradicts the label"});
  }
  if (anomalous && r.pattern == PatternKind::Abnormal) {
    const auto cell = map_location(*r.location, grid);
    if (!cell) {
      if (detail::normalize(*r.location) != bad_gt_location) {
        v.push_back({SampleRule::UnresolvableLocation, "target_output.location",
                     "'" + *r.location + "' names no grid position"});
      }
    } else if (gt_cell && *cell != *gt_cell) {
      v.push_back({SampleRule::LocationMismatch, "target_output.location",
                   "cell " + std::to_string(*cell) + " differs from ground truth cell " +
                       std::to_string(*gt_cell)});
    }
    if (!tax.canonical_of(*r.anomaly_type)) {
      if (detail::normalize(*r.anomaly_type) != bad_gt_type) {
        v.push_back({SampleRule::UnknownType, "target_output.type",
                     "'" + *r.anomaly_type + "' is not in the taxonomy"});
      }
    } else if (gt_type && type_match_level(*r.anomaly_type, *gt_type, tax) == MatchLevel::None) {
      v.push_back({SampleRule::TypeMismatch, "target_output.type",
                   "'" + *r.anomaly_type + "' is unrelated to '" + *gt_type + "'"});
    }
  }
  return v;
}

StageSplit split_stages(std::span<const DatasetSample> samples, std::optional<double> ratio,
                        std::uint64_t seed) {
  if (ratio && !(*ratio >= 0.0 && *ratio <= 1.0)) throw ContractError("ratio must be in [0, 1]");
  const std::size_t hinted = static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [](const DatasetSample& s) { return s.stage_hint.has_value(); }));
  const bool all_hinted = hinted == samples.size() && !samples.empty();

  StageSplit out;
  if (all_hinted) {
    for (const DatasetSample& s : samples) {
      (*s.stage_hint == Stage::PaSft ? out.pa_sft : out.sc_grpo).push_back(s);
    }
    if (ratio) {
      const auto expected = static_cast<std::size_t>(std::llround(*ratio * static_cast<double>(samples.size())));
      if (expected != out.pa_sft.size()) {
        throw ContractError("ratio asks for " + std::to_string(expected) +
                            " PA-SFT samples but the stage hints give " +
                            std::to_string(out.pa_sft.size()));
      }
    }
    return out;
  }
  if (!ratio) throw ContractError("samples without a stage hint need a split ratio");

  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].stage_hint) {
      (*samples[i].stage_hint == Stage::PaSft ? out.pa_sft : out.sc_grpo).push_back(samples[i]);
    } else {
      free.push_back(i);
    }
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(free));
  const auto cut = static_cast<std::size_t>(std::llround(*ratio * static_cast<double>(free.size())));
  for (std::size_t j = 0; j < free.size(); ++j) {
    (j < cut ? out.pa_sft : out.sc_grpo).push_back(samples[free[j]]);
  }
  return out;
}

std::vector<DatasetSample> subsample(std::span<const DatasetSample> samples, double fraction,
                                     std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ContractError("fraction must be in (0, 1]");
  const std::size_t n = samples.size();
  if (fraction == 1.0) return {samples.begin(), samples.end()};

  // Largest-remainder allocation per label; ties go to the earlier label.
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < n; ++i) {
    by_label[samples[i].ground_truth.label == Label::Normal ? 0 : 1].push_back(i);
  }
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double share = fraction * static_cast<double>(by_label[c].size());
    take[c] = static_cast<std::size_t>(std::floor(share));
    remainder[c] = share - std::floor(share);
    assigned += take[c];
  }
  while (assigned < target) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    if (take[c] >= by_label[c].size()) break;
    ++take[c];
    remainder[c] = -1.0;
    ++assigned;
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(std::span<std::size_t>(by_label[c]));
    chosen.insert(chosen.end(), by_label[c].begin(), by_label[c].begin() + static_cast<long>(take[c]));
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<DatasetSample> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(samples[i]);
  return out;
}

DatasetStats stats(std::span<const DatasetSample> samples, const GridSpec& grid,
                   const TypeTaxonomy& tax) {
  DatasetStats s;
  s.by_label["normal"] = 0;
  s.by_label["anomalous"] = 0;
  for (const DatasetSample& sample : samples) {
    const GroundTruthRecord& gt = sample.ground_truth;
    ++s.total;
    ++s.by_label[std::string(to_string(gt.label))];
    if (gt.label != Label::Anomalous) continue;

    if (gt.type) {
      const std::string type = tax.canonical_of(*gt.type).value_or(*gt.type);
      ++s.by_type[type];
      const auto category = gt.category ? gt.category : tax.category_of(type);
      if (category) ++s.by_category[*category];
    }
    std::optional<int> cell;
    if (gt.location_cell && *gt.location_cell >= 0 && *gt.location_cell < grid.cells()) {
      cell = gt.location_cell;
    } else if (!gt.location_cell && gt.location) {
      cell = map_location(*gt.location, grid);
    }
    if (cell) {
      ++s.by_cell[*cell];
    } else {
      ++s.unresolved_cells;
    }
  }
  return s;
}

void print_stats(std::ostream& out, const DatasetStats& s) {
  auto section = [&](const std::string& title, const auto& counts) {
    out << title << '\n';
    for (const auto& [key, count] : counts) {
      out << "  " << std::left << std::setw(24) << key << std::right << std::setw(8) << count
          << '\n';
    }
  };
  out << "samples " << s.total << '\n';
  section("label", s.by_label);
  section("type", s.by_type);
  section("category", s.by_category);
  section("grid cell", s.by_cell);
  if (s.unresolved_cells > 0) out << "unresolved cells " << s.unresolved_cells << '\n';
}

}  // namespace scgrpo
