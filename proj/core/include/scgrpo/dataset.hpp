#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scgrpo/records.hpp"

namespace scgrpo {

enum class Stage { PaSft, ScGrpo };
std::string_view to_string(Stage stage);

// One training triple (image reference, prompt, target output) plus labels.
// JSONL fields: id, image_ref, prompt, target_output, label, location,
// location_cell, type, category, stage ("pa_sft" | "sc_grpo").
struct DatasetSample {
  std::string id;
  std::string image_ref;
  std::string prompt;
  std::string target_output;
  GroundTruthRecord ground_truth;
  std::optional<Stage> stage_hint;

  bool operator==(const DatasetSample&) const = default;
};

std::vector<DatasetSample> read_dataset(std::istream& in, const std::string& source = "<dataset>");
std::vector<DatasetSample> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, std::span<const DatasetSample> samples);

enum class SampleRule {
  ParseFailure,
  PatternMismatch,
  AnswerMismatch,
  MissingGroundTruth,
  UnexpectedGroundTruth,
  UnresolvableLocation,
  UnknownType,
  LocationMismatch,
  TypeMismatch,
};
std::string_view to_string(SampleRule rule);

struct SampleViolation {
  SampleRule rule;
  std::string field;
  std::string detail;
};

// Empty iff the sample is usable: the target parses, its pattern and answer
// agree with the label, and anomalous labels resolve on the grid and in the
// taxonomy (both in the ground truth and in the target's tags).
std::vector<SampleViolation> validate_sample(const DatasetSample& sample, const GridSpec& grid,
                                             const TypeTaxonomy& tax);

struct StageSplit {
  std::vector<DatasetSample> pa_sft;
  std::vector<DatasetSample> sc_grpo;
};

// With every sample hinted, the hints decide (and a ratio, if given, must
// agree with them). Otherwise hinted samples keep their stage and the rest
// are shuffled with `seed` and cut so round(ratio * n) go to the first set.
// Throws ContractError on contradictory or missing inputs.
StageSplit split_stages(std::span<const DatasetSample> samples, std::optional<double> ratio,
                        std::uint64_t seed);

// Stratified by label: round(fraction * N) samples, each label within one
// sample of its proportional share. Input order is preserved.
std::vector<DatasetSample> subsample(std::span<const DatasetSample> samples, double fraction,
                                     std::uint64_t seed);

struct DatasetStats {
  std::size_t total = 0;
  std::map<std::string, std::size_t> by_label;
  std::map<std::string, std::size_t> by_type;
  std::map<std::string, std::size_t> by_category;
  std::map<int, std::size_t> by_cell;
  std::size_t unresolved_cells = 0;  // anomalous samples with no resolvable cell

  bool operator==(const DatasetStats&) const = default;
};

DatasetStats stats(std::span<const DatasetSample> samples, const GridSpec& grid,
                   const TypeTaxonomy& tax);
void print_stats(std::ostream& out, const DatasetStats& s);

}  // namespace scgrpo
