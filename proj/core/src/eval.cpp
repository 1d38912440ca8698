#include "scgrpo/eval.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "jsonl.hpp"
#include "scgrpo/errors.hpp"

namespace scgrpo {

double balanced_accuracy(std::span<const LabeledPrediction> records) {
  std::size_t normal = 0, normal_ok = 0, anomalous = 0, anomalous_ok = 0;
  for (const LabeledPrediction& r : records) {
    const bool ok = r.predicted && *r.predicted == r.truth;
    if (r.truth == Label::Normal) {
      ++normal;
      normal_ok += ok;
    } else {
      ++anomalous;
      anomalous_ok += ok;
    }
  }
  if (normal == 0) throw ContractError("balanced accuracy needs normal samples; none present");
  if (anomalous == 0) throw ContractError("balanced accuracy needs anomalous samples; none present");
  const double tnr = static_cast<double>(normal_ok) / static_cast<double>(normal);
  const double tpr = static_cast<double>(anomalous_ok) / static_cast<double>(anomalous);
  return (tnr + tpr) / 2.0;
}

std::vector<EvalRecord> read_predictions(std::istream& in, const std::string& source) {
  std::vector<EvalRecord> out;
  std::set<std::string> ids;
  detail::read_jsonl(in, source, [&](const nlohmann::json& obj, std::size_t) {
    EvalRecord r;
    r.sample_id = detail::require_string(obj, "sample_id");
    r.dataset = detail::require_string(obj, "dataset");
    const auto label = parse_label(detail::require_string(obj, "gt_label"));
    if (!label) throw std::invalid_argument("gt_label: expected 'normal' or 'anomalous'");
    r.gt_label = *label;
    const std::string mode = detail::require_string(obj, "extraction_mode");
    if (mode == "structured") {
      r.extraction_mode = ExtractionMode::Structured;
    } else if (mode == "raw_text" || mode == "raw") {
      r.extraction_mode = ExtractionMode::RawText;
    } else {
      throw std::invalid_argument("extraction_mode: expected 'structured' or 'raw_text'");
    }
    r.raw_output = detail::require_string(obj, "raw_output");
    if (!ids.insert(r.sample_id).second) {
      throw std::invalid_argument("duplicate sample_id '" + r.sample_id + "'");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<EvalRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  return read_predictions(in, path.string());
}

EvalReport evaluate_records(std::span<const EvalRecord> records) {
  std::map<std::string, std::vector<LabeledPrediction>> grouped;
  std::map<std::string, std::size_t> unparseable;
  for (const EvalRecord& r : records) {
    const auto answer = extract_answer(r.raw_output, r.extraction_mode);
    LabeledPrediction p{r.gt_label, std::nullopt};
    if (answer) {
      p.predicted = label_of(*answer);
    } else {
      ++unparseable[r.dataset];
    }
    grouped[r.dataset].push_back(p);
  }

  EvalReport report;
  for (const auto& [name, preds] : grouped) {
    DatasetReport d;
    d.dataset = name;
    std::size_t normal_ok = 0, anomalous_ok = 0;
    for (const LabeledPrediction& p : preds) {
      const bool ok = p.predicted && *p.predicted == p.truth;
      if (p.truth == Label::Normal) {
        ++d.normal_count;
        normal_ok += ok;
      } else {
        ++d.anomalous_count;
        anomalous_ok += ok;
      }
    }
    try {
      d.balanced_accuracy = balanced_accuracy(preds);
    } catch (const ContractError& e) {
      throw ContractError("dataset '" + name + "': " + e.what());
    }
    d.tnr = static_cast<double>(normal_ok) / static_cast<double>(d.normal_count);
    d.tpr = static_cast<double>(anomalous_ok) / static_cast<double>(d.anomalous_count);
    d.unparseable = unparseable[name];
    report.unparseable += d.unparseable;
    report.average_balanced_accuracy += d.balanced_accuracy;
    report.datasets.push_back(d);
  }
  if (!report.datasets.empty()) {
    report.average_balanced_accuracy /= static_cast<double>(report.datasets.size());
  }
  return report;
}

EvalReport evaluate_run(const std::filesystem::path& predictions) {
  const auto records = load_predictions(predictions);
  if (records.empty()) throw FormatError(predictions.string(), 0, "no prediction records");
  try {
    return evaluate_records(records);
  } catch (const ContractError& e) {
    throw FormatError(predictions.string(), 0, e.what());
  }
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "dataset,tnr,tpr,balanced_accuracy,unparseable\n";
  char buf[256];
  for (const DatasetReport& d : report.datasets) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%zu\n", d.tnr, d.tpr, d.balanced_accuracy,
                  d.unparseable);
    out << d.dataset << buf;
  }
  std::snprintf(buf, sizeof buf, "average,,,%.17g,%zu\n", report.average_balanced_accuracy,
                report.unparseable);
  out << buf;
}

void print_report_table(std::ostream& out, const EvalReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s %8s\n", "dataset", "n", "TNR%", "TPR%",
                "BAcc%", "unparsed");
  out << buf;
  for (const DatasetReport& d : report.datasets) {
    std::snprintf(buf, sizeof buf, "%-16s %8zu %8.1f %8.1f %8.1f %8zu\n", d.dataset.c_str(),
                  d.normal_count + d.anomalous_count, 100.0 * d.tnr, 100.0 * d.tpr,
                  100.0 * d.balanced_accuracy, d.unparseable);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8.1f %8zu\n", "average", "", "", "",
                100.0 * report.average_balanced_accuracy, report.unparseable);
  out << buf;
}

}  // namespace scgrpo
