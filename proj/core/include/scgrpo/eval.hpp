#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scgrpo/response_parser.hpp"
#include "scgrpo/types.hpp"

namespace scgrpo {

// Predictions file, JSONL:
//   {"sample_id": "...", "dataset": "...", "gt_label": "normal"|"anomalous",
//    "extraction_mode": "structured"|"raw_text", "raw_output": "..."}
struct EvalRecord {
  std::string sample_id;
  std::string dataset;
  Label gt_label = Label::Normal;
  std::string raw_output;
  ExtractionMode extraction_mode = ExtractionMode::Structured;
};

struct LabeledPrediction {
  Label truth = Label::Normal;
  std::optional<Label> predicted;  // absent counts as wrong
};

// Mean of the normal-class and anomalous-class accuracies. Throws
// ContractError naming the missing class when one is absent.
double balanced_accuracy(std::span<const LabeledPrediction> records);

struct DatasetReport {
  std::string dataset;
  double tnr = 0.0;
  double tpr = 0.0;
  double balanced_accuracy = 0.0;
  std::size_t normal_count = 0;
  std::size_t anomalous_count = 0;
  std::size_t unparseable = 0;
};

struct EvalReport {
  std::vector<DatasetReport> datasets;  // sorted by name
  double average_balanced_accuracy = 0.0;
  std::size_t unparseable = 0;
};

// Throws FormatError for bad lines and duplicate sample ids.
std::vector<EvalRecord> read_predictions(std::istream& in, const std::string& source = "<predictions>");
std::vector<EvalRecord> load_predictions(const std::filesystem::path& path);

EvalReport evaluate_records(std::span<const EvalRecord> records);
// Load + evaluate. Empty files are an error.
EvalReport evaluate_run(const std::filesystem::path& predictions);

// dataset,tnr,tpr,balanced_accuracy,unparseable with a trailing "average" row.
void write_report_csv(std::ostream& out, const EvalReport& report);
void print_report_table(std::ostream& out, const EvalReport& report);

}  // namespace scgrpo
