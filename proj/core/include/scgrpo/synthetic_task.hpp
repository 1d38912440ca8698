#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scgrpo/grpo.hpp"
#include "scgrpo/records.hpp"
#include "scgrpo/reward.hpp"

namespace scgrpo {

// One state of a toy training task. JSONL, one record per line:
//   {"state": 0, "label": "anomalous", "location": "bottom left",
//    "type": "scratch", "think": "...", "candidates": ["<think>...", ...]}
// `think` is optional and seeds the supervised target for that state.
struct TaskRecord {
  int state = 0;
  GroundTruthRecord ground_truth;
  std::vector<std::string> candidates;
  std::optional<std::string> think;
};

struct SyntheticTask {
  std::vector<TaskRecord> records;

  // States must be 0..n-1, each once, each with >= 2 candidates.
  static SyntheticTask parse(std::istream& in, const std::string& source = "<task>");
  static SyntheticTask load(const std::filesystem::path& path);

  ToyPolicy::ActionTable action_table() const;
  // Ground truth resolved at the given grid size.
  std::vector<TrainingState> training_states(const GridSpec& grid, const TypeTaxonomy& tax) const;
  // Canonical target per state built from think + ground truth.
  std::vector<std::string> sft_targets() const;
};

Scorer make_scorer(const TypeTaxonomy& tax, const RewardConfig& config);

// iteration,mean_reward,kl,objective
void write_reward_curve_csv(std::ostream& out, std::span<const IterationStats> curve);

struct PipelineConfig {
  RewardConfig reward;
  TrainConfig train;
  int sft_epochs = 0;  // 0 skips the supervised stage; the policy starts uniform
  double sft_learning_rate = 50.0;
};

struct PipelineResult {
  TrainResult grpo;
  double initial_expected_reward = 0.0;
  double final_expected_reward = 0.0;
  double max_reward = 0.0;
  std::optional<double> sft_initial_nll;
  std::optional<double> sft_final_nll;
};

// Optional supervised stage on the rendered targets, then group-relative
// optimization starting from the resulting policy.
PipelineResult run_pipeline(const SyntheticTask& task, const TypeTaxonomy& tax,
                            const PipelineConfig& config);

struct GridAblationRow {
  int k = 0;
  double max_reward = 0.0;
  double initial_expected_reward = 0.0;
  double final_expected_reward = 0.0;
  // Share of (anomalous state, candidate with a parsed location) pairs
  // whose location reward is 1.
  double location_match_rate = 0.0;
};

std::vector<GridAblationRow> run_grid_ablation(const SyntheticTask& task, const TypeTaxonomy& tax,
                                               std::span<const int> grid_sizes,
                                               const PipelineConfig& config);

void write_grid_ablation_csv(std::ostream& out, std::span<const GridAblationRow> rows);

}  // namespace scgrpo
