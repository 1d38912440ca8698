#include <gtest/gtest.h>

#include <sstream>

#include "scgrpo/errors.hpp"
#include "scgrpo/response_parser.hpp"
#include "scgrpo/synthetic_task.hpp"

namespace scgrpo {
namespace {

const TypeTaxonomy& tax() { return TypeTaxonomy::builtin(); }

SyntheticTask shipped() {
  return SyntheticTask::load(std::filesystem::path(SCGRPO_DATA_DIR) / "synthetic_task.jsonl");
}

TEST(SyntheticTask, ShippedTaskShape) {
  const SyntheticTask task = shipped();
  ASSERT_EQ(task.records.size(), 16u);
  for (std::size_t s = 0; s < task.records.size(); ++s) {
    EXPECT_EQ(task.records[s].state, static_cast<int>(s));
    EXPECT_EQ(task.records[s].candidates.size(), 4u);
  }
  const auto states = task.training_states(GridSpec(3), tax());
  const Scorer scorer = make_scorer(tax(), RewardConfig{});
  for (const auto& ts : states) {
    const double best = ts.ground_truth.label == Label::Anomalous ? 4.0 : 2.0;
    int perfect = 0;
    for (const auto& c : task.records[ts.state].candidates) perfect += scorer(c, ts.ground_truth) == best;
    EXPECT_EQ(perfect, 1) << "state " << ts.state;
  }
}

TEST(SyntheticTask, SftTargetsFollowLabels) {
  const SyntheticTask task = shipped();
  const auto targets = task.sft_targets();
  ASSERT_EQ(targets.size(), task.records.size());
  for (std::size_t s = 0; s < targets.size(); ++s) {
    const ParseOutcome p = parse(targets[s]);
    ASSERT_TRUE(p.ok());
    EXPECT_EQ(p.response().pattern, pattern_for(task.records[s].ground_truth.label));
  }
}

TEST(SyntheticTask, ParseErrors) {
  std::istringstream gap(R"({"state": 1, "label": "normal", "candidates": ["a", "b"]})");
  EXPECT_THROW(SyntheticTask::parse(gap), FormatError);
  std::istringstream one(R"({"state": 0, "label": "normal", "candidates": ["a"]})");
  EXPECT_THROW(SyntheticTask::parse(one), FormatError);
  std::istringstream unresolvable(
      R"({"state": 0, "label": "anomalous", "location": "left", "type": "scratch", "candidates": ["a", "b"]})");
  const SyntheticTask t = SyntheticTask::parse(unresolvable);
  EXPECT_NO_THROW(t.training_states(GridSpec(3), tax()));
  EXPECT_THROW(t.training_states(GridSpec(4), tax()), ConfigError);
}

TEST(Pipeline, ReachesNinetyPercentOfMax) {
  PipelineConfig cfg;
  const PipelineResult r = run_pipeline(shipped(), tax(), cfg);
  EXPECT_EQ(r.grpo.curve.size(), 200u);
  EXPECT_GE(r.final_expected_reward, 0.9 * r.max_reward);
  EXPECT_GT(r.final_expected_reward, r.initial_expected_reward);
  EXPECT_FALSE(r.sft_initial_nll.has_value());
}

TEST(Pipeline, SftStageReportsNll) {
  PipelineConfig cfg;
  cfg.sft_epochs = 30;
  cfg.train.epochs = 5;
  const PipelineResult r = run_pipeline(shipped(), tax(), cfg);
  ASSERT_TRUE(r.sft_initial_nll && r.sft_final_nll);
  EXPECT_LT(*r.sft_final_nll, *r.sft_initial_nll);
}

TEST(CurveCsv, Layout) {
  const std::vector<IterationStats> curve = {{0, 1.5, 1.25, 0.0, 0.1}, {1, 2.0, 2.0, 0.01, 0.2}};
  std::ostringstream out;
  write_reward_curve_csv(out, curve);
  EXPECT_EQ(out.str(), "iteration,mean_reward,kl,objective\n0,1.5,0,0.10000000000000001\n"
                       "1,2,0.01,0.20000000000000001\n");
}

TEST(GridAblation, SingleCellCollapsesLocation) {
  PipelineConfig cfg;
  cfg.train.epochs = 20;
  const std::vector<int> ks = {1, 2, 3};
  const auto rows = run_grid_ablation(shipped(), tax(), ks, cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].k, 1);
  EXPECT_EQ(rows[0].location_match_rate, 1.0);
  EXPECT_LT(rows[2].location_match_rate, 1.0);
  std::ostringstream out;
  write_grid_ablation_csv(out, rows);
  EXPECT_EQ(out.str().rfind("k,max_reward,initial_reward,final_reward,location_match_rate\n1,", 0), 0u);
}

}  // namespace
}  // namespace scgrpo
