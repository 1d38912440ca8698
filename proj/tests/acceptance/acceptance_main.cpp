// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scgrpo/dataset.hpp"
#include "scgrpo/eval.hpp"
#include "scgrpo/grpo.hpp"
#include "scgrpo/records.hpp"
#include "scgrpo/response_parser.hpp"
#include "scgrpo/reward.hpp"
#include "scgrpo/sequence_model.hpp"
#include "scgrpo/synthetic_task.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace {

using namespace scgrpo;
namespace t = scgrpo::testing;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

const TypeTaxonomy& tax() { return TypeTaxonomy::builtin(); }

std::filesystem::path data_file(const char* name) {
  return std::filesystem::path(SCGRPO_DATA_DIR) / name;
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Verdict reward_values() {
  const GroundTruth gt = make_ground_truth(Label::Anomalous, 0, "scratch");
  const GroundTruth gt_missing = make_ground_truth(Label::Anomalous, 0, "missing part");
  struct Row {
    const char* pred;
    const GroundTruth* gt;
    MatchLevel level;
    double value;
  };
  const Row rows[] = {
      {"scratch", &gt, MatchLevel::Exact, 1.0},
      {"scrape", &gt, MatchLevel::Semantic, 0.85},
      {"wear", &gt, MatchLevel::Category, 0.6},
      {"part missing", &gt_missing, MatchLevel::Fuzzy, 0.4},
      {"stain", &gt, MatchLevel::Group, 0.3},
      {"missing screw", &gt, MatchLevel::None, 0.0},
  };
  for (const Row& r : rows) {
    const MatchLevel level = type_match_level(r.pred, *r.gt->type_label, tax());
    const double value = type_reward(std::string(r.pred), *r.gt, tax());
    if (level != r.level || value != r.value || type_level_value(r.level) != r.value) {
      return {false, fmt("'%s' gave %s / %.17g", r.pred, std::string(to_string(level)).c_str(), value)};
    }
  }
  if (type_reward(std::nullopt, gt, tax()) != 0.0) return {false, "absent prediction scored"};
  return {true, "6 levels + absent exact"};
}

Verdict composition_bounds() {
  constexpr int kCases = 100000;
  t::RewardCaseGenerator gen(1);
  for (int i = 0; i < kCases; ++i) {
    const auto c = gen.next(tax());
    RewardConfig cfg;
    cfg.grid = GridSpec(c.k);
    const RewardBreakdown b = total_reward(c.raw, c.gt, tax(), cfg);
    const double hi = c.gt.label == Label::Normal ? 2.0 : 4.0;
    if (!(b.total >= 0.0 && b.total <= hi)) return {false, fmt("case %d total %.17g", i, b.total)};
    cfg.mode = RewardMode::AccuracyOnly;
    const RewardBreakdown a = total_reward(c.raw, c.gt, tax(), cfg);
    if (a.total != a.r_acc) return {false, fmt("case %d accuracy-only total != r_acc", i)};
  }
  return {true, fmt("%d cases", kCases)};
}

Verdict advantage_normalization() {
  constexpr int kGroups = 10000;
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-10, 10);
  double worst_mean = 0, worst_std = 0;
  for (int i = 0; i < kGroups; ++i) {
    std::vector<double> r(2 + gen() % 31);
    for (double& x : r) x = u(gen);
    const auto a = compute_advantages(r, 1e-8);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    double var = 0;
    for (double x : a) var += (x - mean) * (x - mean);
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_std = std::max(worst_std, std::abs(std::sqrt(var / static_cast<double>(a.size())) - 1.0));
  }
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> flat(2 + gen() % 31, u(gen));
    for (double x : compute_advantages(flat, 1e-8)) {
      if (x != 0.0) return {false, "degenerate group produced nonzero advantage"};
    }
  }
  const bool ok = worst_mean < 1e-9 && worst_std < 1e-9;
  return {ok, fmt("%d groups, max |mean| %.2e, max |std-1| %.2e", kGroups, worst_mean, worst_std)};
}

Verdict gradient_fidelity() {
  constexpr int kConfigs = 150;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int trial = 0; trial < kConfigs; ++trial) {
    const int states = 1 + static_cast<int>(gen() % 8);
    const int actions = 1 + static_cast<int>(gen() % 4);
    ToyPolicy::ActionTable table(static_cast<std::size_t>(states));
    for (auto& row : table) {
      for (int a = 0; a < actions; ++a) row.push_back(std::to_string(a));
    }
    auto logits = [&] {
      LogitTable l(static_cast<std::size_t>(states), std::vector<double>(static_cast<std::size_t>(actions)));
      for (auto& row : l) for (double& x : row) x = 1.5 * n(gen);
      return l;
    };
    const ToyPolicy reference(table, logits());
    const ToyPolicy policy(table, logits());
    TrainConfig cfg;
    cfg.kl_coeff = 0.5 * u(gen);
    cfg.clip = 0.05 + 0.4 * u(gen);
    cfg.group_size = 2 + static_cast<int>(gen() % 7);
    std::vector<RolloutGroup> groups;
    for (int s = 0; s < states; ++s) {
      RolloutGroup g;
      g.state = s;
      for (int i = 0; i < cfg.group_size; ++i) {
        g.actions.push_back(static_cast<int>(gen() % actions));
        g.rewards.push_back(4.0 * u(gen));
      }
      g.advantages = compute_advantages(g.rewards, cfg.std_floor);
      groups.push_back(std::move(g));
    }
    const LogitTable analytic = objective_gradient(policy, reference, groups, cfg);
    const LogitTable numeric = t::finite_difference(
        policy, [&](const ToyPolicy& p) { return objective(p, reference, groups, cfg); }, 1e-5);
    for (std::size_t s = 0; s < analytic.size(); ++s) {
      for (std::size_t a = 0; a < analytic[s].size(); ++a) {
        worst = std::max(worst, t::relative_error(analytic[s][a], numeric[s][a]));
      }
    }
  }
  return {worst < 1e-4, fmt("%d configs (<= 8x4), max rel err %.2e", kConfigs, worst)};
}

Verdict end_to_end() {
  const SyntheticTask task = SyntheticTask::load(data_file("synthetic_task.jsonl"));
  if (task.records.size() != 16) return {false, "synthetic task must have 16 states"};
  PipelineConfig cfg;
  cfg.train.epochs = 200;
  cfg.train.seed = 0;
  const PipelineResult a = run_pipeline(task, tax(), cfg);
  const PipelineResult b = run_pipeline(task, tax(), cfg);
  const bool deterministic = a.grpo.curve == b.grpo.curve && a.grpo.policy.logits() == b.grpo.policy.logits();
  const double frac = a.final_expected_reward / a.max_reward;
  return {frac >= 0.9 && deterministic && a.grpo.curve.size() <= 200,
          fmt("reward %.4f of max %.4f (%.3f), %zu iterations, deterministic=%s", a.final_expected_reward,
              a.max_reward, frac, a.grpo.curve.size(), deterministic ? "yes" : "no")};
}

Verdict reward_ablation() {
  const SyntheticTask task = SyntheticTask::load(data_file("ablation_task.jsonl"));
  PipelineConfig full;
  const PipelineResult rf = run_pipeline(task, tax(), full);
  PipelineConfig acc;
  acc.reward.mode = RewardMode::AccuracyOnly;
  const PipelineResult ra = run_pipeline(task, tax(), acc);

  const auto states = task.training_states(full.reward.grid, tax());
  const Scorer full_score = make_scorer(tax(), full.reward);
  const Scorer acc_score = make_scorer(tax(), acc.reward);
  double min_perfect = 1.0, max_gap = 0.0;
  for (const auto& ts : states) {
    const auto& cands = task.records[ts.state].candidates;
    double best = -1;
    int best_a = -1;
    for (int a = 0; a < static_cast<int>(cands.size()); ++a) {
      const double v = full_score(cands[a], ts.ground_truth);
      if (v > best) {
        best = v;
        best_a = a;
      }
    }
    min_perfect = std::min(min_perfect, rf.grpo.policy.probability(ts.state, best_a));
    for (int a = 0; a < static_cast<int>(cands.size()); ++a) {
      for (int b = a + 1; b < static_cast<int>(cands.size()); ++b) {
        if (acc_score(cands[a], ts.ground_truth) != acc_score(cands[b], ts.ground_truth)) continue;
        max_gap = std::max(max_gap, std::abs(ra.grpo.policy.probability(ts.state, a) -
                                             ra.grpo.policy.probability(ts.state, b)));
      }
    }
  }
  return {min_perfect >= 0.5 && max_gap < 0.1,
          fmt("full: min p(perfect) %.3f; accuracy-only: max gap %.2e", min_perfect, max_gap)};
}

Verdict pa_sft() {
  const auto samples = load_dataset(data_file("pa_sft_toy.jsonl"));
  if (samples.size() != 50) return {false, fmt("expected 50 samples, got %zu", samples.size())};
  const GridSpec grid;
  std::vector<std::string> targets;
  std::size_t longest = 0;
  for (const auto& s : samples) {
    targets.push_back(s.target_output);
    longest = std::max(longest, tokenize_response(s.target_output).size());
  }
  const SequenceModel init(Vocabulary::build(targets), static_cast<int>(samples.size()),
                           static_cast<int>(longest) + 1);
  std::vector<SftExample> data;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    data.push_back({static_cast<int>(i), init.vocabulary().encode(targets[i])});
  }
  const double before = mean_sequence_nll(init, data);
  const SequenceModel trained = run_pa_sft(init, data, 100, 50.0);
  const double after = mean_sequence_nll(trained, data);
  int consistent = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const GroundTruth gt = resolve_ground_truth(samples[i].ground_truth, grid, tax());
    consistent += consistency_reward(trained.generate(static_cast<int>(i)), gt) == 1.0;
  }
  const double reduction = 1.0 - after / before;
  const double share = static_cast<double>(consistent) / static_cast<double>(samples.size());
  return {reduction >= 0.9 && share >= 0.95,
          fmt("nll %.3f -> %.4f (%.1f%% lower), consistent %d/%zu", before, after, 100 * reduction,
              consistent, samples.size())};
}

Verdict oracles() {
  constexpr int kStrings = 5000;
  constexpr int kRecordSets = 2000;
  t::MutationCorpus corpus(4);
  for (int i = 0; i < kStrings; ++i) {
    const std::string raw = i % 4 == 0 ? corpus.valid() : corpus.mutated();
    for (PatternKind kind : {PatternKind::Normal, PatternKind::Abnormal}) {
      if (matches_pattern(raw, kind) != t::naive_matches(raw, kind)) {
        return {false, "matches_pattern disagrees on: " + raw};
      }
    }
  }
  std::mt19937_64 gen(5);
  double worst = 0;
  for (int i = 0; i < kRecordSets; ++i) {
    const int n = 2 + static_cast<int>(gen() % 80);
    std::vector<LabeledPrediction> recs;
    std::vector<Label> truth;
    std::vector<std::optional<Label>> pred;
    for (int j = 0; j < n; ++j) {
      const Label tl = j == 0 ? Label::Normal : j == 1 ? Label::Anomalous : (gen() % 2 ? Label::Normal : Label::Anomalous);
      std::optional<Label> pl;
      if (gen() % 5) pl = gen() % 2 ? Label::Normal : Label::Anomalous;
      recs.push_back({tl, pl});
      truth.push_back(tl);
      pred.push_back(pl);
    }
    worst = std::max(worst, std::abs(balanced_accuracy(recs) - t::naive_balanced_accuracy(truth, pred)));
  }
  return {worst <= 1e-12, fmt("%d strings exact, %d record sets max diff %.1e", kStrings, kRecordSets, worst)};
}

Verdict grid_ablation() {
  const SyntheticTask task = SyntheticTask::load(data_file("synthetic_task.jsonl"));
  const std::vector<int> ks = {1, 2, 3, 4, 5};
  const auto rows = run_grid_ablation(task, tax(), ks, PipelineConfig{});
  std::ostringstream table;
  write_grid_ablation_csv(table, rows);
  std::printf("%s", table.str().c_str());
  const bool ok = rows.size() == ks.size() && rows[0].k == 1 && rows[0].location_match_rate == 1.0;
  return {ok, fmt("k=1 location match %.17g", rows.empty() ? -1.0 : rows[0].location_match_rate)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"reward_value_exactness", 1.0, reward_values},
      {"composition_bounds", 10.0, composition_bounds},
      {"advantage_normalization", 5.0, advantage_normalization},
      {"gradient_fidelity", 30.0, gradient_fidelity},
      {"end_to_end_sc_grpo", 60.0, end_to_end},
      {"reward_ablation_direction", 60.0, reward_ablation},
      {"toy_pa_sft", 60.0, pa_sft},
      {"parser_metric_oracles", 10.0, oracles},
      {"grid_ablation_harness", 300.0, grid_ablation},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = v.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %s: %s [%.3fs / %.0fs budget%s]\n", pass ? "PASS" : "FAIL", c.name, v.detail.c_str(),
                secs, c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
