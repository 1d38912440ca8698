#include "scgrpo/synthetic_task.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "jsonl.hpp"
#include "scgrpo/errors.hpp"
#include "scgrpo/sequence_model.hpp"

namespace scgrpo {

SyntheticTask SyntheticTask::parse(std::istream& in, const std::string& source) {
  SyntheticTask task;
  detail::read_jsonl(in, source, [&](const nlohmann::json& obj, std::size_t) {
    TaskRecord rec;
    const auto st = obj.find("state");
    if (st == obj.end() || !st->is_number_integer()) {
      throw std::invalid_argument("state: expected an integer");
    }
    rec.state = st->get<int>();
    rec.ground_truth = ground_truth_from_json(obj);
    const auto cands = obj.find("candidates");
    if (cands == obj.end() || !cands->is_array()) {
      throw std::invalid_argument("candidates: expected an array of strings");
    }
    for (const auto& c : *cands) {
      if (!c.is_string()) throw std::invalid_argument("candidates: expected an array of strings");
      rec.candidates.push_back(c.get<std::string>());
    }
    if (rec.candidates.size() < 2) throw std::invalid_argument("candidates: need at least 2");
    if (const auto t = obj.find("think"); t != obj.end() && t->is_string()) {
      rec.think = t->get<std::string>();
    }
    if (rec.state != static_cast<int>(task.records.size())) {
      throw std::invalid_argument("state: expected " + std::to_string(task.records.size()) +
                                  " (states are numbered consecutively from 0)");
    }
    task.records.push_back(std::move(rec));
  });
  if (task.records.empty()) throw FormatError(source, 0, "task has no states");
  return task;
}

SyntheticTask SyntheticTask::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  return parse(in, path.string());
}

ToyPolicy::ActionTable SyntheticTask::action_table() const {
  ToyPolicy::ActionTable table;
  for (const TaskRecord& r : records) table.push_back(r.candidates);
  return table;
}

std::vector<TrainingState> SyntheticTask::training_states(const GridSpec& grid,
                                                          const TypeTaxonomy& tax) const {
  std::vector<TrainingState> out;
  for (const TaskRecord& r : records) {
    try {
      out.push_back({r.state, resolve_ground_truth(r.ground_truth, grid, tax)});
    } catch (const ContractError& e) {
      throw ConfigError("state " + std::to_string(r.state) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> SyntheticTask::sft_targets() const {
  std::vector<std::string> out;
  for (const TaskRecord& r : records) {
    const GroundTruthRecord& gt = r.ground_truth;
    out.push_back(render_target(r.think.value_or("Inspect the image."), gt.label,
                                gt.location.value_or(""), gt.type.value_or("")));
  }
  return out;
}

Scorer make_scorer(const TypeTaxonomy& tax, const RewardConfig& config) {
  return [&tax, config](std::string_view raw, const GroundTruth& gt) {
    return total_reward(raw, gt, tax, config).total;
  };
}

void write_reward_curve_csv(std::ostream& out, std::span<const IterationStats> curve) {
  out << "iteration,mean_reward,kl,objective\n";
  char buf[128];
  for (const IterationStats& s : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", s.iteration, s.mean_reward, s.kl,
                  s.objective);
    out << buf;
  }
}

PipelineResult run_pipeline(const SyntheticTask& task, const TypeTaxonomy& tax,
                            const PipelineConfig& config) {
  const auto dataset = task.training_states(config.reward.grid, tax);
  const auto actions = task.action_table();
  const Scorer scorer = make_scorer(tax, config.reward);

  PipelineResult result{TrainResult{ToyPolicy(actions), {}}, 0.0, 0.0, 0.0, {}, {}};
  ToyPolicy initial(actions);

  if (config.sft_epochs > 0) {
    const std::vector<std::string> targets = task.sft_targets();
    std::vector<std::string> texts = targets;
    for (const auto& row : actions) texts.insert(texts.end(), row.begin(), row.end());
    Vocabulary vocab = Vocabulary::build(texts);

    std::vector<SftExample> examples;
    std::size_t longest = 0;
    for (std::size_t s = 0; s < targets.size(); ++s) {
      examples.push_back({static_cast<int>(s), vocab.encode(targets[s])});
      longest = std::max(longest, examples.back().tokens.size());
    }
    SequenceModel model(std::move(vocab), static_cast<int>(targets.size()),
                        static_cast<int>(longest));
    result.sft_initial_nll = mean_sequence_nll(model, examples);
    model = run_pa_sft(std::move(model), examples, config.sft_epochs, config.sft_learning_rate);
    result.sft_final_nll = mean_sequence_nll(model, examples);

    std::vector<int> state_map(actions.size());
    for (std::size_t s = 0; s < state_map.size(); ++s) state_map[s] = static_cast<int>(s);
    initial = policy_from_sequence_model(model, actions, state_map);
  }

  result.max_reward = max_achievable_reward(initial, dataset, scorer);
  result.initial_expected_reward = expected_reward(initial, dataset, scorer);
  result.grpo = run_sc_grpo(dataset, initial, scorer, config.train);
  result.final_expected_reward = expected_reward(result.grpo.policy, dataset, scorer);
  return result;
}

std::vector<GridAblationRow> run_grid_ablation(const SyntheticTask& task, const TypeTaxonomy& tax,
                                               std::span<const int> grid_sizes,
                                               const PipelineConfig& config) {
  std::vector<GridAblationRow> rows;
  for (int k : grid_sizes) {
    PipelineConfig cfg = config;
    cfg.reward.grid = GridSpec(k);
    const PipelineResult run = run_pipeline(task, tax, cfg);

    std::size_t pairs = 0;
    std::size_t hits = 0;
    for (const TrainingState& ts : task.training_states(cfg.reward.grid, tax)) {
      if (ts.ground_truth.label != Label::Anomalous) continue;
      for (const std::string& cand : task.records[static_cast<std::size_t>(ts.state)].candidates) {
        const ParseOutcome parsed = parse(cand);
        if (!parsed.ok() || !parsed.response().location) continue;
        ++pairs;
        if (location_reward(parsed.response().location, ts.ground_truth, cfg.reward.grid) == 1.0) {
          ++hits;
        }
      }
    }
    rows.push_back({k, run.max_reward, run.initial_expected_reward, run.final_expected_reward,
                    pairs == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(pairs)});
  }
  return rows;
}

void write_grid_ablation_csv(std::ostream& out, std::span<const GridAblationRow> rows) {
  out << "k,max_reward,initial_reward,final_reward,location_match_rate\n";
  char buf[160];
  for (const GridAblationRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.k, r.max_reward,
                  r.initial_expected_reward, r.final_expected_reward, r.location_match_rate);
    out << buf;
  }
}

}  // namespace scgrpo
