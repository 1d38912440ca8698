#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scgrpo/dataset.hpp"
#include "scgrpo/errors.hpp"
#include "scgrpo/eval.hpp"
#include "scgrpo/service.hpp"
#include "scgrpo/synthetic_task.hpp"

namespace {

using namespace scgrpo;

// Options shared by every command that scores or resolves locations.
struct EngineOptions {
  std::string taxonomy;
  int grid = GridSpec::kDefault;
  std::string mode = "full";
  std::string gating = "indicator";

  void attach(CLI::App* cmd, bool with_env = false) {
    auto* t = cmd->add_option("--taxonomy", taxonomy, "Taxonomy file (default: built-in)");
    auto* g = cmd->add_option("--grid", grid, "Grid size k")->check(CLI::Range(1, 8));
    auto* m = cmd->add_option("--mode", mode, "Reward mode: full | accuracy_only");
    auto* gt = cmd->add_option("--gating", gating, "Gating: indicator | indicator_and_correct");
    if (with_env) {
      t->envname("SCGRPO_TAXONOMY");
      g->envname("SCGRPO_GRID");
      m->envname("SCGRPO_MODE");
      gt->envname("SCGRPO_GATING");
    }
  }

  EngineConfig build() const {
    EngineConfig cfg;
    if (!taxonomy.empty()) cfg.taxonomy = TypeTaxonomy::load(taxonomy);
    cfg.reward.grid = GridSpec(grid);
    const auto m = parse_reward_mode(mode);
    if (!m) throw ConfigError("unknown reward mode '" + mode + "'");
    cfg.reward.mode = *m;
    const auto g = parse_gating(gating);
    if (!g) throw ConfigError("unknown gating '" + gating + "'");
    cfg.reward.gating = *g;
    return cfg;
  }
};

void write_file(const std::string& path, std::span<const DatasetSample> samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path, 0, "cannot open output file");
  write_dataset(out, samples);
}

RewardServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured reward scoring and group-relative policy optimization toolkit"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "Check dataset samples; nonzero exit on any violation");
  std::string validate_path;
  EngineOptions validate_opts;
  validate->add_option("dataset", validate_path)->required()->check(CLI::ExistingFile);
  validate_opts.attach(validate);

  // split
  auto* split = app.add_subcommand("split", "Partition a dataset into PA-SFT and SC-GRPO sets");
  std::string split_path, split_sft_out, split_grpo_out;
  std::optional<double> split_ratio;
  std::uint64_t split_seed = 0;
  split->add_option("dataset", split_path)->required()->check(CLI::ExistingFile);
  split->add_option("--ratio", split_ratio, "Fraction for the PA-SFT set");
  split->add_option("--seed", split_seed);
  split->add_option("--pa-sft-out", split_sft_out)->required();
  split->add_option("--sc-grpo-out", split_grpo_out)->required();

  // subsample
  auto* sub = app.add_subcommand("subsample", "Label-stratified random subset");
  std::string sub_path, sub_out;
  double sub_fraction = 1.0;
  std::uint64_t sub_seed = 0;
  sub->add_option("dataset", sub_path)->required()->check(CLI::ExistingFile);
  sub->add_option("--fraction", sub_fraction)->required();
  sub->add_option("--seed", sub_seed);
  sub->add_option("--out", sub_out)->required();

  // stats
  auto* st = app.add_subcommand("stats", "Counts by label, type, category and grid cell");
  std::string stats_path;
  EngineOptions stats_opts;
  st->add_option("dataset", stats_path)->required()->check(CLI::ExistingFile);
  stats_opts.attach(st);

  // score
  auto* score = app.add_subcommand("score", "Score a JSONL file offline");
  std::string score_in, score_out;
  EngineOptions score_opts;
  score->add_option("input", score_in)->required();
  score->add_option("output", score_out)->required();
  score_opts.attach(score);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Balanced accuracy per dataset");
  std::string eval_path, eval_csv;
  evaluate->add_option("predictions", eval_path)->required();
  evaluate->add_option("--csv", eval_csv, "Also write the report as CSV");

  // train
  auto* train = app.add_subcommand("train", "Run the toy two-stage pipeline on a task file");
  std::string train_task, train_curve;
  EngineOptions train_opts;
  PipelineConfig pipeline;
  train->add_option("task", train_task)->required()->check(CLI::ExistingFile);
  train_opts.attach(train);
  train->add_option("--epochs", pipeline.train.epochs);
  train->add_option("--group-size", pipeline.train.group_size);
  train->add_option("--kl", pipeline.train.kl_coeff);
  train->add_option("--clip", pipeline.train.clip);
  train->add_option("--lr", pipeline.train.learning_rate);
  train->add_option("--seed", pipeline.train.seed);
  train->add_option("--batch-size", pipeline.train.batch_size);
  train->add_option("--sft-epochs", pipeline.sft_epochs, "Supervised epochs before RL (0 = skip)");
  train->add_option("--sft-lr", pipeline.sft_learning_rate);
  train->add_option("--curve", train_curve, "Write the reward curve CSV here");

  // grid-ablation
  auto* ablation = app.add_subcommand("grid-ablation", "Reward-vs-grid-size table");
  std::string ablation_task, ablation_out;
  std::vector<int> ablation_ks{1, 2, 3, 4, 5};
  EngineOptions ablation_opts;
  PipelineConfig ablation_pipeline;
  ablation->add_option("task", ablation_task)->required()->check(CLI::ExistingFile);
  ablation->add_option("--k", ablation_ks, "Grid sizes")->delimiter(',');
  ablation->add_option("--epochs", ablation_pipeline.train.epochs);
  ablation->add_option("--seed", ablation_pipeline.train.seed);
  ablation->add_option("--out", ablation_out, "Write CSV here instead of stdout");
  ablation_opts.attach(ablation);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP reward service (flag > env > default)");
  std::string bind = "127.0.0.1:8080";
  std::size_t max_batch = 1024;
  EngineOptions serve_opts;
  serve->add_option("--bind", bind, "host:port")->envname("SCGRPO_BIND");
  serve->add_option("--max-batch", max_batch)->envname("SCGRPO_MAX_BATCH");
  bool print_config = false;
  serve->add_flag("--print-config", print_config, "Print the resolved configuration and exit");
  serve_opts.attach(serve, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const EngineConfig cfg = validate_opts.build();
      const auto samples = load_dataset(validate_path);
      std::size_t bad = 0;
      for (const DatasetSample& s : samples) {
        const auto violations = validate_sample(s, cfg.reward.grid, cfg.taxonomy);
        if (violations.empty()) continue;
        ++bad;
        for (const SampleViolation& v : violations) {
          std::cout << s.id << '\t' << to_string(v.rule) << '\t' << v.field << '\t' << v.detail
                    << '\n';
        }
      }
      std::cout << samples.size() << " samples, " << bad << " with violations\n";
      return bad == 0 ? 0 : 1;
    }

    if (*split) {
      const auto samples = load_dataset(split_path);
      const StageSplit parts = split_stages(samples, split_ratio, split_seed);
      write_file(split_sft_out, parts.pa_sft);
      write_file(split_grpo_out, parts.sc_grpo);
      std::cout << "pa_sft " << parts.pa_sft.size() << ", sc_grpo " << parts.sc_grpo.size() << '\n';
      return 0;
    }

    if (*sub) {
      const auto samples = load_dataset(sub_path);
      const auto subset = subsample(samples, sub_fraction, sub_seed);
      write_file(sub_out, subset);
      std::cout << subset.size() << " of " << samples.size() << " samples\n";
      return 0;
    }

    if (*st) {
      const EngineConfig cfg = stats_opts.build();
      print_stats(std::cout, stats(load_dataset(stats_path), cfg.reward.grid, cfg.taxonomy));
      return 0;
    }

    if (*score) {
      const ScoreFileSummary s = score_file(score_in, score_out, score_opts.build());
      std::cout << "lines " << s.lines << ", total " << s.total << ", mean " << s.mean() << '\n';
      return 0;
    }

    if (*evaluate) {
      const EvalReport report = evaluate_run(eval_path);
      print_report_table(std::cout, report);
      if (!eval_csv.empty()) {
        std::ofstream out(eval_csv, std::ios::trunc);
        if (!out) throw FormatError(eval_csv, 0, "cannot open output file");
        write_report_csv(out, report);
      }
      return 0;
    }

    if (*train) {
      const EngineConfig cfg = train_opts.build();
      pipeline.reward = cfg.reward;
      const SyntheticTask task = SyntheticTask::load(train_task);
      const PipelineResult r = run_pipeline(task, cfg.taxonomy, pipeline);
      if (r.sft_initial_nll) {
        std::cout << "pa-sft nll " << *r.sft_initial_nll << " -> " << *r.sft_final_nll << '\n';
      }
      std::cout << "expected reward " << r.initial_expected_reward << " -> "
                << r.final_expected_reward << " (max " << r.max_reward << ")\n";
      if (!train_curve.empty()) {
        std::ofstream out(train_curve, std::ios::trunc);
        if (!out) throw FormatError(train_curve, 0, "cannot open output file");
        write_reward_curve_csv(out, r.grpo.curve);
      }
      return 0;
    }

    if (*ablation) {
      const EngineConfig cfg = ablation_opts.build();
      ablation_pipeline.reward = cfg.reward;
      const SyntheticTask task = SyntheticTask::load(ablation_task);
      const auto rows = run_grid_ablation(task, cfg.taxonomy, ablation_ks, ablation_pipeline);
      if (ablation_out.empty()) {
        write_grid_ablation_csv(std::cout, rows);
      } else {
        std::ofstream out(ablation_out, std::ios::trunc);
        if (!out) throw FormatError(ablation_out, 0, "cannot open output file");
        write_grid_ablation_csv(out, rows);
      }
      return 0;
    }

    if (*serve) {
      EngineConfig cfg = serve_opts.build();
      cfg.max_batch = max_batch;
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw ConfigError("--bind expects host:port");
      const std::string host = bind.substr(0, colon);
      const int port = std::stoi(bind.substr(colon + 1));
      if (print_config) {
        nlohmann::ordered_json out = health(cfg);
        out["bind"] = bind;
        std::cout << out.dump(2) << '\n';
        return 0;
      }

      RewardServer server(cfg);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      spdlog::info("{} listening on {}:{} (config {})", kEngineVersion, host, bound, cfg.digest());
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
