#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "scgrpo/records.hpp"
#include "scgrpo/reward.hpp"
#include "scgrpo/taxonomy.hpp"

namespace scgrpo {

inline constexpr const char* kEngineVersion = "scgrpo-engine/1.0.0";

struct EngineConfig {
  TypeTaxonomy taxonomy = TypeTaxonomy::builtin();
  RewardConfig reward;
  std::size_t max_batch = 1024;

  // Hash of taxonomy, grid, mode and gating.
  std::string digest() const;
};

// A request the engine refuses. `status` is the HTTP code to answer with.
class RequestError : public std::runtime_error {
 public:
  RequestError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

// One scoring item: {"id", "raw_output", "label", "location" | "location_cell",
// "type", "category"}. Ground-truth fields sit next to the output.
struct ScoreItem {
  std::string id;
  std::string raw_output;
  GroundTruthRecord ground_truth;
};

ScoreItem score_item_from_json(const nlohmann::json& obj, const std::string& where = {});

// {"id", "parse_status", "r_con", "r_acc", "r_loc", "r_type", "total"}
nlohmann::ordered_json score_item(const ScoreItem& item, const TypeTaxonomy& tax,
                                  const RewardConfig& config);

// Request:  {"items": [ScoreItem...], "config": {"grid", "mode", "gating"}?}
// Response: {"engine_version", "config": {...}, "results": [...]} with
//           results in request order. Throws RequestError (400 / 413).
nlohmann::ordered_json score_request(const nlohmann::json& body, const EngineConfig& engine);

nlohmann::ordered_json health(const EngineConfig& engine);

struct ScoreFileSummary {
  std::size_t lines = 0;
  double total = 0.0;
  double mean() const { return lines == 0 ? 0.0 : total / static_cast<double>(lines); }
};

// Scores every JSONL line of `input` (ScoreItem fields; dataset files work
// too: `target_output` stands in for `raw_output` and `id` is required)
// and writes one result line per input line.
ScoreFileSummary score_file(const std::filesystem::path& input, const std::filesystem::path& output,
                            const EngineConfig& engine);

// HTTP front end: POST /v1/score, GET /v1/health. Stateless and thread-safe.
class RewardServer {
 public:
  explicit RewardServer(EngineConfig engine);
  ~RewardServer();
  RewardServer(const RewardServer&) = delete;
  RewardServer& operator=(const RewardServer&) = delete;

  // Returns the bound port; throws std::runtime_error on failure.
  // Port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scgrpo
