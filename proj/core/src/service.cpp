#include "scgrpo/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "jsonl.hpp"
#include "scgrpo/errors.hpp"

namespace scgrpo {

std::string EngineConfig::digest() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  feed(taxonomy.digest());
  feed(std::to_string(reward.grid.k()));
  feed(to_string(reward.mode));
  feed(to_string(reward.gating));
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScoreItem score_item_from_json(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + "expected an object");
  ScoreItem item;
  const auto id = obj.find("id");
  if (id == obj.end() || !id->is_string()) throw std::invalid_argument(where + "id: expected a string");
  item.id = id->get<std::string>();
  auto raw = obj.find("raw_output");
  if (raw == obj.end()) raw = obj.find("target_output");
  if (raw == obj.end() || !raw->is_string()) {
    throw std::invalid_argument(where + "raw_output: expected a string");
  }
  item.raw_output = raw->get<std::string>();
  item.ground_truth = ground_truth_from_json(obj, where);
  return item;
}

nlohmann::ordered_json score_item(const ScoreItem& item, const TypeTaxonomy& tax,
                                  const RewardConfig& config) {
  const GroundTruth gt = resolve_ground_truth(item.ground_truth, config.grid, tax);
  const ParseOutcome parsed = parse(item.raw_output);
  const RewardBreakdown b = total_reward(item.raw_output, gt, tax, config);

  nlohmann::ordered_json out;
  out["id"] = item.id;
  if (parsed.ok()) {
    out["parse_status"] = "ok";
  } else {
    out["parse_status"] = std::string(to_string(parsed.error().first_violation)) + "@" +
                          std::to_string(parsed.error().byte_offset);
  }
  out["r_con"] = b.r_con;
  out["r_acc"] = b.r_acc;
  out["r_loc"] = b.r_loc;
  out["r_type"] = b.r_type;
  out["total"] = b.total;
  return out;
}

namespace {

nlohmann::ordered_json config_echo(const EngineConfig& engine, const RewardConfig& reward) {
  nlohmann::ordered_json c;
  c["grid"] = reward.grid.k();
  c["mode"] = std::string(to_string(reward.mode));
  c["gating"] = std::string(to_string(reward.gating));
  c["taxonomy_digest"] = engine.taxonomy.digest();
  return c;
}

RewardConfig apply_overrides(const nlohmann::json& body, const EngineConfig& engine) {
  RewardConfig cfg = engine.reward;
  const auto it = body.find("config");
  if (it == body.end() || it->is_null()) return cfg;
  if (!it->is_object()) throw RequestError(400, "config: expected an object");
  for (const auto& [key, value] : it->items()) {
    if (key == "grid") {
      if (!value.is_number_integer()) throw RequestError(400, "config.grid: expected an integer");
      try {
        cfg.grid = GridSpec(value.get<int>());
      } catch (const ConfigError& e) {
        throw RequestError(400, std::string("config.grid: ") + e.what());
      }
    } else if (key == "mode") {
      const auto m = value.is_string() ? parse_reward_mode(value.get<std::string>()) : std::nullopt;
      if (!m) throw RequestError(400, "config.mode: expected 'full' or 'accuracy_only'");
      cfg.mode = *m;
    } else if (key == "gating") {
      const auto g = value.is_string() ? parse_gating(value.get<std::string>()) : std::nullopt;
      if (!g) throw RequestError(400, "config.gating: expected 'indicator' or 'indicator_and_correct'");
      cfg.gating = *g;
    } else {
      throw RequestError(400, "config." + key + ": unknown field");
    }
  }
  return cfg;
}

}  // namespace

nlohmann::ordered_json score_request(const nlohmann::json& body, const EngineConfig& engine) {
  if (!body.is_object()) throw RequestError(400, "body: expected a JSON object");
  const auto items = body.find("items");
  if (items == body.end() || !items->is_array()) throw RequestError(400, "items: expected an array");
  if (items->empty()) throw RequestError(400, "items: must not be empty");
  if (items->size() > engine.max_batch) {
    throw RequestError(413, "items: " + std::to_string(items->size()) + " exceeds the batch limit of " +
                                std::to_string(engine.max_batch));
  }
  const RewardConfig cfg = apply_overrides(body, engine);

  std::vector<ScoreItem> parsed;
  parsed.reserve(items->size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < items->size(); ++i) {
    const std::string where = "items[" + std::to_string(i) + "].";
    try {
      parsed.push_back(score_item_from_json((*items)[i], where));
    } catch (const std::invalid_argument& e) {
      throw RequestError(400, e.what());
    }
    if (!ids.insert(parsed.back().id).second) {
      throw RequestError(400, where + "id: duplicate '" + parsed.back().id + "'");
    }
  }

  nlohmann::ordered_json response;
  response["engine_version"] = kEngineVersion;
  response["config"] = config_echo(engine, cfg);
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    try {
      results.push_back(score_item(parsed[i], engine.taxonomy, cfg));
    } catch (const ContractError& e) {
      throw RequestError(400, "items[" + std::to_string(i) + "]: " + e.what());
    } catch (const ConfigError& e) {
      throw RequestError(400, "items[" + std::to_string(i) + "]: " + e.what());
    }
  }
  response["results"] = std::move(results);
  return response;
}

nlohmann::ordered_json health(const EngineConfig& engine) {
  nlohmann::ordered_json h;
  h["status"] = "ok";
  h["engine_version"] = kEngineVersion;
  h["config_digest"] = engine.digest();
  h["config"] = config_echo(engine, engine.reward);
  h["max_batch"] = engine.max_batch;
  return h;
}

ScoreFileSummary score_file(const std::filesystem::path& input, const std::filesystem::path& output,
                            const EngineConfig& engine) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw FormatError(input.string(), 0, "cannot open input file");
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(output.string(), 0, "cannot open output file");

  ScoreFileSummary summary;
  detail::read_jsonl(in, input.string(), [&](const nlohmann::json& obj, std::size_t) {
    const ScoreItem item = score_item_from_json(obj);
    nlohmann::ordered_json result;
    try {
      result = score_item(item, engine.taxonomy, engine.reward);
    } catch (const ContractError& e) {
      throw std::invalid_argument(e.what());
    }
    ++summary.lines;
    summary.total += result["total"].get<double>();
    out << result.dump() << '\n';
  });
  if (!out) throw FormatError(output.string(), 0, "write failed");
  return summary;
}

struct RewardServer::Impl {
  EngineConfig engine;
  httplib::Server server;
};

RewardServer::RewardServer(EngineConfig engine) : impl_(std::make_unique<Impl>()) {
  impl_->engine = std::move(engine);
  const EngineConfig& cfg = impl_->engine;

  impl_->server.Get("/v1/health", [&cfg](const httplib::Request&, httplib::Response& res) {
    res.set_content(health(cfg).dump(), "application/json");
  });

  impl_->server.Post("/v1/score", [&cfg](const httplib::Request& req, httplib::Response& res) {
    auto reply_error = [&](int status, const std::string& message) {
      nlohmann::ordered_json err;
      err["error"] = message;
      res.status = status;
      res.set_content(err.dump(), "application/json");
    };
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      reply_error(400, std::string("body: invalid JSON: ") + e.what());
      return;
    }
    try {
      res.set_content(score_request(body, cfg).dump(), "application/json");
    } catch (const RequestError& e) {
      reply_error(e.status(), e.what());
    } catch (const std::exception& e) {
      spdlog::error("score request failed: {}", e.what());
      reply_error(500, "internal error");
    }
  });
}

RewardServer::~RewardServer() { stop(); }

int RewardServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void RewardServer::listen() { impl_->server.listen_after_bind(); }

void RewardServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void RewardServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace scgrpo
