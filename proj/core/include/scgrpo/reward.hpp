#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "scgrpo/grid.hpp"
#include "scgrpo/response_parser.hpp"
#include "scgrpo/taxonomy.hpp"
#include "scgrpo/types.hpp"

namespace scgrpo {

enum class RewardMode { Full, AccuracyOnly };
// Indicator: location/type terms apply to every anomalous sample.
// IndicatorAndCorrect: they additionally require a correct answer.
enum class Gating { Indicator, IndicatorAndCorrect };

std::string_view to_string(RewardMode mode);
std::string_view to_string(Gating gating);
std::optional<RewardMode> parse_reward_mode(std::string_view text);
std::optional<Gating> parse_gating(std::string_view text);

struct RewardBreakdown {
  double r_con = 0.0;
  double r_acc = 0.0;
  double r_loc = 0.0;
  double r_type = 0.0;
  double total = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

struct RewardConfig {
  GridSpec grid;
  RewardMode mode = RewardMode::Full;
  Gating gating = Gating::Indicator;
};

double consistency_reward(std::string_view raw, const GroundTruth& gt);
double accuracy_reward(std::optional<Answer> pred, const GroundTruth& gt);

// Requires gt.label == Anomalous; throws ContractError otherwise.
double location_reward(const std::optional<std::string>& pred_location, const GroundTruth& gt,
                       const GridSpec& grid);
double type_reward(const std::optional<std::string>& pred, const GroundTruth& gt,
                   const TypeTaxonomy& tax);

RewardBreakdown total_reward(std::string_view raw, const GroundTruth& gt,
                             const TypeTaxonomy& tax, const RewardConfig& config = {});

}  // namespace scgrpo
