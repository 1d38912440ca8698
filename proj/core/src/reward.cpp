#include "scgrpo/reward.hpp"

#include "scgrpo/errors.hpp"
#include "text_util.hpp"

namespace scgrpo {

std::string_view to_string(RewardMode mode) {
  return mode == RewardMode::Full ? "full" : "accuracy_only";
}

std::string_view to_string(Gating gating) {
  return gating == Gating::Indicator ? "indicator" : "indicator_and_correct";
}

std::optional<RewardMode> parse_reward_mode(std::string_view text) {
  const std::string t = detail::normalize(text);
  if (t == "full") return RewardMode::Full;
  if (t == "accuracy_only" || t == "accuracy-only" || t == "accuracy") return RewardMode::AccuracyOnly;
  return std::nullopt;
}

std::optional<Gating> parse_gating(std::string_view text) {
  const std::string t = detail::normalize(text);
  if (t == "indicator") return Gating::Indicator;
  if (t == "indicator_and_correct" || t == "indicator-and-correct") return Gating::IndicatorAndCorrect;
  return std::nullopt;
}

double consistency_reward(std::string_view raw, const GroundTruth& gt) {
  return matches_pattern(raw, pattern_for(gt.label)) ? 1.0 : 0.0;
}

double accuracy_reward(std::optional<Answer> pred, const GroundTruth& gt) {
  return pred && label_of(*pred) == gt.label ? 1.0 : 0.0;
}

double location_reward(const std::optional<std::string>& pred_location, const GroundTruth& gt,
                       const GridSpec& grid) {
  if (gt.label != Label::Anomalous) {
    throw ContractError("location_reward called for a normal sample");
  }
  if (!pred_location || !gt.location_cell) return 0.0;
  const auto cell = map_location(*pred_location, grid);
  return cell && *cell == *gt.location_cell ? 1.0 : 0.0;
}

double type_reward(const std::optional<std::string>& pred, const GroundTruth& gt,
                   const TypeTaxonomy& tax) {
  if (gt.label != Label::Anomalous) {
    throw ContractError("type_reward called for a normal sample");
  }
  if (!gt.type_label) throw ContractError("anomalous ground truth without a type");
  if (!pred) {
    // Still validate the configuration so a bad gt type never scores silently.
    if (!tax.is_canonical(*gt.type_label)) {
      throw ConfigError("ground-truth type '" + *gt.type_label + "' is not in the taxonomy");
    }
    return 0.0;
  }
  return type_level_value(type_match_level(*pred, *gt.type_label, tax));
}

RewardBreakdown total_reward(std::string_view raw, const GroundTruth& gt,
                             const TypeTaxonomy& tax, const RewardConfig& config) {
  const ParseOutcome parsed = parse(raw);
  RewardBreakdown b;
  b.r_con = parsed.ok() && parsed.response().pattern == pattern_for(gt.label) ? 1.0 : 0.0;
  // Malformed text still earns accuracy when a trailing answer pair exists.
  const std::optional<Answer> answer = parsed.ok()
                                           ? std::optional<Answer>(parsed.response().answer)
                                           : extract_answer(raw, ExtractionMode::Structured);
  b.r_acc = accuracy_reward(answer, gt);

  if (gt.label == Label::Anomalous && parsed.ok()) {
    const StructuredResponse& r = parsed.response();
    b.r_loc = location_reward(r.location, gt, config.grid);
    b.r_type = type_reward(r.anomaly_type, gt, tax);
  }

  if (config.mode == RewardMode::AccuracyOnly) {
    b.total = b.r_acc;
    return b;
  }
  const double indicator = gt.label == Label::Anomalous ? 1.0 : 0.0;
  const double gate = config.gating == Gating::IndicatorAndCorrect ? b.r_acc : 1.0;
  b.total = b.r_con + b.r_acc + indicator * gate * (b.r_loc + b.r_type);
  return b;
}

}  // namespace scgrpo
