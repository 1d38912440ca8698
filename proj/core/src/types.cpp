#include "scgrpo/types.hpp"

#include "scgrpo/errors.hpp"
#include "text_util.hpp"

namespace scgrpo {

std::string_view to_string(Label label) {
  return label == Label::Normal ? "normal" : "anomalous";
}

std::string_view to_string(Answer answer) {
  return answer == Answer::Yes ? "Yes" : "No";
}

std::string_view to_string(PatternKind kind) {
  return kind == PatternKind::Normal ? "normal" : "abnormal";
}

std::optional<Label> parse_label(std::string_view text) {
  const std::string lowered = detail::to_lower(detail::trim(text));
  if (lowered == "normal") return Label::Normal;
  if (lowered == "anomalous" || lowered == "abnormal") return Label::Anomalous;
  return std::nullopt;
}

GroundTruth make_ground_truth(Label label, std::optional<int> location_cell,
                              std::optional<std::string> type_label,
                              std::optional<std::string> coarse_category) {
  if (label == Label::Anomalous && (!location_cell || !type_label)) {
    throw ContractError("anomalous ground truth needs a location cell and a type");
  }
  if (label == Label::Normal && (location_cell || type_label)) {
    throw ContractError("normal ground truth must not carry a location or a type");
  }
  if (location_cell && *location_cell < 0) throw ContractError("location cell must be >= 0");
  return GroundTruth{label, location_cell, std::move(type_label),
                     std::move(coarse_category)};
}

}  // namespace scgrpo
