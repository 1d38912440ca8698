#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace scgrpo {

enum class Label { Normal, Anomalous };
enum class Answer { Yes, No };
enum class PatternKind { Normal, Abnormal };

std::string_view to_string(Label label);
std::string_view to_string(Answer answer);
std::string_view to_string(PatternKind kind);

// Accepts "normal"/"anomalous" (also "abnormal"), case-insensitive.
std::optional<Label> parse_label(std::string_view text);

// "Yes" marks an anomaly.
inline Label label_of(Answer answer) {
  return answer == Answer::Yes ? Label::Anomalous : Label::Normal;
}
inline PatternKind pattern_for(Label label) {
  return label == Label::Normal ? PatternKind::Normal : PatternKind::Abnormal;
}

// Per-sample label and, for anomalies, the resolved grid cell and canonical
// anomaly type. Build through make_ground_truth() to get invariant checks.
struct GroundTruth {
  Label label = Label::Normal;
  std::optional<int> location_cell;
  std::optional<std::string> type_label;
  std::optional<std::string> coarse_category;

  bool operator==(const GroundTruth&) const = default;
};

// Throws ContractError when the label/field invariants do not hold.
GroundTruth make_ground_truth(Label label, std::optional<int> location_cell,
                              std::optional<std::string> type_label,
                              std::optional<std::string> coarse_category = {});

}  // namespace scgrpo
