#pragma once

#include <optional>
#include <string_view>

namespace scgrpo {

// k x k grid over the image, cells numbered row-major from the top-left.
class GridSpec {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 8;
  static constexpr int kDefault = 3;

  GridSpec() = default;
  explicit GridSpec(int k);  // throws ConfigError outside [kMin, kMax]

  int k() const { return k_; }
  int cells() const { return k_ * k_; }
  int cell(int row, int col) const { return row * k_ + col; }

  bool operator==(const GridSpec&) const = default;

 private:
  int k_ = kDefault;
};

// Text-to-cell mapping. Reads directional keywords (top/upper,
// bottom/lower, left, right, center/centre/central/middle). A description
// naming a single axis lands in the middle band of the other axis; on
// even grids there is no middle band and such descriptions do not resolve.
// Contradictory keywords on one axis (e.g. "top ... bottom") do not resolve.
std::optional<int> map_location(std::string_view description, const GridSpec& grid);

}  // namespace scgrpo
