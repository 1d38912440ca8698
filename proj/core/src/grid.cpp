#include "scgrpo/grid.hpp"

#include <string>

#include "scgrpo/errors.hpp"
#include "text_util.hpp"

namespace scgrpo {

GridSpec::GridSpec(int k) : k_(k) {
  if (k < kMin || k > kMax) {
    throw ConfigError("grid size k must be in [1, 8], got " + std::to_string(k));
  }
}

namespace {

enum class Band { Unset, Low, Mid, High, Conflict };

void assign(Band& slot, Band value) {
  if (slot == Band::Unset || slot == value) {
    slot = value;
  } else {
    slot = Band::Conflict;
  }
}

std::optional<int> band_index(Band band, int k) {
  switch (band) {
    case Band::Low: return 0;
    case Band::High: return k - 1;
    case Band::Mid:
      if (k % 2 == 0) return std::nullopt;
      return (k - 1) / 2;
    default: return std::nullopt;
  }
}

}  // namespace

std::optional<int> map_location(std::string_view description, const GridSpec& grid) {
  Band row = Band::Unset;
  Band col = Band::Unset;
  bool center = false;

  for (const std::string& w : detail::words(description)) {
    if (w == "top" || w == "upper") {
      assign(row, Band::Low);
    } else if (w == "bottom" || w == "lower") {
      assign(row, Band::High);
    } else if (w == "left") {
      assign(col, Band::Low);
    } else if (w == "right") {
      assign(col, Band::High);
    } else if (w == "center" || w == "centre" || w == "central" || w == "middle") {
      center = true;
    }
  }

  if (row == Band::Conflict || col == Band::Conflict) return std::nullopt;
  if (row == Band::Unset && col == Band::Unset && !center) return std::nullopt;
  // A named axis pins its band; anything unnamed falls to the middle.
  if (row == Band::Unset) row = Band::Mid;
  if (col == Band::Unset) col = Band::Mid;

  const auto r = band_index(row, grid.k());
  const auto c = band_index(col, grid.k());
  if (!r || !c) return std::nullopt;
  return grid.cell(*r, *c);
}

}  // namespace scgrpo
