#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "scgrpo/grid.hpp"
#include "scgrpo/taxonomy.hpp"
#include "scgrpo/types.hpp"

namespace scgrpo {

// Ground truth as written in files and requests: the location may be text
// (resolved through map_location at the active grid size) or a cell index,
// and the type may be a synonym of a canonical type.
struct GroundTruthRecord {
  Label label = Label::Normal;
  std::optional<std::string> location;
  std::optional<int> location_cell;
  std::optional<std::string> type;
  std::optional<std::string> category;

  bool operator==(const GroundTruthRecord&) const = default;
};

// Reads `label`, `location`, `location_cell`, `type`, `category` from an
// object. Throws std::invalid_argument naming the offending field.
GroundTruthRecord ground_truth_from_json(const nlohmann::json& obj, const std::string& where = {});
void ground_truth_to_json(const GroundTruthRecord& gt, nlohmann::ordered_json& out);

// Throws ContractError when the record cannot produce a valid GroundTruth.
GroundTruth resolve_ground_truth(const GroundTruthRecord& record, const GridSpec& grid,
                                 const TypeTaxonomy& tax);

}  // namespace scgrpo
