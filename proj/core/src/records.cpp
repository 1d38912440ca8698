#include "scgrpo/records.hpp"

#include <stdexcept>

#include "scgrpo/errors.hpp"

namespace scgrpo {
namespace {

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key,
                                           const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument(where + key + ": expected a string");
  return it->get<std::string>();
}

}  // namespace

GroundTruthRecord ground_truth_from_json(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + "expected an object");
  GroundTruthRecord gt;
  const auto label_text = optional_string(obj, "label", where);
  if (!label_text) throw std::invalid_argument(where + "label: missing");
  const auto label = parse_label(*label_text);
  if (!label) throw std::invalid_argument(where + "label: expected 'normal' or 'anomalous'");
  gt.label = *label;
  gt.location = optional_string(obj, "location", where);
  gt.type = optional_string(obj, "type", where);
  gt.category = optional_string(obj, "category", where);
  if (const auto it = obj.find("location_cell"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) {
      throw std::invalid_argument(where + "location_cell: expected an integer");
    }
    gt.location_cell = it->get<int>();
  }
  return gt;
}

void ground_truth_to_json(const GroundTruthRecord& gt, nlohmann::ordered_json& out) {
  out["label"] = std::string(to_string(gt.label));
  if (gt.location) out["location"] = *gt.location;
  if (gt.location_cell) out["location_cell"] = *gt.location_cell;
  if (gt.type) out["type"] = *gt.type;
  if (gt.category) out["category"] = *gt.category;
}

GroundTruth resolve_ground_truth(const GroundTruthRecord& record, const GridSpec& grid,
                                 const TypeTaxonomy& tax) {
  if (record.label == Label::Normal) {
    if (record.location || record.location_cell || record.type) {
      throw ContractError("normal sample carries a location or a type");
    }
    return make_ground_truth(Label::Normal, std::nullopt, std::nullopt, record.category);
  }

  std::optional<int> cell;
  if (record.location_cell) {
    if (*record.location_cell < 0 || *record.location_cell >= grid.cells()) {
      throw ContractError("location_cell " + std::to_string(*record.location_cell) +
                          " is outside the " + std::to_string(grid.k()) + "x" +
                          std::to_string(grid.k()) + " grid");
    }
    cell = record.location_cell;
  } else if (record.location) {
    cell = map_location(*record.location, grid);
    if (!cell) {
      throw ContractError("location '" + *record.location + "' does not resolve on a " +
                          std::to_string(grid.k()) + "x" + std::to_string(grid.k()) + " grid");
    }
  } else {
    throw ContractError("anomalous sample has no location");
  }

  if (!record.type) throw ContractError("anomalous sample has no type");
  const auto canonical = tax.canonical_of(*record.type);
  if (!canonical) throw ContractError("type '" + *record.type + "' is not in the taxonomy");

  auto category = record.category ? record.category : tax.category_of(*canonical);
  return make_ground_truth(Label::Anomalous, cell, canonical, std::move(category));
}

}  // namespace scgrpo
