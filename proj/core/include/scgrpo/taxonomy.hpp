#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace scgrpo {

// Anomaly type hierarchy backing the multi-level type reward.
//
// File format, one type per line:
//
//   type | category | group | synonyms: a, b, c
//
// The synonyms field is optional. `#` starts a comment. A line
// `fuzzy_threshold: 0.5` overrides the token-overlap threshold. Every name is
// normalized (lowercase, trimmed, internal whitespace collapsed).
class TypeTaxonomy {
 public:
  static constexpr double kDefaultFuzzyThreshold = 0.5;

  struct Entry {
    std::string type;
    std::string category;
    std::string group;
    std::vector<std::string> synonyms;
  };

  // Throws FormatError on syntax problems and ConfigError on broken
  // invariants (category mapped to two groups, reflexive or ambiguous
  // synonyms, duplicate types).
  static TypeTaxonomy parse(std::string_view text, const std::string& source = "<taxonomy>");
  static TypeTaxonomy load(const std::filesystem::path& path);
  // The default taxonomy shipped in data/taxonomy.txt, compiled in.
  static const TypeTaxonomy& builtin();

  bool is_canonical(std::string_view type) const;
  // Canonical type for an exact type name or synonym.
  std::optional<std::string> canonical_of(std::string_view text) const;
  bool are_synonyms(std::string_view a, std::string_view b) const;
  // Category/group of a type, synonym, or category/group name; free text
  // falls back to the longest known term it contains as a word run.
  std::optional<std::string> category_of(std::string_view text) const;
  std::optional<std::string> group_of(std::string_view text) const;

  double fuzzy_threshold() const { return fuzzy_threshold_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::set<std::string> categories() const;
  // Stable 64-bit FNV-1a hash of the normalized content, hex encoded.
  std::string digest() const;

 private:
  const Entry* resolve(std::string_view text) const;

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;  // type or synonym -> entry
  std::map<std::string, std::string> category_group_;
  double fuzzy_threshold_ = kDefaultFuzzyThreshold;
};

enum class MatchLevel { Exact, Semantic, Category, Fuzzy, Group, None };

std::string_view to_string(MatchLevel level);

// |shared word tokens| / |token union|; 0 when both are empty.
double token_jaccard(std::string_view a, std::string_view b);

// First matching level in order Exact, Semantic, Category, Fuzzy, Group.
// Throws ConfigError when gt_type is not a canonical type.
MatchLevel type_match_level(std::string_view pred, std::string_view gt_type,
                            const TypeTaxonomy& tax);

double type_level_value(MatchLevel level);

}  // namespace scgrpo
