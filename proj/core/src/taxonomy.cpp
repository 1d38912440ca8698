#include "scgrpo/taxonomy.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "scgrpo/errors.hpp"
#include "text_util.hpp"

namespace scgrpo {

extern const char* const kBuiltinTaxonomyText;

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = s.find(sep, start);
    parts.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return parts;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Start index of `needle` as a contiguous run inside `hay`, if any.
std::optional<std::size_t> find_run(const std::vector<std::string>& hay,
                                    const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(i))) return i;
  }
  return std::nullopt;
}

}  // namespace

TypeTaxonomy TypeTaxonomy::parse(std::string_view text, const std::string& source) {
  TypeTaxonomy tax;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (starts_with(line, "fuzzy_threshold:")) {
      const std::string value(detail::trim(line.substr(16)));
      char* end = nullptr;
      const double v = std::strtod(value.c_str(), &end);
      if (value.empty() || end != value.c_str() + value.size()) {
        throw FormatError(source, line_no, "fuzzy_threshold is not a number");
      }
      if (!(v > 0.0 && v <= 1.0)) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": fuzzy_threshold must be in (0, 1]");
      }
      tax.fuzzy_threshold_ = v;
      continue;
    }

    const auto fields = split(line, '|');
    if (fields.size() < 3 || fields.size() > 4) {
      throw FormatError(source, line_no, "expected 'type | category | group [| synonyms: ...]'");
    }
    Entry e{detail::normalize(fields[0]), detail::normalize(fields[1]),
            detail::normalize(fields[2]), {}};
    if (e.type.empty() || e.category.empty() || e.group.empty()) {
      throw FormatError(source, line_no, "type, category and group must be non-empty");
    }
    if (fields.size() == 4) {
      const std::string_view syn = detail::trim(fields[3]);
      if (!starts_with(syn, "synonyms:")) {
        throw FormatError(source, line_no, "fourth field must start with 'synonyms:'");
      }
      for (std::string_view s : split(syn.substr(9), ',')) {
        std::string name = detail::normalize(s);
        if (name.empty()) continue;
        if (name == e.type) {
          throw ConfigError(source + ":" + std::to_string(line_no) + ": '" + name + "' lists itself as a synonym");
        }
        e.synonyms.push_back(std::move(name));
      }
    }

    if (auto [it, inserted] = tax.category_group_.emplace(e.category, e.group);
        !inserted && it->second != e.group) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": category '" + e.category +
                        "' already belongs to group '" + it->second + "'");
    }
    const std::size_t idx = tax.entries_.size();
    auto claim = [&](const std::string& name) {
      if (!tax.index_.emplace(name, idx).second) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": '" + name +
                          "' is already a type or synonym");
      }
    };
    claim(e.type);
    for (const auto& s : e.synonyms) claim(s);
    tax.entries_.push_back(std::move(e));
  }
  if (tax.entries_.empty()) throw FormatError(source, 0, "no types defined");
  return tax;
}

TypeTaxonomy TypeTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open taxonomy file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const TypeTaxonomy& TypeTaxonomy::builtin() {
  static const TypeTaxonomy tax = parse(kBuiltinTaxonomyText, "<builtin taxonomy>");
  return tax;
}

bool TypeTaxonomy::is_canonical(std::string_view type) const {
  const auto it = index_.find(detail::normalize(type));
  return it != index_.end() && entries_[it->second].type == it->first;
}

std::optional<std::string> TypeTaxonomy::canonical_of(std::string_view text) const {
  const auto it = index_.find(detail::normalize(text));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].type;
}

bool TypeTaxonomy::are_synonyms(std::string_view a, std::string_view b) const {
  const std::string na = detail::normalize(a);
  const std::string nb = detail::normalize(b);
  if (na == nb) return false;
  auto lists = [&](const std::string& type, const std::string& other) {
    const auto it = index_.find(type);
    if (it == index_.end()) return false;
    const Entry& e = entries_[it->second];
    return e.type == type &&
           std::find(e.synonyms.begin(), e.synonyms.end(), other) != e.synonyms.end();
  };
  return lists(na, nb) || lists(nb, na);
}

const TypeTaxonomy::Entry* TypeTaxonomy::resolve(std::string_view text) const {
  const std::string norm = detail::normalize(text);
  if (const auto it = index_.find(norm); it != index_.end()) return &entries_[it->second];

  const std::vector<std::string> hay = detail::words(norm);
  const Entry* best = nullptr;
  std::size_t best_len = 0;
  std::size_t best_pos = 0;
  for (const auto& [term, idx] : index_) {
    const std::vector<std::string> needle = detail::words(term);
    const auto pos = find_run(hay, needle);
    if (!pos) continue;
    if (needle.size() > best_len || (needle.size() == best_len && *pos < best_pos)) {
      best = &entries_[idx];
      best_len = needle.size();
      best_pos = *pos;
    }
  }
  return best;
}

std::optional<std::string> TypeTaxonomy::category_of(std::string_view text) const {
  const std::string norm = detail::normalize(text);
  if (category_group_.count(norm)) return norm;
  if (const Entry* e = resolve(norm)) return e->category;
  return std::nullopt;
}

std::optional<std::string> TypeTaxonomy::group_of(std::string_view text) const {
  const std::string norm = detail::normalize(text);
  if (const auto it = category_group_.find(norm); it != category_group_.end()) return it->second;
  for (const auto& [cat, group] : category_group_) {
    if (group == norm) return group;
  }
  if (const Entry* e = resolve(norm)) return e->group;
  return std::nullopt;
}

std::set<std::string> TypeTaxonomy::categories() const {
  std::set<std::string> out;
  for (const auto& [cat, group] : category_group_) out.insert(cat);
  return out;
}

std::string TypeTaxonomy::digest() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const Entry& e : entries_) {
    feed(e.type);
    feed(e.category);
    feed(e.group);
    for (const auto& s : e.synonyms) feed(s);
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", fuzzy_threshold_);
  feed(buf);
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string_view to_string(MatchLevel level) {
  switch (level) {
    case MatchLevel::Exact: return "exact";
    case MatchLevel::Semantic: return "semantic";
    case MatchLevel::Category: return "category";
    case MatchLevel::Fuzzy: return "fuzzy";
    case MatchLevel::Group: return "group";
    case MatchLevel::None: return "none";
  }
  return "?";
}

double token_jaccard(std::string_view a, std::string_view b) {
  const auto wa = detail::words(a);
  const auto wb = detail::words(b);
  const std::set<std::string> sa(wa.begin(), wa.end());
  const std::set<std::string> sb(wb.begin(), wb.end());
  std::size_t shared = 0;
  for (const auto& w : sa) shared += sb.count(w);
  const std::size_t uni = sa.size() + sb.size() - shared;
  return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

MatchLevel type_match_level(std::string_view pred, std::string_view gt_type,
                            const TypeTaxonomy& tax) {
  if (!tax.is_canonical(gt_type)) {
    throw ConfigError("ground-truth type '" + std::string(gt_type) + "' is not in the taxonomy");
  }
  const std::string p = detail::normalize(pred);
  const std::string g = detail::normalize(gt_type);
  if (p.empty()) return MatchLevel::None;
  if (p == g) return MatchLevel::Exact;
  if (tax.are_synonyms(p, g)) return MatchLevel::Semantic;
  if (const auto c = tax.category_of(p); c && c == tax.category_of(g)) return MatchLevel::Category;
  if (token_jaccard(p, g) >= tax.fuzzy_threshold()) return MatchLevel::Fuzzy;
  if (const auto gr = tax.group_of(p); gr && gr == tax.group_of(g)) return MatchLevel::Group;
  return MatchLevel::None;
}

double type_level_value(MatchLevel level) {
  switch (level) {
    case MatchLevel::Exact: return 1.0;
    case MatchLevel::Semantic: return 0.85;
    case MatchLevel::Category: return 0.6;
    case MatchLevel::Fuzzy: return 0.4;
    case MatchLevel::Group: return 0.3;
    case MatchLevel::None: return 0.0;
  }
  return 0.0;
}

}  // namespace scgrpo
