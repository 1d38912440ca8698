#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "scgrpo/errors.hpp"

namespace scgrpo::detail {

// Calls fn(object, line_number) for every non-blank line. Blank lines and
// lines starting with '#' are skipped. Parse failures become FormatError.
inline void read_jsonl(std::istream& in, const std::string& source,
                       const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw FormatError(source, line_no, "expected a JSON object");
    try {
      fn(obj, line_no);
    } catch (const std::invalid_argument& e) {
      throw FormatError(source, line_no, e.what());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(source, line_no, e.what());
    }
  }
}

inline void read_jsonl_file(const std::filesystem::path& path,
                            const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  read_jsonl(in, path.string(), fn);
}

inline std::string require_string(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw std::invalid_argument(std::string(key) + ": missing");
  if (!it->is_string()) throw std::invalid_argument(std::string(key) + ": expected a string");
  return it->get<std::string>();
}

}  // namespace scgrpo::detail
