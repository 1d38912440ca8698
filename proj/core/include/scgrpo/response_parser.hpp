#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "scgrpo/types.hpp"

namespace scgrpo {

// A rollout that matched one of the two output patterns:
//   normal:   <think>T</think><answer>A</answer>
//   abnormal: <think>T</think><location>L</location><type>t</type><answer>A</answer>
// Tag contents are trimmed. Whitespace between tags is ignored.
struct StructuredResponse {
  std::string think;
  std::optional<std::string> location;
  std::optional<std::string> anomaly_type;
  Answer answer = Answer::No;
  PatternKind pattern = PatternKind::Normal;
  std::string raw;

  bool operator==(const StructuredResponse&) const = default;
};

enum class Violation {
  MissingTag,
  TagOrder,
  DuplicateTag,
  EmptyAnswer,
  UnknownAnswerToken,
  TrailingContent,
  EmptyContent,  // empty <location> or <type>
};

std::string_view to_string(Violation v);

struct MalformedReport {
  Violation first_violation = Violation::MissingTag;
  std::size_t byte_offset = 0;

  bool operator==(const MalformedReport&) const = default;
};

struct ParseOutcome {
  std::variant<StructuredResponse, MalformedReport> result;

  bool ok() const { return std::holds_alternative<StructuredResponse>(result); }
  const StructuredResponse& response() const { return std::get<StructuredResponse>(result); }
  const MalformedReport& error() const { return std::get<MalformedReport>(result); }
};

// Total and deterministic: every input yields exactly one outcome.
ParseOutcome parse(std::string_view raw);

bool matches_pattern(std::string_view raw, PatternKind kind);

enum class ExtractionMode { Structured, RawText };

// Structured: the parsed answer, falling back to the last <answer>..</answer>
// pair carrying a yes/no token. RawText: the first standalone yes/no word.
std::optional<Answer> extract_answer(std::string_view raw, ExtractionMode mode);

// Canonical tag sequence for `r`; parse(render(r)) reproduces r when its
// text fields are trimmed and free of tag markers.
std::string render(const StructuredResponse& r);

// Builds the canonical target for a sample: location/type tags only when
// the label is anomalous, answer forced to agree with the label.
std::string render_target(std::string_view think, Label label,
                          std::string_view location = {},
                          std::string_view anomaly_type = {});

std::optional<Answer> parse_answer_token(std::string_view content);

}  // namespace scgrpo
