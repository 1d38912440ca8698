#include "scgrpo/response_parser.hpp"

#include <array>
#include <vector>

#include "text_util.hpp"

namespace scgrpo {
namespace {

// Marker ids in canonical order; even = opening, odd = closing.
enum Marker : int {
  kThinkOpen, kThinkClose,
  kLocationOpen, kLocationClose,
  kTypeOpen, kTypeClose,
  kAnswerOpen, kAnswerClose,
  kMarkerCount
};

constexpr std::array<std::string_view, kMarkerCount> kMarkerText = {
    "<think>", "</think>", "<location>", "</location>",
    "<type>",  "</type>",  "<answer>",   "</answer>"};

struct Token {
  Marker marker;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view raw) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while ((pos = raw.find('<', pos)) != std::string_view::npos) {
    bool hit = false;
    for (int m = 0; m < kMarkerCount; ++m) {
      if (raw.compare(pos, kMarkerText[m].size(), kMarkerText[m]) == 0) {
        tokens.push_back({static_cast<Marker>(m), pos});
        pos += kMarkerText[m].size();
        hit = true;
        break;
      }
    }
    if (!hit) ++pos;
  }
  return tokens;
}

std::size_t first_non_space(std::string_view raw, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (!detail::is_space(raw[i])) return i;
  }
  return to;
}

MalformedReport fail(Violation v, std::size_t offset) { return {v, offset}; }

bool appears_after(const std::vector<Token>& tokens, std::size_t index, Marker m) {
  for (std::size_t i = index + 1; i < tokens.size(); ++i) {
    if (tokens[i].marker == m) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::MissingTag: return "MissingTag";
    case Violation::TagOrder: return "TagOrder";
    case Violation::DuplicateTag: return "DuplicateTag";
    case Violation::EmptyAnswer: return "EmptyAnswer";
    case Violation::UnknownAnswerToken: return "UnknownAnswerToken";
    case Violation::TrailingContent: return "TrailingContent";
    case Violation::EmptyContent: return "EmptyContent";
  }
  return "?";
}

std::optional<Answer> parse_answer_token(std::string_view content) {
  const std::string token = detail::to_lower(detail::trim(content));
  if (token == "yes") return Answer::Yes;
  if (token == "no") return Answer::No;
  return std::nullopt;
}

ParseOutcome parse(std::string_view raw) {
  const std::vector<Token> tokens = tokenize(raw);

  std::array<bool, kMarkerCount> seen{};
  std::array<std::string_view, kMarkerCount / 2> content{};
  // The marker we need next; kMarkerCount once </answer> has been consumed.
  int expected = kThinkOpen;
  std::size_t cursor = 0;  // end of the previous marker

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    const bool inside = expected % 2 == 1 && expected != kMarkerCount;

    if (!inside) {
      const std::size_t stray = first_non_space(raw, cursor, tok.offset);
      if (stray != tok.offset) return {fail(Violation::TrailingContent, stray)};
    }
    if (seen[tok.marker]) return {fail(Violation::DuplicateTag, tok.offset)};
    if (expected == kMarkerCount) return {fail(Violation::TrailingContent, tok.offset)};

    // After </think> the answer may follow directly (normal pattern).
    const bool accepted =
        tok.marker == expected ||
        (expected == kLocationOpen && tok.marker == kAnswerOpen);
    if (!accepted) {
      const Violation v = appears_after(tokens, i, static_cast<Marker>(expected))
                              ? Violation::TagOrder
                              : Violation::MissingTag;
      return {fail(v, tok.offset)};
    }

    seen[tok.marker] = true;
    const std::size_t end = tok.offset + kMarkerText[tok.marker].size();
    if (tok.marker % 2 == 1) {
      const std::size_t start = cursor;
      const std::string_view body = detail::trim(raw.substr(start, tok.offset - start));
      const int slot = tok.marker / 2;
      content[slot] = body;
      const std::size_t at = first_non_space(raw, start, tok.offset);
      if (tok.marker == kAnswerClose) {
        if (body.empty()) return {fail(Violation::EmptyAnswer, at)};
        if (!parse_answer_token(body)) return {fail(Violation::UnknownAnswerToken, at)};
      } else if ((tok.marker == kLocationClose || tok.marker == kTypeClose) && body.empty()) {
        return {fail(Violation::EmptyContent, at)};
      }
    }
    expected = tok.marker == kAnswerClose ? kMarkerCount : tok.marker + 1;
    cursor = end;
  }

  if (expected != kMarkerCount) return {fail(Violation::MissingTag, raw.size())};
  const std::size_t stray = first_non_space(raw, cursor, raw.size());
  if (stray != raw.size()) return {fail(Violation::TrailingContent, stray)};

  StructuredResponse r;
  r.think = std::string(content[kThinkOpen / 2]);
  r.answer = *parse_answer_token(content[kAnswerOpen / 2]);
  r.raw = std::string(raw);
  if (seen[kLocationOpen]) {
    r.pattern = PatternKind::Abnormal;
    r.location = std::string(content[kLocationOpen / 2]);
    r.anomaly_type = std::string(content[kTypeOpen / 2]);
  } else {
    r.pattern = PatternKind::Normal;
  }
  return {std::move(r)};
}

bool matches_pattern(std::string_view raw, PatternKind kind) {
  const ParseOutcome outcome = parse(raw);
  return outcome.ok() && outcome.response().pattern == kind;
}

std::optional<Answer> extract_answer(std::string_view raw, ExtractionMode mode) {
  if (mode == ExtractionMode::Structured) {
    const ParseOutcome outcome = parse(raw);
    if (outcome.ok()) return outcome.response().answer;

    constexpr std::string_view open = "<answer>";
    constexpr std::string_view close = "</answer>";
    std::size_t search_end = raw.size();
    while (true) {
      const std::size_t c = raw.rfind(close, search_end);
      if (c == std::string_view::npos) return std::nullopt;
      const std::size_t o = raw.rfind(open, c);
      if (o == std::string_view::npos) return std::nullopt;
      const std::size_t body = o + open.size();
      if (auto a = parse_answer_token(raw.substr(body, c - body))) return a;
      if (o == 0) return std::nullopt;
      search_end = o - 1;
    }
  }

  for (const std::string& w : detail::words(raw)) {
    if (w == "yes") return Answer::Yes;
    if (w == "no") return Answer::No;
  }
  return std::nullopt;
}

std::string render(const StructuredResponse& r) {
  std::string out;
  out.reserve(r.think.size() + 64);
  out += "<think>";
  out += r.think;
  out += "</think>";
  if (r.pattern == PatternKind::Abnormal) {
    out += "<location>";
    out += r.location.value_or("");
    out += "</location><type>";
    out += r.anomaly_type.value_or("");
    out += "</type>";
  }
  out += "<answer>";
  out += to_string(r.answer);
  out += "</answer>";
  return out;
}

std::string render_target(std::string_view think, Label label,
                          std::string_view location, std::string_view anomaly_type) {
  StructuredResponse r;
  r.think = std::string(detail::trim(think));
  r.pattern = pattern_for(label);
  r.answer = label == Label::Anomalous ? Answer::Yes : Answer::No;
  if (label == Label::Anomalous) {
    r.location = std::string(detail::trim(location));
    r.anomaly_type = std::string(detail::trim(anomaly_type));
  }
  return render(r);
}

}  // namespace scgrpo
