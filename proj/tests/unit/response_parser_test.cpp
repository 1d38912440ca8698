#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "scgrpo/response_parser.hpp"
#include "support/oracles.hpp"

namespace scgrpo {
namespace {

MalformedReport expect_malformed(std::string_view raw) {
  const ParseOutcome out = parse(raw);
  EXPECT_FALSE(out.ok()) << raw;
  return out.ok() ? MalformedReport{} : out.error();
}

TEST(Parse, NormalPattern) {
  const ParseOutcome out = parse("<think>ok</think><answer>No</answer>");
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.response().pattern, PatternKind::Normal);
  EXPECT_EQ(out.response().answer, Answer::No);
  EXPECT_EQ(out.response().think, "ok");
  EXPECT_FALSE(out.response().location.has_value());
  EXPECT_FALSE(out.response().anomaly_type.has_value());
}

TEST(Parse, AbnormalPattern) {
  const ParseOutcome out =
      parse("<think>t</think><location>top left</location><type>scratch</type><answer>Yes</answer>");
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.response().pattern, PatternKind::Abnormal);
  EXPECT_EQ(out.response().answer, Answer::Yes);
  EXPECT_EQ(out.response().location, "top left");
  EXPECT_EQ(out.response().anomaly_type, "scratch");
}

TEST(Parse, EmptyInputIsMissingTagAtZero) {
  EXPECT_EQ(expect_malformed(""), (MalformedReport{Violation::MissingTag, 0}));
}

TEST(Parse, AnswerBeforeThinkIsTagOrder) {
  EXPECT_EQ(expect_malformed("<answer>Yes</answer><think>t</think>").first_violation,
            Violation::TagOrder);
}

TEST(Parse, WhitespaceBetweenTagsIgnoredAndContentTrimmed) {
  const ParseOutcome out = parse(
      "\n  <think>  a  b \n</think>\n <location> bottom right </location>\t<type>hole </type>\n"
      "<answer> yes </answer>\n");
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.response().think, "a  b");
  EXPECT_EQ(out.response().location, "bottom right");
  EXPECT_EQ(out.response().anomaly_type, "hole");
  EXPECT_EQ(out.response().answer, Answer::Yes);
}

TEST(Parse, AnswerTokenIsCaseInsensitive) {
  for (const char* tok : {"yes", "Yes", "YES", "yEs"}) {
    const ParseOutcome out = parse(std::string("<think></think><answer>") + tok + "</answer>");
    ASSERT_TRUE(out.ok()) << tok;
    EXPECT_EQ(out.response().answer, Answer::Yes);
  }
  const ParseOutcome no = parse("<think></think><answer>NO</answer>");
  ASSERT_TRUE(no.ok());
  EXPECT_EQ(no.response().answer, Answer::No);
}

TEST(Parse, ViolationKinds) {
  EXPECT_EQ(expect_malformed("<think>a</think><think>b</think><answer>No</answer>").first_violation,
            Violation::DuplicateTag);
  EXPECT_EQ(expect_malformed("<think>a</think><answer>No</answer> thanks").first_violation,
            Violation::TrailingContent);
  EXPECT_EQ(expect_malformed("<think>a</think><answer></answer>").first_violation,
            Violation::EmptyAnswer);
  EXPECT_EQ(expect_malformed("<think>a</think><answer>  </answer>").first_violation,
            Violation::EmptyAnswer);
  EXPECT_EQ(expect_malformed("<think>a</think><answer>maybe</answer>").first_violation,
            Violation::UnknownAnswerToken);
  EXPECT_EQ(expect_malformed("<think>a</think><answer>Yes.</answer>").first_violation,
            Violation::UnknownAnswerToken);
  EXPECT_EQ(expect_malformed("<think>a</think><answer>No").first_violation, Violation::MissingTag);
  EXPECT_EQ(expect_malformed("<think>a</think>").first_violation, Violation::MissingTag);
  EXPECT_EQ(expect_malformed("<think>a</think><type>hole</type><answer>Yes</answer>").first_violation,
            Violation::MissingTag);
  EXPECT_EQ(expect_malformed(
                "<think>a</think><type>hole</type><location>top</location><answer>Yes</answer>")
                .first_violation,
            Violation::TagOrder);
  EXPECT_EQ(expect_malformed(
                "<think>a</think><location></location><type>hole</type><answer>Yes</answer>")
                .first_violation,
            Violation::EmptyContent);
  EXPECT_EQ(expect_malformed("<think>a</think><location>top</location><type> </type><answer>Yes</answer>")
                .first_violation,
            Violation::EmptyContent);
}

TEST(Parse, PreambleIsTrailingContentAtZero) {
  EXPECT_EQ(expect_malformed("Sure! <think>a</think><answer>No</answer>"),
            (MalformedReport{Violation::TrailingContent, 0}));
}

TEST(Parse, OffsetsPointAtTheViolation) {
  const std::string raw = "<think>a</think>junk<answer>No</answer>";
  EXPECT_EQ(expect_malformed(raw).byte_offset, raw.find("junk"));
  const std::string dup = "<think>a</think><answer>No</answer><answer>No</answer>";
  const MalformedReport r = expect_malformed(dup);
  EXPECT_EQ(r.byte_offset, dup.rfind("<answer>"));
}

TEST(Parse, NonGreedyContentStopsAtFirstClose) {
  EXPECT_FALSE(parse("<think>a</think>b</think><answer>No</answer>").ok());
}

TEST(Parse, RawIsKept) {
  const std::string raw = " <think>x</think><answer>No</answer>";
  const ParseOutcome out = parse(raw);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.response().raw, raw);
}

TEST(MatchesPattern, Examples) {
  const std::string normal = "<think>fine</think><answer>No</answer>";
  EXPECT_TRUE(matches_pattern(normal, PatternKind::Normal));
  EXPECT_FALSE(matches_pattern(normal, PatternKind::Abnormal));
  EXPECT_FALSE(matches_pattern("<think>fine<answer>No</answer>", PatternKind::Normal));
  const std::string abnormal =
      "<think>t</think><location>top</location><type>hole</type><answer>Yes</answer>";
  EXPECT_TRUE(matches_pattern(abnormal, PatternKind::Abnormal));
  EXPECT_FALSE(matches_pattern(abnormal, PatternKind::Normal));
}

TEST(ExtractAnswer, Examples) {
  EXPECT_EQ(extract_answer("<think>..</think><answer>Yes</answer>", ExtractionMode::Structured),
            Answer::Yes);
  EXPECT_EQ(extract_answer("The image looks fine, no defects.", ExtractionMode::RawText), Answer::No);
  EXPECT_EQ(extract_answer("maybe", ExtractionMode::RawText), std::nullopt);
}

TEST(ExtractAnswer, StructuredFallsBackToLastAnswerPair) {
  EXPECT_EQ(extract_answer("preamble <think>x</think><answer>No</answer>", ExtractionMode::Structured),
            Answer::No);
  EXPECT_EQ(extract_answer("<answer>Yes</answer> and <answer>no</answer>", ExtractionMode::Structured),
            Answer::No);
  EXPECT_EQ(extract_answer("<answer>yes</answer><answer>unsure</answer>", ExtractionMode::Structured),
            Answer::Yes);
  EXPECT_EQ(extract_answer("no tags, yes", ExtractionMode::Structured), std::nullopt);
}

TEST(ExtractAnswer, RawTextNeedsStandaloneWord) {
  EXPECT_EQ(extract_answer("Yesterday nothing; YES there is", ExtractionMode::RawText), Answer::Yes);
  EXPECT_EQ(extract_answer("nobody knows", ExtractionMode::RawText), std::nullopt);
  EXPECT_EQ(extract_answer("no, yes", ExtractionMode::RawText), Answer::No);
}

TEST(RenderTarget, TagsFollowTheLabel) {
  EXPECT_EQ(render_target("fine", Label::Normal), "<think>fine</think><answer>No</answer>");
  EXPECT_EQ(render_target("bad", Label::Anomalous, "top left", "scratch"),
            "<think>bad</think><location>top left</location><type>scratch</type><answer>Yes</answer>");
}

StructuredResponse random_response(std::mt19937_64& gen) {
  static const std::vector<std::string> words = {"a", "scratch", "top", "left", "no", "yes",
                                                 "x y", "line\nbreak", "tab\there", "<", ">"};
  auto text = [&](bool allow_empty) {
    std::string s;
    const int n = static_cast<int>(gen() % 4) + (allow_empty ? 0 : 1);
    for (int i = 0; i < n; ++i) {
      if (!s.empty()) s += ' ';
      s += words[gen() % words.size()];
    }
    return s;
  };
  StructuredResponse r;
  r.think = text(true);
  r.answer = gen() % 2 ? Answer::Yes : Answer::No;
  if (gen() % 2) {
    r.pattern = PatternKind::Abnormal;
    r.location = text(false);
    r.anomaly_type = text(false);
  }
  r.raw = render(r);
  return r;
}

TEST(ParseProperty, RenderRoundTrip) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 2000; ++i) {
    const StructuredResponse r = random_response(gen);
    const ParseOutcome out = parse(r.raw);
    ASSERT_TRUE(out.ok()) << r.raw;
    EXPECT_EQ(out.response(), r) << r.raw;
  }
}

TEST(ParseProperty, PatternsAreExclusive) {
  testing::MutationCorpus corpus(5);
  for (int i = 0; i < 3000; ++i) {
    const std::string raw = i % 3 == 0 ? corpus.valid() : corpus.mutated();
    EXPECT_FALSE(matches_pattern(raw, PatternKind::Normal) &&
                 matches_pattern(raw, PatternKind::Abnormal))
        << raw;
  }
}

TEST(ParseProperty, AgreesWithRegexOracle) {
  testing::MutationCorpus corpus(17);
  int positives = 0;
  for (int i = 0; i < 3000; ++i) {
    const std::string raw = i % 4 == 0 ? corpus.valid() : corpus.mutated();
    for (PatternKind kind : {PatternKind::Normal, PatternKind::Abnormal}) {
      const bool expected = testing::naive_matches(raw, kind);
      positives += expected ? 1 : 0;
      ASSERT_EQ(matches_pattern(raw, kind), expected) << to_string(kind) << " on: " << raw;
    }
  }
  EXPECT_GT(positives, 500);
}

TEST(ParseProperty, DeterministicAcrossThreads) {
  testing::MutationCorpus corpus(3);
  std::vector<std::string> inputs;
  for (int i = 0; i < 400; ++i) inputs.push_back(corpus.mutated());
  auto summarize = [&] {
    std::vector<std::string> out;
    for (const auto& raw : inputs) {
      const ParseOutcome p = parse(raw);
      out.push_back(p.ok() ? p.response().think + "|" + std::string(to_string(p.response().pattern))
                           : std::string(to_string(p.error().first_violation)) + "@" +
                                 std::to_string(p.error().byte_offset));
    }
    return out;
  };
  const auto baseline = summarize();
  std::vector<std::vector<std::string>> results(4);
  std::vector<std::thread> threads;
  for (auto& slot : results) threads.emplace_back([&slot, &summarize] { slot = summarize(); });
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, baseline);
}

}  // namespace
}  // namespace scgrpo
