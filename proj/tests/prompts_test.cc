#include <gtest/gtest.h>

#include <map>
#include <sstream>
#include <string>

#include "culrag/prompts.hpp"
#include "culrag/sha256.hpp"
#include "test_util.h"

namespace culrag {
namespace {

Question sample_saq() {
  Question q;
  q.id = "saq-en-GB-001";
  q.locale = {"en", "GB"};
  q.text = "Which drink is served with scones?";
  q.track = Track::SAQ;
  q.references = {"tea"};
  return q;
}

Question sample_mcq() {
  Question q;
  q.id = "mcq-zh-CN-001";
  q.locale = {"zh", "CN"};
  q.text = "端午节吃什么？";
  q.track = Track::MCQ;
  q.options = {{"A", "月饼"}, {"B", "粽子"}, {"C", "饺子"}};
  q.gold_label = "B";
  return q;
}

TEST(Templates, NamesRoundTrip) {
  EXPECT_STREQ(template_name(TemplateId::MP), "mp");
  EXPECT_STREQ(template_name(TemplateId::RP_V1), "rp-v1");
  EXPECT_STREQ(template_name(TemplateId::RP_V2), "rp-v2");
  EXPECT_EQ(template_from_name("mp"), TemplateId::MP);
  EXPECT_EQ(template_from_name("rp-v1"), TemplateId::RP_V1);
  EXPECT_EQ(template_from_name("RP_V2"), TemplateId::RP_V2);
  EXPECT_EQ(template_from_name("rp_v1"), TemplateId::RP_V1);
  EXPECT_FALSE(template_from_name("rp-v3").has_value());
  EXPECT_FALSE(template_from_name("").has_value());
}

TEST(Render, MinimalPromptWithoutContext) {
  const std::string prompt = render(TemplateId::MP, sample_saq(), {});
  const std::string expected = std::string(kMinimalPrompt) +
                               "Question: Which drink is served with scones?\n"
                               "Answer:";
  EXPECT_EQ(prompt, expected);
}

TEST(Render, ContextBlockFormatsOneBulletPerItem) {
  const std::string prompt =
      render(TemplateId::MP, sample_saq(), {"Tea is served with scones.", "Second item."});
  const std::string expected = std::string(kMinimalPrompt) +
                               "Context:\n"
                               "- Tea is served with scones.\n"
                               "- Second item.\n"
                               "\n"
                               "Question: Which drink is served with scones?\n"
                               "Answer:";
  EXPECT_EQ(prompt, expected);
}

TEST(Render, InstructionSitsBetweenContextAndQuestion) {
  RenderOptions opts;
  opts.instruction = "Use only the context above.";
  const std::string prompt = render(TemplateId::MP, sample_saq(), {"item"}, opts);
  const std::string expected = std::string(kMinimalPrompt) +
                               "Context:\n- item\n\n"
                               "Use only the context above.\n\n"
                               "Question: Which drink is served with scones?\n"
                               "Answer:";
  EXPECT_EQ(prompt, expected);
}

TEST(Render, McqListsOptionsInDatasetOrder) {
  const std::string prompt = render(TemplateId::RP_V1, sample_mcq(), {});
  const std::string expected = std::string(kRefinedPromptV1) +
                               "Question: 端午节吃什么？\n"
                               "Options:\n"
                               "A) 月饼\n"
                               "B) 粽子\n"
                               "C) 饺子\n"
                               "Answer:";
  EXPECT_EQ(prompt, expected);
}

TEST(Render, ContextIsTheOnlyDifference) {
  const std::string bare = render(TemplateId::RP_V2, sample_saq(), {});
  const std::string with = render(TemplateId::RP_V2, sample_saq(), {"x"});
  const std::string preamble_text(kRefinedPromptV2);
  ASSERT_EQ(bare.rfind(preamble_text, 0), 0u);
  ASSERT_EQ(with.rfind(preamble_text, 0), 0u);
  EXPECT_EQ(with, preamble_text + "Context:\n- x\n\n" + bare.substr(preamble_text.size()));
}

TEST(Preambles, MatchTheShippedChecksumFiles) {
  // prompts/checksums.txt pins the exact preamble bytes; both the text file
  // and the in-code constant must hash to the recorded value.
  const std::map<std::string, TemplateId> names = {
      {"mp.txt", TemplateId::MP}, {"rp_v1.txt", TemplateId::RP_V1}, {"rp_v2.txt", TemplateId::RP_V2}};
  const auto root = test_util::source_dir() / "prompts";
  std::istringstream lines(test_util::read_file(root / "checksums.txt"));
  std::string hash, name;
  int checked = 0;
  while (lines >> hash >> name) {
    ASSERT_TRUE(names.count(name)) << "unexpected checksum entry " << name;
    const TemplateId id = names.at(name);
    const std::string file_bytes = test_util::read_file(root / name);
    EXPECT_EQ(sha256_hex(file_bytes), hash) << name;
    EXPECT_EQ(file_bytes, std::string(preamble(id))) << name << " drifted from the constant";

    // The preamble is recoverable from a rendered empty-question prompt.
    Question blank;
    blank.id = "saq-en-GB-000";
    blank.locale = {"en", "GB"};
    blank.track = Track::SAQ;
    const std::string rendered = render(id, blank, {});
    const std::string suffix = "Question: \nAnswer:";
    ASSERT_GT(rendered.size(), suffix.size());
    EXPECT_EQ(rendered.substr(rendered.size() - suffix.size()), suffix);
    EXPECT_EQ(sha256_hex(rendered.substr(0, rendered.size() - suffix.size())), hash) << name;
    ++checked;
  }
  EXPECT_EQ(checked, 3);
}

TEST(ParseAnswer, PlainTextAndWhitespace) {
  const Locale en{"en", "GB"};
  auto p = parse_answer("tea", en);
  EXPECT_EQ(p.kind, AnswerKind::ANSWER);
  EXPECT_EQ(p.text, "tea");
  EXPECT_EQ(p.raw, "tea");

  p = parse_answer("  \n\n  pound sterling  \nsecond line", en);
  EXPECT_EQ(p.text, "pound sterling");  // first non-empty line only
  EXPECT_EQ(p.raw, "  \n\n  pound sterling  \nsecond line");
}

TEST(ParseAnswer, StripsAnswerLabels) {
  const Locale en{"en", "GB"};
  EXPECT_EQ(parse_answer("Answer: Paris", en).text, "Paris");
  EXPECT_EQ(parse_answer("ANSWER:   Paris", en).text, "Paris");
  EXPECT_EQ(parse_answer("Respuesta: Madrid", {"es", "MX"}).text, "Madrid");
  EXPECT_EQ(parse_answer("答案：北京", {"zh", "CN"}).text, "北京");
  EXPECT_EQ(parse_answer("答案: 北京", {"zh", "CN"}).text, "北京");
  // A lone label yields an empty answer, not a crash.
  EXPECT_EQ(parse_answer("Answer:", en).text, "");
}

TEST(ParseAnswer, AbstentionTokenWinsAnywhere) {
  const Locale en{"en", "GB"};
  EXPECT_EQ(parse_answer("<NO_ANSWER>", en).kind, AnswerKind::ABSTAIN);
  EXPECT_EQ(parse_answer("  I think <NO_ANSWER> fits", en).kind, AnswerKind::ABSTAIN);
  const auto p = parse_answer("<NO_ANSWER>", en);
  EXPECT_TRUE(p.text.empty());
  EXPECT_EQ(p.raw, "<NO_ANSWER>");
}

TEST(ParseAnswer, EmptyOutputIsAnEmptyAnswer) {
  const auto p = parse_answer("", Locale{"en", "GB"});
  EXPECT_EQ(p.kind, AnswerKind::ANSWER);
  EXPECT_TRUE(p.text.empty());
  EXPECT_TRUE(parse_answer("   \n \n", Locale{"en", "GB"}).text.empty());
}

TEST(ResolveLabel, ExactThenFoldedThenTextMatch) {
  const Question q = sample_mcq();
  ParsedAnswer p;
  p.kind = AnswerKind::ANSWER;

  p.text = "B";
  EXPECT_EQ(resolve_option_label(p, q), "B");
  p.text = "b";
  EXPECT_EQ(resolve_option_label(p, q), "B");
  p.text = " B ";
  EXPECT_EQ(resolve_option_label(p, q), "B");
  p.text = "粽子";
  EXPECT_EQ(resolve_option_label(p, q), "B");
  p.text = "粽子。";  // normalized text match
  EXPECT_EQ(resolve_option_label(p, q), "B");
  p.text = "汤圆";
  EXPECT_EQ(resolve_option_label(p, q), std::nullopt);
  p.text = "";
  EXPECT_EQ(resolve_option_label(p, q), std::nullopt);

  p.kind = AnswerKind::ABSTAIN;
  p.text = "B";
  EXPECT_EQ(resolve_option_label(p, q), std::nullopt);
}

TEST(ResolveLabel, CaseFoldedLabelsKeepCanonicalForm) {
  Question q;
  q.id = "mcq-en-GB-009";
  q.locale = {"en", "GB"};
  q.track = Track::MCQ;
  q.options = {{"a", "first"}, {"B", "second"}};
  ParsedAnswer p;
  p.kind = AnswerKind::ANSWER;
  p.text = "A";
  EXPECT_EQ(resolve_option_label(p, q), "a");
  p.text = "SECOND";
  EXPECT_EQ(resolve_option_label(p, q), "B");
}

}  // namespace
}  // namespace culrag
