#include <gtest/gtest.h>

#include <random>

#include "fakes.hpp"
#include "jf/common/error.hpp"
#include "jf/judge/judge.hpp"

namespace jf::judge {
namespace {

using testing::ScriptedChatModel;

corpus::Document doc_with_release(std::string release) {
  corpus::Document d;
  d.id = "d1";
  d.title = "T";
  d.paper_text = "paper body";
  d.press_release = std::move(release);
  return d;
}

TEST(QualityFilter, BoundaryTriples) {
  EXPECT_TRUE(passes_quality_filter(4, 2, 3));
  EXPECT_FALSE(passes_quality_filter(4, 2, 2));  // mean exactly 2
  EXPECT_FALSE(passes_quality_filter(3, 3, 3));  // accessibility exactly 3
  EXPECT_TRUE(passes_quality_filter(5, 3, 3));
  EXPECT_FALSE(passes_quality_filter(5, 1, 3));
  EXPECT_TRUE(passes_quality_filter(4, 3, 2));
}

TEST(QualityFilter, MatchesMeanFormulationOnRandomTriples) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> a(1, 5), s(1, 3);
  for (int i = 0; i < 2000; ++i) {
    const int acc = a(rng), sci = s(rng), soc = s(rng);
    const bool oracle = acc > 3 && (sci + soc) / 2.0 > 2.0;
    EXPECT_EQ(passes_quality_filter(acc, sci, soc), oracle);
  }
}

TEST(Rubric, RangesAndClamping) {
  EXPECT_EQ(rubric_range(Aspect::kSocietal).hi, 3);
  EXPECT_EQ(rubric_range(Aspect::kScientific).hi, 3);
  EXPECT_EQ(rubric_range(Aspect::kAccessibility).hi, 5);
  EXPECT_EQ(clamp_score(Aspect::kSocietal, 7), 3);
  EXPECT_EQ(clamp_score(Aspect::kAccessibility, 0), 1);
  EXPECT_EQ(clamp_score(Aspect::kAccessibility, 5), 5);
}

TEST(Judge, ScoresThreeAspectsWithSeparateCalls) {
  ScriptedChatModel model(std::vector<std::string>{
      R"(<think>hmm</think>{"reasons":"a","score":"3"})", R"({"reasons":"b","score":2})",
      R"({"reasons":"c","score":"4"})"});
  Judge judge(model);
  const auto r = judge.score_press_release(doc_with_release("Release text."));
  EXPECT_EQ(model.call_count(), 3u);
  EXPECT_EQ(r.societal.score, 3);
  EXPECT_EQ(r.scientific.score, 2);
  EXPECT_EQ(r.accessibility.score, 4);
  EXPECT_EQ(r.societal.reasons, "a");
  EXPECT_TRUE(r.passed);
  for (const auto& call : model.calls()) {
    ASSERT_EQ(call.size(), 1u);
    EXPECT_NE(call[0].content.find("Release text."), std::string::npos);
  }
}

TEST(Judge, OutOfRangeScoresAreClamped) {
  ScriptedChatModel model(std::vector<std::string>{R"({"score": 9})", R"({"score": 0})",
                                                   R"({"score": 6})"});
  Judge judge(model);
  const auto r = judge.score_press_release(doc_with_release("x"));
  EXPECT_EQ(r.societal.score, 3);
  EXPECT_EQ(r.scientific.score, 1);
  EXPECT_EQ(r.accessibility.score, 5);
  EXPECT_FALSE(r.passed);
}

TEST(Judge, PersistentParseFailureMarksUnscorable) {
  ScriptedChatModel model([](const auto&) { return std::string("I refuse to answer in JSON"); });
  Judge judge(model, PromptLibrary::builtin(), 2);
  const auto r = judge.score_press_release(doc_with_release("x"));
  EXPECT_TRUE(r.unscorable.has_value());
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(model.call_count(), 3u);
  const auto j = to_json(r);
  EXPECT_TRUE(j["societal"].is_null());
  EXPECT_FALSE(quality_record_from_json(j).passed);
}

TEST(Judge, ParseRetryRecovers) {
  ScriptedChatModel model(std::vector<std::string>{"garbage", R"({"score":"3"})",
                                                   R"({"score":3})", R"({"score":5})"});
  Judge judge(model);
  const auto r = judge.score_press_release(doc_with_release("x"));
  EXPECT_FALSE(r.unscorable);
  EXPECT_EQ(r.accessibility.score, 5);
  EXPECT_EQ(model.call_count(), 4u);
}

TEST(Judge, EmptyPressReleaseRejected) {
  ScriptedChatModel model;
  Judge judge(model);
  EXPECT_THROW(judge.score_press_release(doc_with_release("  ")), ValidationError);
}

TEST(Judge, QualityRecordJsonRoundTrip) {
  QualityRecord r;
  r.doc_id = "x";
  r.societal.score = 3;
  r.scientific.score = 2;
  r.accessibility.score = 4;
  r.scientific.reasons = "why";
  r.passed = r.derive_passed();
  const auto back = quality_record_from_json(to_json(r));
  EXPECT_EQ(back.societal.score, 3);
  EXPECT_EQ(back.scientific.reasons, "why");
  EXPECT_TRUE(back.passed);
}

TEST(Judge, FilterCorpusKeepsOrderAndSkipsUnscorable) {
  std::vector<QualityRecord> recs(3);
  recs[0].doc_id = "a";
  recs[0].passed = true;
  recs[1].doc_id = "b";
  recs[2].doc_id = "c";
  recs[2].passed = true;
  recs[2].unscorable = "x";
  EXPECT_EQ(filter_corpus(recs), std::vector<std::string>{"a"});
}

TEST(Judge, AssessAnswer) {
  ScriptedChatModel model(std::vector<std::string>{
      R"({"is_vague": "yes", "technical_concepts": ["TSI 3321", " "]})",
      R"({"is_vague": false, "technical_concepts": []})"});
  Judge judge(model);
  auto a = judge.assess_answer("It depends.");
  EXPECT_TRUE(a.is_vague);
  EXPECT_EQ(a.technical_concepts, std::vector<std::string>{"TSI 3321"});
  EXPECT_FALSE(a.judge_failed);
  auto b = judge.assess_answer("Clear answer.");
  EXPECT_FALSE(b.is_vague);
  EXPECT_TRUE(b.technical_concepts.empty());
  EXPECT_THROW(judge.assess_answer(""), ValidationError);
}

TEST(Judge, AssessAnswerFailureIsReported) {
  ScriptedChatModel model([](const auto&) { return std::string(R"({"other": 1})"); });
  Judge judge(model);
  const auto a = judge.assess_answer("something");
  EXPECT_TRUE(a.judge_failed);
  EXPECT_EQ(model.call_count(), 3u);
}

TEST(Judge, ExtractQuestions) {
  synthesis::Transcript t;
  t.doc_id = "d";
  t.turns = {{synthesis::Speaker::kJournalist, "Why?"},
             {synthesis::Speaker::kResearcher, "Because."}};
  ScriptedChatModel model(std::vector<std::string>{
      R"({"high_quality_questions": ["Why?", "Invented?"]})", "nope", "nope", "nope"});
  Judge judge(model);
  const auto e = judge.extract_questions(t, Aspect::kScientific);
  EXPECT_EQ(e.aspect, Aspect::kScientific);
  EXPECT_EQ(e.extracted, (std::vector<std::string>{"Why?", "Invented?"}));
  EXPECT_FALSE(e.failed);
  EXPECT_NE(model.calls()[0][0].content.find("Journalist: Why?"), std::string::npos);

  const auto f = judge.extract_questions(t, Aspect::kSocietal);
  EXPECT_TRUE(f.failed);
  EXPECT_TRUE(f.extracted.empty());

  const auto round = question_extraction_from_json(to_json(e));
  EXPECT_EQ(round.extracted, e.extracted);
  EXPECT_EQ(round.aspect, e.aspect);
}

}  // namespace
}  // namespace jf::judge
