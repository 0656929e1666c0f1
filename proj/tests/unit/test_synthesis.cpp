#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fakes.hpp"
#include "generators.hpp"
#include "jf/common/error.hpp"
#include "jf/synthesis/preference.hpp"
#include "jf/synthesis/sft.hpp"
#include "jf/synthesis/synthesis.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::synthesis {
namespace {

using testing::ScriptedChatModel;

Turn J(std::string s) { return {Speaker::kJournalist, std::move(s)}; }
Turn R(std::string s) { return {Speaker::kResearcher, std::move(s)}; }

corpus::PaperContext ctx() {
  corpus::PaperContext c;
  c.title = "Aerosols";
  c.excerpt = "We measured particles.";
  return c;
}

TEST(Transcript, ValidateInvariants) {
  Transcript t;
  t.doc_id = "d";
  EXPECT_THROW(t.validate(), ValidationError);
  t.turns = {R("first")};
  EXPECT_THROW(t.validate(), ValidationError);
  t.turns = {J("q"), J("q2")};
  EXPECT_THROW(t.validate(), ValidationError);
  t.turns = {J("q"), R("  ")};
  EXPECT_THROW(t.validate(), ValidationError);
  t.turns = {J("q"), R("a"), J("q2")};
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.questions(), (std::vector<std::string>{"q", "q2"}));
  EXPECT_EQ(t.answers(), std::vector<std::string>{"a"});
  EXPECT_EQ(t.journalist_turn_count(), 2u);
}

TEST(Transcript, JsonRoundTrip) {
  Transcript t;
  t.doc_id = "d";
  t.source = Source::kSimulated;
  t.turns = {J("q"), R("a")};
  const auto j = to_json(t);
  EXPECT_EQ(j["source"], "simulated");
  EXPECT_EQ(j["turns"][1]["role"], "researcher");
  EXPECT_EQ(transcript_from_json(j), t);
  auto bad = j;
  bad["turns"][0]["role"] = "narrator";
  EXPECT_THROW(transcript_from_json(bad), ValidationError);
}

TEST(TranscriptParse, FormatParseRoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto t = testing::random_transcript(rng, 1 + i % 12);
    const auto parsed = parse_transcript(format_turns(t.turns));
    ASSERT_TRUE(parsed.ok) << parsed.error;
    EXPECT_EQ(parsed.turns, t.turns);
  }
}

TEST(TranscriptParse, AcceptsBoldLabelsPreambleAndThink) {
  const auto p = parse_transcript(
      "<think>Journalist: not this</think>\nSure, here it is:\n\n**Journalist:** Why "
      "aerosols?\n**Researcher**: They matter.\nA lot.\njournalist: And then?");
  ASSERT_TRUE(p.ok) << p.error;
  ASSERT_EQ(p.turns.size(), 3u);
  EXPECT_EQ(p.turns[0].text, "Why aerosols?");
  EXPECT_EQ(p.turns[1].text, "They matter.\nA lot.");
  EXPECT_EQ(p.turns[2].role, Speaker::kJournalist);
}

TEST(TranscriptParse, FailureCases) {
  EXPECT_FALSE(parse_transcript("").ok);
  EXPECT_FALSE(parse_transcript("just prose").ok);
  auto p = parse_transcript("Researcher: hi");
  EXPECT_FALSE(p.ok);
  EXPECT_EQ(p.error_line, 1u);
  p = parse_transcript("Journalist: a\nResearcher: b\nResearcher: c");
  EXPECT_FALSE(p.ok);
  EXPECT_EQ(p.error_line, 3u);
  EXPECT_TRUE(p.turns.empty());
  p = parse_transcript("Journalist: a\nResearcher:   ");
  EXPECT_FALSE(p.ok);
  EXPECT_EQ(p.error_line, 2u);
}

TEST(Synthesis, CleanUtterance) {
  EXPECT_EQ(clean_utterance("<think>x</think>  \"Why?\" "), "Why?");
  EXPECT_EQ(clean_utterance("**Journalist:** How so?"), "How so?");
  EXPECT_EQ(clean_utterance("Question: What now?"), "What now?");
  EXPECT_EQ(clean_utterance("Plain"), "Plain");
}

TEST(Synthesis, ConversationFromOracle) {
  ScriptedChatModel oracle(std::vector<std::string>{"Journalist: Q1\nResearcher: A1"});
  const auto t = synthesize_conversation("d", ctx(), "The release.", oracle);
  EXPECT_EQ(t.doc_id, "d");
  EXPECT_EQ(t.source, Source::kSynthesized);
  EXPECT_EQ(t.turns, (std::vector<Turn>{J("Q1"), R("A1")}));
  const std::string prompt = oracle.calls()[0][0].content;
  EXPECT_NE(prompt.find("The release."), std::string::npos);
  EXPECT_NE(prompt.find("We measured particles."), std::string::npos);
}

TEST(Synthesis, RegeneratesOnceThenSkips) {
  ScriptedChatModel ok(std::vector<std::string>{"nonsense", "Journalist: Q\nResearcher: A"});
  EXPECT_EQ(synthesize_conversation("d", ctx(), "r", ok, PromptLibrary::builtin(), 1).turns.size(),
            2u);
  ScriptedChatModel bad(std::vector<std::string>{"nonsense", "Researcher: A", "unused"});
  EXPECT_THROW(synthesize_conversation("d", ctx(), "r", bad, PromptLibrary::builtin(), 1),
               DocumentSkipped);
  EXPECT_EQ(bad.call_count(), 2u);
  ScriptedChatModel none;
  EXPECT_THROW(synthesize_conversation("d", ctx(), " ", none), ValidationError);
}

TEST(Synthesis, Summary) {
  Transcript a;
  a.turns = {J("one two three four"), R("abcdefgh")};
  Transcript b;
  b.turns = {J("x"), R("y"), J("z")};
  const auto s = summarize({a, b});
  EXPECT_EQ(s.transcripts, 2u);
  EXPECT_DOUBLE_EQ(s.mean_turns, 2.5);
  EXPECT_EQ(s.journalist_turns, 3u);
  // question tokens: ceil(15/4)=4, 1, 1
  EXPECT_DOUBLE_EQ(s.mean_question_tokens, 2.0);
  // answer tokens: 2, 1
  EXPECT_DOUBLE_EQ(s.mean_answer_tokens, 1.5);
}

TEST(Sft, DistillInvariantsProperty) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto t = testing::random_transcript(rng, 1 + i % 11);
    const auto ex = distill_sft(t, "SYS");
    ASSERT_EQ(ex.size(), t.journalist_turn_count());
    for (std::size_t k = 0; k < ex.size(); ++k) {
      EXPECT_EQ(ex[k].history.size(), 2 * k);
      if (!ex[k].history.empty()) {
        EXPECT_EQ(ex[k].history.back().role, Speaker::kResearcher);
      }
      EXPECT_EQ(ex[k].target, t.questions()[k]);
      EXPECT_EQ(ex[k].system_context, "SYS");
    }
    std::optional<std::string> trailing;
    if (t.turns.back().role == Speaker::kResearcher) trailing = t.turns.back().text;
    EXPECT_EQ(reconstruct_turns(ex.back(), trailing), t.turns);
  }
}

TEST(Sft, RecordShape) {
  Transcript t;
  t.doc_id = "d";
  t.turns = {J("q1"), R("a1"), J("q2")};
  const auto ex = distill_sft(t, "SYS");
  const auto rec = to_sft_record(ex[1]);
  ASSERT_EQ(rec["messages"].size(), 3u);
  EXPECT_EQ(rec["messages"][0]["role"], "system");
  EXPECT_EQ(rec["messages"][1]["role"], "assistant");
  EXPECT_EQ(rec["messages"][1]["content"], "q1");
  EXPECT_EQ(rec["messages"][2]["role"], "user");
  EXPECT_EQ(rec["completion"], "q2");
}

TEST(Sft, SystemContextUsesSimpleRoleAndPaper) {
  const auto s = journalist_system_context(ctx());
  const auto& lib = PromptLibrary::builtin();
  EXPECT_EQ(s.rfind(lib.text(prompt_ids::kJournalistSimple), 0), 0u);
  EXPECT_NE(s.find("We measured particles."), std::string::npos);
}

TEST(Preference, BranchPriority) {
  judge::AnswerAssessment a;
  EXPECT_EQ(choose_branch(a), Branch::kSocietal);
  a.technical_concepts = {"x"};
  EXPECT_EQ(choose_branch(a), Branch::kClarifyTechnical);
  a.is_vague = true;
  EXPECT_EQ(choose_branch(a), Branch::kClarifyVague);
}

struct PrefRig {
  using Replies = std::vector<std::string>;
  template <class J>
  PrefRig(J judge_replies, Replies sft_replies)
      : judge_model(std::move(judge_replies)), sft(std::move(sft_replies)) {}

  ScriptedChatModel judge_model;
  judge::Judge judge{judge_model};
  ScriptedChatModel sft;
};

TEST(Preference, TechnicalBranchUsesConcepts) {
  PrefRig rig(std::vector<std::string>{
      R"({"is_vague": false, "technical_concepts": ["TSI 3321", "SMPS"]})"},
                std::vector<std::string>{"What is an SMPS?", "Tell me more?"});
  const std::vector<Turn> h = {J("q"), R("We used the TSI 3321 and an SMPS.")};
  const auto out = generate_preference_pair("d", ctx(), h, rig.judge, rig.sft);
  ASSERT_TRUE(out.pair) << out.skip_reason;
  EXPECT_EQ(out.pair->branch, Branch::kClarifyTechnical);
  EXPECT_EQ(out.pair->chosen, "What is an SMPS?");
  EXPECT_EQ(out.pair->rejected, "Tell me more?");
  const auto calls = rig.sft.calls();
  EXPECT_NE(calls[0][0].content.find("TSI 3321, SMPS"), std::string::npos);
  EXPECT_EQ(calls[1][0].content, rejected_prompt(ctx(), h));
  const auto rec = to_dpo_record(*out.pair);
  EXPECT_EQ(rec["branch"], "clarify_technical");
  EXPECT_EQ(rec["prompt_messages"].back()["role"], "user");
}

TEST(Preference, Skips) {
  const std::vector<Turn> h = {J("q"), R("answer")};
  {
    PrefRig rig([](const auto&) { return std::string("no"); }, {});
    const auto out = generate_preference_pair("d", ctx(), h, rig.judge, rig.sft);
    EXPECT_FALSE(out.pair);
    EXPECT_EQ(out.skip_reason, "judge-failed");
    EXPECT_EQ(rig.sft.call_count(), 0u);
  }
  {
    PrefRig rig(std::vector<std::string>{R"({"is_vague": true})"},
                std::vector<std::string>{"Same?", "\"Same?\""});
    const auto out = generate_preference_pair("d", ctx(), h, rig.judge, rig.sft);
    EXPECT_EQ(out.skip_reason, "chosen-equals-rejected");
  }
  {
    PrefRig rig(std::vector<std::string>{R"({"is_vague": true})"},
                std::vector<std::string>{"  "});
    const auto out = generate_preference_pair("d", ctx(), h, rig.judge, rig.sft);
    EXPECT_EQ(out.skip_reason, "chosen-generation-failed");
  }
  {
    PrefRig rig(std::vector<std::string>{R"({"is_vague": false})"},
                std::vector<std::string>{"Who benefits?"});
    const auto out = generate_preference_pair("d", ctx(), h, rig.judge, rig.sft);
    EXPECT_EQ(out.skip_reason, "rejected-generation-failed");
  }
  PrefRig rig(PrefRig::Replies{}, {});
  EXPECT_THROW(generate_preference_pair("d", ctx(), {J("q")}, rig.judge, rig.sft), ValidationError);
}

TEST(Preference, SamplingIsDeterministicAndWithoutReplacement) {
  std::mt19937_64 rng(3);
  std::vector<Transcript> ts;
  for (int i = 0; i < 20; ++i) ts.push_back(testing::random_transcript(rng, 6, "d" + std::to_string(i)));
  const auto a = sample_answers(ts, 25, 99);
  const auto b = sample_answers(ts, 25, 99);
  ASSERT_EQ(a.size(), 25u);
  std::set<std::pair<std::string, std::size_t>> seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].doc_id, b[i].doc_id);
    EXPECT_EQ(a[i].turn_index, b[i].turn_index);
    EXPECT_TRUE(seen.insert({a[i].doc_id, a[i].turn_index}).second);
    EXPECT_EQ(a[i].history.back().role, Speaker::kResearcher);
    EXPECT_EQ(a[i].history.size(), a[i].turn_index + 1);
  }
  EXPECT_EQ(sample_answers(ts, 1000, 1).size(), 60u);
  EXPECT_THROW(sample_answers(ts, 0, 1), ValidationError);
}

}  // namespace
}  // namespace jf::synthesis
