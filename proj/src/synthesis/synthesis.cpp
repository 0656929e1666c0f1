#include "jf/synthesis/synthesis.hpp"

#include <regex>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"
#include "jf/corpus/tokens.hpp"

namespace jf::synthesis {

std::string clean_utterance(std::string_view reply) {
  if (const auto end = reply.rfind("</think>"); end != std::string_view::npos) {
    reply.remove_prefix(end + 8);
  }
  std::string s(text::trim(reply));
  static const std::regex label(R"(^(?:\*\*)?\s*(?:journalist|question)\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*)",
                                std::regex::icase);
  s = std::regex_replace(s, label, "", std::regex_constants::format_first_only);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(text::trim(s));
}

Transcript synthesize_conversation(const std::string& doc_id, const corpus::PaperContext& ctx,
                                   std::string_view press_release, llm::ChatModel& oracle,
                                   const PromptLibrary& prompts, int regenerations) {
  if (text::trim(press_release).empty()) {
    throw ValidationError("document " + doc_id + " has no press release");
  }
  const std::string prompt =
      prompts.render(prompt_ids::kConversationSynthesis,
                     {{"paper", ctx.render()}, {"press_release", std::string(press_release)}});
  const std::vector<llm::ChatMessage> messages{{llm::Role::kUser, prompt}};

  std::string last_error;
  for (int attempt = 0; attempt <= regenerations; ++attempt) {
    const std::string reply = oracle.complete(messages);
    ParsedTurns parsed = parse_transcript(reply);
    if (parsed.ok) {
      Transcript t;
      t.doc_id = doc_id;
      t.turns = std::move(parsed.turns);
      t.source = Source::kSynthesized;
      return t;
    }
    last_error = "line " + std::to_string(parsed.error_line) + ": " + parsed.error;
    spdlog::warn("conversation for {} unparseable (attempt {}): {}", doc_id, attempt + 1,
                 last_error);
  }
  throw DocumentSkipped("document " + doc_id + " skipped: " + last_error);
}

CorpusStats summarize(const std::vector<Transcript>& transcripts) {
  CorpusStats s;
  s.transcripts = transcripts.size();
  std::size_t turns = 0;
  std::size_t q_tokens = 0;
  std::size_t a_tokens = 0;
  std::size_t n_q = 0;
  std::size_t n_a = 0;
  for (const auto& t : transcripts) {
    turns += t.turns.size();
    for (const auto& turn : t.turns) {
      const std::size_t tok = corpus::approx_tokens(turn.text);
      if (turn.role == Speaker::kJournalist) {
        q_tokens += tok;
        ++n_q;
      } else {
        a_tokens += tok;
        ++n_a;
      }
    }
  }
  s.journalist_turns = n_q;
  if (!transcripts.empty()) s.mean_turns = static_cast<double>(turns) / transcripts.size();
  if (n_q) s.mean_question_tokens = static_cast<double>(q_tokens) / n_q;
  if (n_a) s.mean_answer_tokens = static_cast<double>(a_tokens) / n_a;
  return s;
}

nlohmann::json to_json(const CorpusStats& s) {
  return {{"transcripts", s.transcripts},
          {"mean_turns", s.mean_turns},
          {"mean_question_tokens", s.mean_question_tokens},
          {"mean_answer_tokens", s.mean_answer_tokens},
          {"journalist_turns", s.journalist_turns}};
}

}  // namespace jf::synthesis
