#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/common/prompt_library.hpp"
#include "jf/corpus/document.hpp"
#include "jf/llm/gateway.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::synthesis {

/// Drops any <think> block, surrounding quotes and a leading speaker label
/// from a single generated utterance.
std::string clean_utterance(std::string_view reply);

/// Asks the oracle model to turn a (paper excerpt, press release) pair into a
/// journalist/researcher conversation. An unparseable reply triggers
/// `regenerations` further attempts; after that DocumentSkipped is thrown.
Transcript synthesize_conversation(const std::string& doc_id, const corpus::PaperContext& ctx,
                                   std::string_view press_release, llm::ChatModel& oracle,
                                   const PromptLibrary& prompts = PromptLibrary::builtin(),
                                   int regenerations = 1);

struct CorpusStats {
  std::size_t transcripts = 0;
  double mean_turns = 0.0;
  double mean_question_tokens = 0.0;
  double mean_answer_tokens = 0.0;
  std::size_t journalist_turns = 0;
};

CorpusStats summarize(const std::vector<Transcript>& transcripts);
nlohmann::json to_json(const CorpusStats& s);

}  // namespace jf::synthesis
