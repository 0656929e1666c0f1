#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/common/prompt_library.hpp"
#include "jf/corpus/document.hpp"
#include "jf/llm/endpoint.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::synthesis {

/// One supervised target: the next journalist utterance given everything
/// said before it.
struct SftExample {
  std::string doc_id;
  std::string system_context;
  std::vector<Turn> history;  // empty, or ends with a researcher turn
  std::string target;
};

/// Simple journalist role followed by the rendered paper context.
std::string journalist_system_context(const corpus::PaperContext& ctx,
                                      const PromptLibrary& prompts = PromptLibrary::builtin());

/// The journalist's view of a conversation: its own questions as assistant
/// turns, researcher answers as user turns.
std::vector<llm::ChatMessage> journalist_messages(const std::string& system_context,
                                                  const std::vector<Turn>& history);

/// One example per journalist turn, in order.
std::vector<SftExample> distill_sft(const Transcript& transcript, const std::string& system_context);

std::vector<SftExample> distill_sft(
    const std::vector<Transcript>& transcripts,
    const std::function<std::string(const std::string& doc_id)>& system_context_for);

/// {messages:[system, user|assistant...], completion}
nlohmann::json to_sft_record(const SftExample& ex);

/// Inverse of distill_sft on the final example: its history, its target and
/// the researcher turn that followed it (if any).
std::vector<Turn> reconstruct_turns(const SftExample& last_example,
                                    const std::optional<std::string>& trailing_answer);

}  // namespace jf::synthesis
