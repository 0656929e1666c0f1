#include "jf/synthesis/sft.hpp"

#include "jf/common/error.hpp"

namespace jf::synthesis {

using nlohmann::json;

std::string journalist_system_context(const corpus::PaperContext& ctx,
                                      const PromptLibrary& prompts) {
  return prompts.text(prompt_ids::kJournalistSimple) + "\n\n" + ctx.render();
}

std::vector<llm::ChatMessage> journalist_messages(const std::string& system_context,
                                                  const std::vector<Turn>& history) {
  std::vector<llm::ChatMessage> out;
  out.reserve(history.size() + 1);
  if (!system_context.empty()) out.push_back({llm::Role::kSystem, system_context});
  for (const auto& t : history) {
    out.push_back({t.role == Speaker::kJournalist ? llm::Role::kAssistant : llm::Role::kUser,
                   t.text});
  }
  return out;
}

std::vector<SftExample> distill_sft(const Transcript& transcript,
                                    const std::string& system_context) {
  std::vector<SftExample> out;
  for (std::size_t i = 0; i < transcript.turns.size(); ++i) {
    if (transcript.turns[i].role != Speaker::kJournalist) continue;
    SftExample ex;
    ex.doc_id = transcript.doc_id;
    ex.system_context = system_context;
    ex.history.assign(transcript.turns.begin(), transcript.turns.begin() + i);
    ex.target = transcript.turns[i].text;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<SftExample> distill_sft(
    const std::vector<Transcript>& transcripts,
    const std::function<std::string(const std::string&)>& system_context_for) {
  std::vector<SftExample> out;
  for (const auto& t : transcripts) {
    auto examples = distill_sft(t, system_context_for(t.doc_id));
    out.insert(out.end(), std::make_move_iterator(examples.begin()),
               std::make_move_iterator(examples.end()));
  }
  return out;
}

json to_sft_record(const SftExample& ex) {
  json messages = json::array();
  for (const auto& m : journalist_messages(ex.system_context, ex.history)) {
    messages.push_back(llm::to_json(m));
  }
  return {{"messages", std::move(messages)}, {"completion", ex.target}};
}

std::vector<Turn> reconstruct_turns(const SftExample& last_example,
                                    const std::optional<std::string>& trailing_answer) {
  std::vector<Turn> turns = last_example.history;
  turns.push_back({Speaker::kJournalist, last_example.target});
  if (trailing_answer) turns.push_back({Speaker::kResearcher, *trailing_answer});
  return turns;
}

}  // namespace jf::synthesis
