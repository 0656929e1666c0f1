#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/common/prompt_library.hpp"
#include "jf/corpus/document.hpp"
#include "jf/judge/judge.hpp"
#include "jf/llm/gateway.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::synthesis {

enum class Branch { kClarifyVague, kClarifyTechnical, kSocietal };

std::string_view to_string(Branch b);
std::optional<Branch> parse_branch(std::string_view s);

/// Vagueness wins over technical concepts; a clean answer goes to the
/// societal-impact branch. Undefined for a judge-failed assessment.
Branch choose_branch(const judge::AnswerAssessment& a);

struct PreferencePair {
  std::string doc_id;
  std::string system_context;
  std::vector<Turn> history;  // ends with a researcher turn
  std::string chosen;
  std::string rejected;
  Branch branch = Branch::kSocietal;
};

/// {prompt_messages:[...], chosen, rejected, branch}
nlohmann::json to_dpo_record(const PreferencePair& p);

struct PreferenceOutcome {
  std::optional<PreferencePair> pair;
  judge::AnswerAssessment assessment;
  std::string skip_reason;  // set whenever pair is empty
};

/// Assesses the last researcher answer, then has the SFT model write the
/// chosen question with the branch's prompt and the rejected question with
/// the generic-question prompt. Judge failure, a failed or empty generation,
/// or chosen == rejected yield a skip.
PreferenceOutcome generate_preference_pair(const std::string& doc_id,
                                           const corpus::PaperContext& ctx,
                                           const std::vector<Turn>& history,
                                           judge::Judge& judge, llm::ChatModel& sft_model,
                                           const PromptLibrary& prompts = PromptLibrary::builtin());

/// The chosen-side prompt for a branch (exposed so tests can inspect it).
std::string chosen_prompt(Branch branch, const corpus::PaperContext& ctx,
                          const std::vector<Turn>& history,
                          const std::vector<std::string>& concepts,
                          const PromptLibrary& prompts = PromptLibrary::builtin());
std::string rejected_prompt(const corpus::PaperContext& ctx, const std::vector<Turn>& history,
                            const PromptLibrary& prompts = PromptLibrary::builtin());

struct AnswerSample {
  std::string doc_id;
  std::size_t turn_index = 0;  // index of the sampled researcher turn
  std::vector<Turn> history;   // prefix ending at that turn
};

/// Uniform sample without replacement over every (transcript, researcher
/// turn) pair; deterministic for a given seed. Asking for more than exists
/// returns the whole population with a warning.
std::vector<AnswerSample> sample_answers(const std::vector<Transcript>& transcripts, std::size_t n,
                                         std::uint64_t seed);

}  // namespace jf::synthesis
