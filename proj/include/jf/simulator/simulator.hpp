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
#include "jf/llm/gateway.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::simulator {

/// How the journalist is instructed: the short role, the detailed role, or
/// nothing beyond the paper for fine-tuned models.
enum class PromptVariant { kSimple, kAdvanced, kFinetuned };

std::string_view to_string(PromptVariant v);
std::optional<PromptVariant> parse_variant(std::string_view s);

struct SimulationSpec {
  std::string system_name;
  llm::EndpointConfig journalist;
  PromptVariant variant = PromptVariant::kSimple;
  llm::EndpointConfig researcher;
  int rounds = 5;
  std::size_t token_budget = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json describe() const;
};

std::string journalist_system_prompt(PromptVariant variant, const corpus::PaperContext& ctx,
                                     const PromptLibrary& prompts = PromptLibrary::builtin());
std::string researcher_system_prompt(const corpus::PaperContext& ctx,
                                     const PromptLibrary& prompts = PromptLibrary::builtin());

/// The researcher's view: journalist questions as user turns, its own answers
/// as assistant turns.
std::vector<llm::ChatMessage> researcher_messages(const std::string& system_prompt,
                                                  const std::vector<synthesis::Turn>& history);

/// Produces the next journalist question for a conversation so far (shared
/// with the live serving path).
std::string next_question(llm::ChatModel& journalist, PromptVariant variant,
                          const corpus::PaperContext& ctx,
                          const std::vector<synthesis::Turn>& history,
                          const PromptLibrary& prompts = PromptLibrary::builtin());

/// `rounds` journalist/researcher exchanges over the paper excerpt; both
/// sides see the same excerpt. Endpoint errors propagate.
synthesis::Transcript simulate(const corpus::Document& doc, const SimulationSpec& spec,
                               llm::ChatModel& journalist, llm::ChatModel& researcher,
                               const PromptLibrary& prompts = PromptLibrary::builtin());

/// Seeded selection of up to `n` documents, reported in corpus order.
std::vector<const corpus::Document*> sample_documents(
    const std::vector<const corpus::Document*>& docs, std::size_t n, std::uint64_t seed);

struct SuiteResult {
  std::vector<synthesis::Transcript> transcripts;
  std::size_t skipped = 0;
  nlohmann::json manifest;
};

/// Runs `simulate` for every document through the batch executor. A failed
/// conversation is discarded and its document re-queued once; a second
/// failure skips it. The manifest records the spec, seed, prompt versions and
/// per-document status.
SuiteResult simulate_suite(const std::vector<const corpus::Document*>& docs,
                           const SimulationSpec& spec, llm::ChatModel& journalist,
                           llm::ChatModel& researcher, std::size_t parallelism,
                           const PromptLibrary& prompts = PromptLibrary::builtin());

}  // namespace jf::simulator
