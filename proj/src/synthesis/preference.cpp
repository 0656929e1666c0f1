#include "jf/synthesis/preference.hpp"

#include <algorithm>
#include <iterator>
#include <random>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"
#include "jf/synthesis/sft.hpp"
#include "jf/synthesis/synthesis.hpp"

namespace jf::synthesis {

using nlohmann::json;

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::kClarifyVague: return "clarify_vague";
    case Branch::kClarifyTechnical: return "clarify_technical";
    case Branch::kSocietal: return "societal";
  }
  return "societal";
}

std::optional<Branch> parse_branch(std::string_view s) {
  if (s == "clarify_vague") return Branch::kClarifyVague;
  if (s == "clarify_technical") return Branch::kClarifyTechnical;
  if (s == "societal") return Branch::kSocietal;
  return std::nullopt;
}

Branch choose_branch(const judge::AnswerAssessment& a) {
  if (a.is_vague) return Branch::kClarifyVague;
  if (!a.technical_concepts.empty()) return Branch::kClarifyTechnical;
  return Branch::kSocietal;
}

json to_dpo_record(const PreferencePair& p) {
  json messages = json::array();
  for (const auto& m : journalist_messages(p.system_context, p.history)) {
    messages.push_back(llm::to_json(m));
  }
  return {{"prompt_messages", std::move(messages)},
          {"chosen", p.chosen},
          {"rejected", p.rejected},
          {"branch", to_string(p.branch)}};
}

namespace {

PromptVars base_vars(const corpus::PaperContext& ctx, const std::vector<Turn>& history) {
  return {{"paper", ctx.render()}, {"conversation", "\n" + format_turns(history)}};
}

}  // namespace

std::string chosen_prompt(Branch branch, const corpus::PaperContext& ctx,
                          const std::vector<Turn>& history,
                          const std::vector<std::string>& concepts,
                          const PromptLibrary& prompts) {
  PromptVars vars = base_vars(ctx, history);
  switch (branch) {
    case Branch::kClarifyVague:
      return prompts.render(prompt_ids::kPrefClarifyVague, vars);
    case Branch::kClarifyTechnical:
      vars["complex-concepts"] = text::join(concepts, ", ");
      return prompts.render(prompt_ids::kPrefClarifyTechnical, vars);
    case Branch::kSocietal:
      return prompts.render(prompt_ids::kPrefSocietal, vars);
  }
  return {};
}

std::string rejected_prompt(const corpus::PaperContext& ctx, const std::vector<Turn>& history,
                            const PromptLibrary& prompts) {
  return prompts.render(prompt_ids::kPrefGeneral, base_vars(ctx, history));
}

PreferenceOutcome generate_preference_pair(const std::string& doc_id,
                                           const corpus::PaperContext& ctx,
                                           const std::vector<Turn>& history, judge::Judge& judge,
                                           llm::ChatModel& sft_model,
                                           const PromptLibrary& prompts) {
  validate_turns(history, /*allow_empty=*/false);
  if (history.back().role != Speaker::kResearcher) {
    throw ValidationError("preference history must end with a researcher turn");
  }

  PreferenceOutcome out;
  out.assessment = judge.assess_answer(history.back().text);
  if (out.assessment.judge_failed) {
    out.skip_reason = "judge-failed";
    return out;
  }
  const Branch branch = choose_branch(out.assessment);

  auto generate = [&](const std::string& prompt) -> std::optional<std::string> {
    try {
      std::string q = clean_utterance(sft_model.complete({{llm::Role::kUser, prompt}}));
      if (q.empty()) return std::nullopt;
      return q;
    } catch (const Error& e) {
      spdlog::warn("preference generation for {} failed: {}", doc_id, e.what());
      return std::nullopt;
    }
  };

  auto chosen = generate(chosen_prompt(branch, ctx, history, out.assessment.technical_concepts,
                                       prompts));
  if (!chosen) {
    out.skip_reason = "chosen-generation-failed";
    return out;
  }
  auto rejected = generate(rejected_prompt(ctx, history, prompts));
  if (!rejected) {
    out.skip_reason = "rejected-generation-failed";
    return out;
  }
  if (*chosen == *rejected) {
    out.skip_reason = "chosen-equals-rejected";
    return out;
  }

  PreferencePair pair;
  pair.doc_id = doc_id;
  pair.system_context = journalist_system_context(ctx, prompts);
  pair.history = history;
  pair.chosen = std::move(*chosen);
  pair.rejected = std::move(*rejected);
  pair.branch = branch;
  out.pair = std::move(pair);
  return out;
}

std::vector<AnswerSample> sample_answers(const std::vector<Transcript>& transcripts, std::size_t n,
                                         std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample size must be >= 1");
  struct Slot {
    std::size_t transcript;
    std::size_t turn;
  };
  std::vector<Slot> population;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    const auto& turns = transcripts[i].turns;
    for (std::size_t k = 0; k < turns.size(); ++k) {
      if (turns[k].role == Speaker::kResearcher) population.push_back({i, k});
    }
  }
  std::vector<Slot> chosen;
  if (n >= population.size()) {
    if (n > population.size()) {
      spdlog::warn("requested {} answers but only {} exist; using all", n, population.size());
    }
    chosen = population;
  } else {
    std::mt19937_64 rng(seed);
    std::sample(population.begin(), population.end(), std::back_inserter(chosen), n, rng);
  }

  std::vector<AnswerSample> out;
  out.reserve(chosen.size());
  for (const auto& s : chosen) {
    const auto& t = transcripts[s.transcript];
    AnswerSample a;
    a.doc_id = t.doc_id;
    a.turn_index = s.turn;
    a.history.assign(t.turns.begin(), t.turns.begin() + static_cast<std::ptrdiff_t>(s.turn) + 1);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace jf::synthesis
