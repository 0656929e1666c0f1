#include "jf/simulator/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <iterator>
#include <random>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"
#include "jf/corpus/tokens.hpp"
#include "jf/llm/batch.hpp"
#include "jf/synthesis/sft.hpp"
#include "jf/synthesis/synthesis.hpp"

namespace jf::simulator {

using nlohmann::json;
using synthesis::Speaker;
using synthesis::Turn;

std::string_view to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::kSimple: return "simple";
    case PromptVariant::kAdvanced: return "advanced";
    case PromptVariant::kFinetuned: return "finetuned";
  }
  return "simple";
}

std::optional<PromptVariant> parse_variant(std::string_view s) {
  if (s == "simple") return PromptVariant::kSimple;
  if (s == "advanced") return PromptVariant::kAdvanced;
  if (s == "finetuned") return PromptVariant::kFinetuned;
  return std::nullopt;
}

void SimulationSpec::validate() const {
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  if (token_budget < 1) throw ValidationError("token budget must be >= 1");
}

json SimulationSpec::describe() const {
  return {{"system", system_name},
          {"journalist", journalist.describe()},
          {"variant", to_string(variant)},
          {"researcher", researcher.describe()},
          {"rounds", rounds},
          {"token_budget", token_budget},
          {"seed", seed}};
}

std::string journalist_system_prompt(PromptVariant variant, const corpus::PaperContext& ctx,
                                     const PromptLibrary& prompts) {
  switch (variant) {
    case PromptVariant::kSimple:
      return prompts.text(prompt_ids::kJournalistSimple) + "\n\n" + ctx.render();
    case PromptVariant::kAdvanced:
      return prompts.text(prompt_ids::kJournalistAdvanced) + "\n\n" + ctx.render();
    case PromptVariant::kFinetuned:
      return ctx.render();
  }
  return ctx.render();
}

std::string researcher_system_prompt(const corpus::PaperContext& ctx,
                                     const PromptLibrary& prompts) {
  return prompts.text(prompt_ids::kResearcher) + "\n\n" + ctx.render();
}

std::vector<llm::ChatMessage> researcher_messages(const std::string& system_prompt,
                                                  const std::vector<Turn>& history) {
  std::vector<llm::ChatMessage> out;
  out.reserve(history.size() + 1);
  out.push_back({llm::Role::kSystem, system_prompt});
  for (const auto& t : history) {
    out.push_back({t.role == Speaker::kJournalist ? llm::Role::kUser : llm::Role::kAssistant,
                   t.text});
  }
  return out;
}

namespace {

std::string require_text(std::string reply, std::string_view who) {
  if (reply.empty()) throw EndpointUnavailable(std::string(who) + " returned an empty reply");
  return reply;
}

std::string clean_answer(std::string_view reply) {
  if (const auto end = reply.rfind("</think>"); end != std::string_view::npos) {
    reply.remove_prefix(end + 8);
  }
  return std::string(text::trim(reply));
}

}  // namespace

std::string next_question(llm::ChatModel& journalist, PromptVariant variant,
                          const corpus::PaperContext& ctx, const std::vector<Turn>& history,
                          const PromptLibrary& prompts) {
  const auto messages =
      synthesis::journalist_messages(journalist_system_prompt(variant, ctx, prompts), history);
  return require_text(synthesis::clean_utterance(journalist.complete(messages)), "journalist");
}

synthesis::Transcript simulate(const corpus::Document& doc, const SimulationSpec& spec,
                               llm::ChatModel& journalist, llm::ChatModel& researcher,
                               const PromptLibrary& prompts) {
  spec.validate();
  if (text::trim(doc.paper_text).empty()) {
    throw ValidationError("document " + doc.id + " has no paper text");
  }
  const corpus::PaperContext ctx = corpus::truncate(doc, spec.token_budget);
  const std::string researcher_system = researcher_system_prompt(ctx, prompts);

  synthesis::Transcript t;
  t.doc_id = doc.id;
  t.source = synthesis::Source::kSimulated;
  for (int round = 0; round < spec.rounds; ++round) {
    t.turns.push_back(
        {Speaker::kJournalist, next_question(journalist, spec.variant, ctx, t.turns, prompts)});
    const auto messages = researcher_messages(researcher_system, t.turns);
    t.turns.push_back(
        {Speaker::kResearcher, require_text(clean_answer(researcher.complete(messages)),
                                            "researcher")});
  }
  return t;
}

std::vector<const corpus::Document*> sample_documents(
    const std::vector<const corpus::Document*>& docs, std::size_t n, std::uint64_t seed) {
  if (n >= docs.size()) return docs;
  std::vector<const corpus::Document*> out;
  std::mt19937_64 rng(seed);
  std::sample(docs.begin(), docs.end(), std::back_inserter(out), n, rng);
  return out;
}

SuiteResult simulate_suite(const std::vector<const corpus::Document*>& docs,
                           const SimulationSpec& spec, llm::ChatModel& journalist,
                           llm::ChatModel& researcher, std::size_t parallelism,
                           const PromptLibrary& prompts) {
  spec.validate();
  std::vector<std::optional<synthesis::Transcript>> done(docs.size());
  std::vector<std::string> last_error(docs.size());
  std::vector<int> attempts(docs.size(), 0);
  std::atomic<std::size_t> finished{0};

  std::vector<std::size_t> pending(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) pending[i] = i;

  for (int pass = 0; pass < 2 && !pending.empty(); ++pass) {
    std::vector<std::function<synthesis::Transcript()>> jobs;
    for (std::size_t idx : pending) {
      jobs.emplace_back([&, idx] {
        return simulate(*docs[idx], spec, journalist, researcher, prompts);
      });
    }
    auto results = llm::run_batch(jobs, parallelism, [&](std::size_t) {
      const std::size_t n = ++finished;
      if (n % 50 == 0) spdlog::info("{} simulation jobs finished", n);
    });
    std::vector<std::size_t> retry;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const std::size_t idx = pending[k];
      ++attempts[idx];
      if (results[k].ok()) {
        done[idx] = std::move(*results[k].value);
      } else {
        last_error[idx] = results[k].error;
        spdlog::warn("simulation of {} failed (attempt {}): {}", docs[idx]->id, attempts[idx],
                     results[k].error);
        retry.push_back(idx);
      }
    }
    pending = std::move(retry);
  }

  SuiteResult out;
  json per_doc = json::array();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    json status = {{"doc_id", docs[i]->id}, {"attempts", attempts[i]}};
    if (done[i]) {
      status["status"] = "ok";
      out.transcripts.push_back(std::move(*done[i]));
    } else {
      status["status"] = "skipped";
      status["error"] = last_error[i];
      ++out.skipped;
    }
    per_doc.push_back(std::move(status));
  }
  out.manifest = {{"spec", spec.describe()},
                  {"seed", spec.seed},
                  {"prompt_versions",
                   {{"journalist_simple", prompts.version(prompt_ids::kJournalistSimple)},
                    {"journalist_advanced", prompts.version(prompt_ids::kJournalistAdvanced)},
                    {"researcher", prompts.version(prompt_ids::kResearcher)}}},
                  {"requested", docs.size()},
                  {"completed", out.transcripts.size()},
                  {"skipped", out.skipped},
                  {"documents", std::move(per_doc)}};
  return out;
}

}  // namespace jf::simulator
