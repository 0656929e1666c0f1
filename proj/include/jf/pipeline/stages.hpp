#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "jf/common/prompt_library.hpp"
#include "jf/llm/gateway.hpp"
#include "jf/pipeline/config.hpp"

namespace jf::pipeline {

/// Where every stage reads and writes inside the work directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path corpus_dir() const { return root / "corpus"; }
  std::filesystem::path scores() const { return root / "scores.jsonl"; }
  std::filesystem::path filtered() const { return root / "filtered.jsonl"; }
  std::filesystem::path transcripts() const { return root / "transcripts.jsonl"; }
  std::filesystem::path sft() const { return root / "sft.jsonl"; }
  std::filesystem::path preferences() const { return root / "preferences.jsonl"; }
  std::filesystem::path preference_log() const { return root / "preference_log.jsonl"; }
  std::filesystem::path simulations(const std::string& system) const;
  std::filesystem::path evaluation_dir() const { return root / "evaluation"; }
  std::filesystem::path report_json() const { return root / "report.json"; }
  std::filesystem::path report_txt() const { return root / "report.txt"; }
  std::filesystem::path manifest(const std::string& stage) const;
};

/// File-name-safe form of a system label.
std::string file_stem(const std::string& name);

/// Shared state for one CLI invocation: config, gateway and prompts.
class Runtime {
 public:
  explicit Runtime(PipelineConfig config,
                   std::shared_ptr<llm::Transport> transport = std::make_shared<llm::HttpTransport>());

  const PipelineConfig& config() const { return config_; }
  const Layout& layout() const { return layout_; }
  const PromptLibrary& prompts() const { return prompts_; }
  llm::Gateway& gateway() { return gateway_; }

  llm::EndpointChatModel chat(const std::string& role);
  llm::EndpointEmbeddingProvider embedder();

 private:
  PipelineConfig config_;
  Layout layout_;
  PromptLibrary prompts_;
  llm::Gateway gateway_;
};

/// Every stage returns a JSON summary and writes its outputs plus a
/// <stage>.manifest.json under the work directory.
nlohmann::json run_ingest(Runtime& rt);
nlohmann::json run_score(Runtime& rt);
nlohmann::json run_filter(Runtime& rt);
nlohmann::json run_synthesize(Runtime& rt);
nlohmann::json run_distill_sft(Runtime& rt);
nlohmann::json run_gen_prefs(Runtime& rt);
/// All configured systems, or only `system` when given.
nlohmann::json run_simulate(Runtime& rt, const std::optional<std::string>& system = std::nullopt);

struct EvaluateTarget {
  std::string name;
  std::filesystem::path transcripts;
};

/// Scores the simulations of every configured system (or just `system`), or
/// only `external` when given, e.g. exported live sessions.
nlohmann::json run_evaluate(Runtime& rt, const std::optional<std::string>& system = std::nullopt,
                            const std::optional<EvaluateTarget>& external = std::nullopt);
nlohmann::json run_report(Runtime& rt);

/// Blocks serving the HTTP API until SIGINT or SIGTERM. `on_listening`
/// receives the bound port.
void run_serve(Runtime& rt, const std::function<void(int port)>& on_listening = {});

}  // namespace jf::pipeline
