#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/corpus/corpus.hpp"
#include "jf/llm/endpoint.hpp"
#include "jf/metrics/metrics.hpp"
#include "jf/simulator/simulator.hpp"

namespace jf::pipeline {

/// Endpoint roles known to the pipeline.
namespace roles {
inline constexpr const char* kJudge = "judge";
inline constexpr const char* kOracle = "oracle";
inline constexpr const char* kSft = "sft";
inline constexpr const char* kResearcher = "researcher";
inline constexpr const char* kEmbed = "embed";
}  // namespace roles

struct SystemConfig {
  std::string name;
  llm::EndpointConfig endpoint;
  simulator::PromptVariant variant = simulator::PromptVariant::kSimple;
};

struct LoraSettings {
  int rank = 16;
  int alpha = 32;
  double dropout = 0.1;
};

/// Recorded in manifests for downstream trainers; nothing here is executed.
struct TrainingHyperparameters {
  int sft_epochs = 3;
  double sft_learning_rate = 5e-5;
  int sft_batch_size = 3;
  int dpo_epochs = 1;
  double dpo_learning_rate = 1e-5;
  int dpo_batch_size = 1;
  LoraSettings lora;

  nlohmann::json sft_json() const;
  nlohmann::json dpo_json() const;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "sessions";
  std::optional<std::filesystem::path> static_dir;
  double idle_timeout_minutes = 60.0;
};

struct PipelineConfig {
  std::filesystem::path workdir = "run";
  std::uint64_t seed = 13;
  std::size_t parallelism = 4;
  std::optional<std::filesystem::path> prompts_dir;

  std::filesystem::path corpus_input;
  corpus::SplitRatios ratios;
  std::size_t token_budget = 1000;

  std::map<std::string, llm::EndpointConfig> endpoints;

  corpus::Split synthesis_split = corpus::Split::kTrain;
  int regenerations = 1;

  std::size_t preference_samples = 19000;

  int rounds = 5;
  std::size_t simulate_documents = 500;
  corpus::Split simulate_split = corpus::Split::kTest;
  std::vector<SystemConfig> systems;

  metrics::ScoringOptions scoring;
  metrics::Averaging averaging = metrics::Averaging::kMacro;
  std::optional<std::filesystem::path> summaries;
  std::optional<std::filesystem::path> interactions;

  ServeConfig serve;
  TrainingHyperparameters training;

  /// ConfigurationError when `role` has no usable endpoint.
  const llm::EndpointConfig& endpoint(const std::string& role) const;
  const SystemConfig& system(const std::string& name) const;

  /// Effective configuration without secrets.
  nlohmann::json describe() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Environment-only defaults (JF_CHAT_BASE_URL, JF_CHAT_API_KEY,
/// JF_JUDGE_BASE_URL, JF_EMBED_BASE_URL, JF_EMBED_API_KEY).
PipelineConfig default_config(const EnvLookup& env = process_env);

/// Parses a TOML file over the environment defaults. Relative paths are
/// resolved against the file's directory. Unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);
PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir,
                            const EnvLookup& env = process_env);

}  // namespace jf::pipeline
