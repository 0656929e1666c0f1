#include <gtest/gtest.h>

#include <map>

#include "fakes.hpp"
#include "jf/common/error.hpp"
#include "jf/pipeline/config.hpp"

namespace jf::pipeline {
namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const EnvLookup kNoEnv = env_of({});

TEST(Config, EnvironmentDefaults) {
  const auto cfg = default_config(env_of({{"JF_CHAT_BASE_URL", "http://chat/v1"},
                                          {"JF_CHAT_API_KEY", "ck"},
                                          {"JF_EMBED_BASE_URL", "http://emb/v1"}}));
  EXPECT_EQ(cfg.endpoints.at("oracle").base_url, "http://chat/v1");
  EXPECT_EQ(cfg.endpoints.at("researcher").api_key, "ck");
  EXPECT_EQ(cfg.endpoints.at("judge").base_url, "http://chat/v1");
  EXPECT_EQ(cfg.endpoints.at("judge").temperature, 0.0);
  EXPECT_EQ(cfg.endpoints.at("sft").temperature, 0.7);
  EXPECT_EQ(cfg.endpoints.at("embed").base_url, "http://emb/v1");
  EXPECT_EQ(cfg.seed, 13u);
  EXPECT_EQ(cfg.token_budget, 1000u);
  EXPECT_EQ(cfg.rounds, 5);
  EXPECT_EQ(cfg.preference_samples, 19000u);
  EXPECT_EQ(cfg.training.sft_epochs, 3);
  EXPECT_EQ(cfg.training.lora.rank, 16);
  EXPECT_EQ(cfg.averaging, metrics::Averaging::kMacro);
  EXPECT_EQ(cfg.scoring.redundancy, metrics::RedundancyMode::kMax);

  const auto judge = default_config(env_of({{"JF_CHAT_BASE_URL", "http://chat/v1"},
                                            {"JF_JUDGE_BASE_URL", "http://judge/v1"}}));
  EXPECT_EQ(judge.endpoints.at("judge").base_url, "http://judge/v1");
}

TEST(Config, ParseFullFile) {
  const auto cfg = parse_config(R"(
[run]
workdir = "out"
seed = 99
parallelism = 8

[corpus]
input = "data/corpus.jsonl"
ratios = [0.7, 0.2, 0.1]
token_budget = 500

[endpoints.judge]
base_url = "http://judge.local/v1"
model = "qwen"
api_key_env = "MY_KEY"
max_inflight = 3
timeout_s = 2.5
backoff_base_ms = 10

[simulate]
rounds = 4
documents = 20

[[systems]]
name = "DPO-Qwen"
base_url = "http://vllm:8000/v1"
model = "dpo-qwen"
variant = "finetuned"

[[systems]]
name = "Judge-backed"
endpoint = "judge"
variant = "advanced"

[evaluate]
redundancy = "mean"
averaging = "micro"
match_threshold = 0.75

[serve]
port = 9000
idle_timeout_minutes = 5
)",
                                "/base", env_of({{"MY_KEY", "secret"}}));
  EXPECT_EQ(cfg.workdir, std::filesystem::path("/base/out"));
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.parallelism, 8u);
  EXPECT_EQ(cfg.corpus_input, std::filesystem::path("/base/data/corpus.jsonl"));
  EXPECT_DOUBLE_EQ(cfg.ratios.validation, 0.2);
  EXPECT_EQ(cfg.token_budget, 500u);
  const auto& judge = cfg.endpoint("judge");
  EXPECT_EQ(judge.model_name, "qwen");
  EXPECT_EQ(judge.api_key, "secret");
  EXPECT_EQ(judge.max_inflight, 3u);
  EXPECT_EQ(judge.timeout.count(), 2500);
  EXPECT_EQ(judge.backoff.base.count(), 10);
  EXPECT_EQ(judge.temperature, 0.0);
  EXPECT_EQ(cfg.rounds, 4);
  ASSERT_EQ(cfg.systems.size(), 2u);
  EXPECT_EQ(cfg.system("DPO-Qwen").variant, simulator::PromptVariant::kFinetuned);
  EXPECT_EQ(cfg.system("DPO-Qwen").endpoint.model_name, "dpo-qwen");
  EXPECT_EQ(cfg.system("Judge-backed").endpoint.model_name, "qwen");
  EXPECT_THROW(cfg.system("nobody"), NotFound);
  EXPECT_EQ(cfg.scoring.redundancy, metrics::RedundancyMode::kMean);
  EXPECT_EQ(cfg.averaging, metrics::Averaging::kMicro);
  EXPECT_DOUBLE_EQ(cfg.scoring.match_threshold, 0.75);
  EXPECT_EQ(cfg.serve.port, 9000);
  EXPECT_EQ(cfg.serve.data_dir, std::filesystem::path("/base/out/sessions"));
  EXPECT_EQ(cfg.describe().dump().find("secret"), std::string::npos);
}

TEST(Config, Rejections) {
  auto bad = [](const std::string& text) {
    EXPECT_THROW(parse_config(text, "/b", kNoEnv), ConfigurationError) << text;
  };
  bad("[run]\nseeed = 1\n");
  bad("[bogus]\n");
  bad("[endpoints.judge]\nbase_url = \"http://x\"\ncolour = 1\n");
  bad("[endpoints.writer]\nbase_url = \"http://x\"\n");
  bad("[run]\nseed = \"one\"\n");
  bad("[run]\nparallelism = 0\n");
  bad("[[systems]]\nname = \"A\"\nvariant = \"fancy\"\n");
  bad("[[systems]]\nname = \"A\"\n[[systems]]\nname = \"A\"\n");
  bad("[[systems]]\nvariant = \"simple\"\n");
  bad("[[systems]]\nname = \"A\"\nendpoint = \"nowhere\"\n");
  bad("[evaluate]\nredundancy = \"median\"\n");
  bad("this is = not toml [");
  EXPECT_THROW(parse_config("[corpus]\nratios = [0.5, 0.5, 0.5]\n", "/b", kNoEnv), Error);
}

TEST(Config, EndpointRequiresUrlAndModel) {
  const auto cfg = parse_config("", "/b", kNoEnv);
  EXPECT_THROW(cfg.endpoint("judge"), ConfigurationError);
  const auto cfg2 = parse_config("[endpoints.judge]\nbase_url = \"http://x/v1\"\n", "/b", kNoEnv);
  EXPECT_THROW(cfg2.endpoint("judge"), ConfigurationError);
  const auto cfg3 =
      parse_config("[endpoints.judge]\nbase_url = \"http://x/v1\"\nmodel = \"m\"\n", "/b", kNoEnv);
  EXPECT_NO_THROW(cfg3.endpoint("judge"));
  EXPECT_THROW(cfg3.endpoint("nonexistent"), ConfigurationError);
}

TEST(Config, LoadFromFileResolvesRelativeToIt) {
  testing::TempDir dir;
  testing::write_file(dir / "jf.toml", "[corpus]\ninput = \"c.jsonl\"\n");
  const auto cfg = load_config(dir / "jf.toml", kNoEnv);
  EXPECT_EQ(cfg.corpus_input, dir.path() / "c.jsonl");
  EXPECT_EQ(cfg.workdir, dir.path() / "run");
  EXPECT_THROW(load_config(dir / "missing.toml", kNoEnv), Error);
}

TEST(Config, TrainingHyperparametersRecorded) {
  const auto cfg =
      parse_config("[training.dpo]\nlearning_rate = 2e-6\n[training.lora]\nrank = 8\n", "/b", kNoEnv);
  const auto dpo = cfg.training.dpo_json();
  EXPECT_DOUBLE_EQ(dpo["learning_rate"].get<double>(), 2e-6);
  EXPECT_EQ(dpo["lora"]["rank"], 8);
  EXPECT_EQ(cfg.training.sft_json()["epochs"], 3);
}

}  // namespace
}  // namespace jf::pipeline
