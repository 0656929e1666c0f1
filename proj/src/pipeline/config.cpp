#include "jf/pipeline/config.hpp"

#include <cstdlib>
#include <fstream>
#include <array>
#include <set>
#include <span>
#include <sstream>

#include <toml.hpp>

#include "jf/common/error.hpp"

namespace jf::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

json TrainingHyperparameters::sft_json() const {
  return {{"epochs", sft_epochs},
          {"learning_rate", sft_learning_rate},
          {"batch_size", sft_batch_size},
          {"lora", {{"rank", lora.rank}, {"alpha", lora.alpha}, {"dropout", lora.dropout}}}};
}

json TrainingHyperparameters::dpo_json() const {
  return {{"epochs", dpo_epochs},
          {"learning_rate", dpo_learning_rate},
          {"batch_size", dpo_batch_size},
          {"lora", {{"rank", lora.rank}, {"alpha", lora.alpha}, {"dropout", lora.dropout}}}};
}

const llm::EndpointConfig& PipelineConfig::endpoint(const std::string& role) const {
  auto it = endpoints.find(role);
  if (it == endpoints.end() || it->second.base_url.empty()) {
    throw ConfigurationError("no endpoint configured for '" + role + "'; set [endpoints." + role +
                             "] base_url or the matching JF_* environment variable");
  }
  it->second.validate();
  if (it->second.model_name.empty()) {
    throw ConfigurationError("endpoint '" + role + "' has no model name");
  }
  return it->second;
}

const SystemConfig& PipelineConfig::system(const std::string& name) const {
  for (const auto& s : systems) {
    if (s.name == name) return s;
  }
  throw NotFound("unknown system: " + name);
}

json PipelineConfig::describe() const {
  json eps = json::object();
  for (const auto& [role, cfg] : endpoints) eps[role] = cfg.describe();
  json sys = json::array();
  for (const auto& s : systems) {
    sys.push_back({{"name", s.name},
                   {"variant", simulator::to_string(s.variant)},
                   {"endpoint", s.endpoint.describe()}});
  }
  return {{"workdir", workdir.string()},
          {"seed", seed},
          {"parallelism", parallelism},
          {"prompts_dir", prompts_dir ? prompts_dir->string() : ""},
          {"corpus",
           {{"input", corpus_input.string()},
            {"ratios", {ratios.train, ratios.validation, ratios.test}},
            {"token_budget", token_budget}}},
          {"endpoints", eps},
          {"synthesis",
           {{"split", corpus::to_string(synthesis_split)}, {"regenerations", regenerations}}},
          {"preferences", {{"samples", preference_samples}}},
          {"simulate",
           {{"rounds", rounds},
            {"documents", simulate_documents},
            {"split", corpus::to_string(simulate_split)}}},
          {"systems", sys},
          {"evaluate",
           {{"match_threshold", scoring.match_threshold},
            {"redundancy", metrics::to_string(scoring.redundancy)},
            {"averaging", metrics::to_string(averaging)}}},
          {"serve",
           {{"host", serve.host},
            {"port", serve.port},
            {"data_dir", serve.data_dir.string()},
            {"idle_timeout_minutes", serve.idle_timeout_minutes}}},
          {"training", {{"sft", training.sft_json()}, {"dpo", training.dpo_json()}}}};
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

PipelineConfig default_config(const EnvLookup& env) {
  PipelineConfig cfg;
  const auto chat_url = env("JF_CHAT_BASE_URL").value_or("");
  const auto chat_key = env("JF_CHAT_API_KEY").value_or("");
  for (const char* role : {roles::kOracle, roles::kSft, roles::kResearcher}) {
    auto& e = cfg.endpoints[role];
    e.base_url = chat_url;
    e.api_key = chat_key;
    e.temperature = llm::kGenerationTemperature;
  }
  auto& judge = cfg.endpoints[roles::kJudge];
  judge.base_url = env("JF_JUDGE_BASE_URL").value_or(chat_url);
  judge.api_key = chat_key;
  judge.temperature = llm::kJudgeTemperature;
  auto& embed = cfg.endpoints[roles::kEmbed];
  embed.base_url = env("JF_EMBED_BASE_URL").value_or("");
  embed.api_key = env("JF_EMBED_API_KEY").value_or("");
  return cfg;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigurationError(where + ": " + what);
}

void check_keys(const toml::table& t, const std::string& where,
                std::span<const std::string_view> allowed) {
  const std::set<std::string_view> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : t) {
    if (!ok.count(key.str())) fail(where, "unknown key '" + std::string(key.str()) + "'");
  }
}

void check_keys(const toml::table& t, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  check_keys(t, where, std::span<const std::string_view>(allowed.begin(), allowed.size()));
}

template <class T>
std::optional<T> get(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = n->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = n->value_exact<std::string>()) return *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = n->value_exact<bool>()) return *v;
  } else {
    if (auto v = n->value_exact<std::int64_t>()) return static_cast<T>(*v);
  }
  fail(where, "key '" + std::string(key) + "' has the wrong type");
}

template <class T>
T non_negative(std::optional<std::int64_t> v, T fallback, const std::string& where,
               std::string_view key) {
  if (!v) return fallback;
  if (*v < 0) fail(where, std::string(key) + " must be >= 0");
  return static_cast<T>(*v);
}

const toml::table* subtable(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return nullptr;
  if (!n->is_table()) fail(where, "'" + std::string(key) + "' must be a table");
  return n->as_table();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

corpus::Split split_value(const std::string& s, const std::string& where) {
  auto split = corpus::parse_split(s);
  if (!split) fail(where, "unknown split '" + s + "'");
  return *split;
}

constexpr std::array<std::string_view, 16> kEndpointKeys = {
    "base_url",        "api_key",        "api_key_env",    "model",
    "temperature",     "max_reply_tokens", "timeout_s",    "max_retries",
    "backoff_base_ms", "backoff_factor", "backoff_jitter", "max_inflight",
    "embedding_dimension", "endpoint",   "name",           "variant"};

void apply_endpoint(const toml::table& t, llm::EndpointConfig& e, const std::string& where,
                    const EnvLookup& env) {
  if (auto v = get<std::string>(t, "base_url", where)) e.base_url = *v;
  if (auto v = get<std::string>(t, "api_key_env", where)) e.api_key = env(*v).value_or("");
  if (auto v = get<std::string>(t, "api_key", where)) e.api_key = *v;
  if (auto v = get<std::string>(t, "model", where)) e.model_name = *v;
  if (auto v = get<double>(t, "temperature", where)) {
    if (*v < 0) fail(where, "temperature must be >= 0");
    e.temperature = *v;
  }
  if (auto v = get<std::int64_t>(t, "max_reply_tokens", where)) {
    if (*v < 1) fail(where, "max_reply_tokens must be >= 1");
    e.max_reply_tokens = static_cast<int>(*v);
  }
  if (auto v = get<double>(t, "timeout_s", where)) {
    if (*v <= 0) fail(where, "timeout_s must be > 0");
    e.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(*v * 1000.0));
  }
  e.max_retries = non_negative<int>(get<std::int64_t>(t, "max_retries", where), e.max_retries,
                                    where, "max_retries");
  if (auto v = get<std::int64_t>(t, "backoff_base_ms", where)) {
    e.backoff.base = std::chrono::milliseconds(non_negative<std::int64_t>(v, 0, where, "backoff_base_ms"));
  }
  if (auto v = get<double>(t, "backoff_factor", where)) e.backoff.factor = *v;
  if (auto v = get<double>(t, "backoff_jitter", where)) {
    if (*v < 0 || *v >= 1) fail(where, "backoff_jitter must be in [0, 1)");
    e.backoff.jitter = *v;
  }
  e.max_inflight = non_negative<std::size_t>(get<std::int64_t>(t, "max_inflight", where),
                                             e.max_inflight, where, "max_inflight");
  e.embedding_dimension =
      non_negative<std::size_t>(get<std::int64_t>(t, "embedding_dimension", where),
                                e.embedding_dimension, where, "embedding_dimension");
}

}  // namespace

PipelineConfig parse_config(std::string_view toml_text, const fs::path& base_dir,
                            const EnvLookup& env) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "invalid TOML at line " << e.source().begin.line << ": " << e.description();
    throw ConfigurationError(os.str());
  }

  PipelineConfig cfg = default_config(env);
  check_keys(root, "config",
             {"run", "corpus", "endpoints", "synthesis", "preferences", "simulate", "systems",
              "evaluate", "serve", "training"});

  bool data_dir_set = false;
  cfg.workdir = base_dir / "run";

  if (auto* t = subtable(root, "run", "[run]")) {
    check_keys(*t, "[run]", {"workdir", "seed", "parallelism", "prompts_dir"});
    if (auto v = get<std::string>(*t, "workdir", "[run]")) cfg.workdir = resolve(base_dir, *v);
    cfg.seed = non_negative<std::uint64_t>(get<std::int64_t>(*t, "seed", "[run]"), cfg.seed,
                                           "[run]", "seed");
    if (auto v = get<std::int64_t>(*t, "parallelism", "[run]")) {
      if (*v < 1) fail("[run]", "parallelism must be >= 1");
      cfg.parallelism = static_cast<std::size_t>(*v);
    }
    if (auto v = get<std::string>(*t, "prompts_dir", "[run]")) {
      cfg.prompts_dir = resolve(base_dir, *v);
    }
  }

  if (auto* t = subtable(root, "corpus", "[corpus]")) {
    check_keys(*t, "[corpus]", {"input", "ratios", "token_budget"});
    if (auto v = get<std::string>(*t, "input", "[corpus]")) cfg.corpus_input = resolve(base_dir, *v);
    if (const toml::node* n = t->get("ratios")) {
      const toml::array* arr = n->as_array();
      if (arr == nullptr || arr->size() != 3) fail("[corpus]", "ratios must be [train, validation, test]");
      double r[3];
      for (std::size_t i = 0; i < 3; ++i) {
        auto v = (*arr)[i].value<double>();
        if (!v) fail("[corpus]", "ratios must be numbers");
        r[i] = *v;
      }
      cfg.ratios = {r[0], r[1], r[2]};
    }
    if (auto v = get<std::int64_t>(*t, "token_budget", "[corpus]")) {
      if (*v < 1) fail("[corpus]", "token_budget must be >= 1");
      cfg.token_budget = static_cast<std::size_t>(*v);
    }
  }
  cfg.ratios.validate();

  if (auto* t = subtable(root, "endpoints", "[endpoints]")) {
    check_keys(*t, "[endpoints]",
               {roles::kJudge, roles::kOracle, roles::kSft, roles::kResearcher, roles::kEmbed});
    for (const auto& [key, node] : *t) {
      const std::string role(key.str());
      const std::string where = "[endpoints." + role + "]";
      if (!node.is_table()) fail(where, "must be a table");
      const auto& et = *node.as_table();
      check_keys(et, where,
                 {"base_url", "api_key", "api_key_env", "model", "temperature", "max_reply_tokens",
                  "timeout_s", "max_retries", "backoff_base_ms", "backoff_factor",
                  "backoff_jitter", "max_inflight", "embedding_dimension"});
      apply_endpoint(et, cfg.endpoints[role], where, env);
    }
  }

  if (auto* t = subtable(root, "synthesis", "[synthesis]")) {
    check_keys(*t, "[synthesis]", {"split", "regenerations"});
    if (auto v = get<std::string>(*t, "split", "[synthesis]")) {
      cfg.synthesis_split = split_value(*v, "[synthesis]");
    }
    cfg.regenerations = non_negative<int>(get<std::int64_t>(*t, "regenerations", "[synthesis]"),
                                          cfg.regenerations, "[synthesis]", "regenerations");
  }

  if (auto* t = subtable(root, "preferences", "[preferences]")) {
    check_keys(*t, "[preferences]", {"samples"});
    if (auto v = get<std::int64_t>(*t, "samples", "[preferences]")) {
      if (*v < 1) fail("[preferences]", "samples must be >= 1");
      cfg.preference_samples = static_cast<std::size_t>(*v);
    }
  }

  if (auto* t = subtable(root, "simulate", "[simulate]")) {
    check_keys(*t, "[simulate]", {"rounds", "documents", "split"});
    if (auto v = get<std::int64_t>(*t, "rounds", "[simulate]")) {
      if (*v < 1) fail("[simulate]", "rounds must be >= 1");
      cfg.rounds = static_cast<int>(*v);
    }
    if (auto v = get<std::int64_t>(*t, "documents", "[simulate]")) {
      if (*v < 1) fail("[simulate]", "documents must be >= 1");
      cfg.simulate_documents = static_cast<std::size_t>(*v);
    }
    if (auto v = get<std::string>(*t, "split", "[simulate]")) {
      cfg.simulate_split = split_value(*v, "[simulate]");
    }
  }

  if (const toml::node* n = root.get("systems")) {
    const toml::array* arr = n->as_array();
    if (arr == nullptr) fail("[[systems]]", "must be an array of tables");
    std::set<std::string> names;
    for (const auto& item : *arr) {
      const toml::table* st = item.as_table();
      if (st == nullptr) fail("[[systems]]", "must be an array of tables");
      check_keys(*st, "[[systems]]", kEndpointKeys);
      SystemConfig sys;
      sys.name = get<std::string>(*st, "name", "[[systems]]").value_or("");
      if (sys.name.empty()) fail("[[systems]]", "every system needs a name");
      const std::string where = "[[systems]] " + sys.name;
      if (!names.insert(sys.name).second) fail(where, "duplicate system name");
      if (auto ref = get<std::string>(*st, "endpoint", where)) {
        auto it = cfg.endpoints.find(*ref);
        if (it == cfg.endpoints.end()) fail(where, "unknown endpoint '" + *ref + "'");
        sys.endpoint = it->second;
      } else {
        sys.endpoint.base_url = env("JF_CHAT_BASE_URL").value_or("");
        sys.endpoint.api_key = env("JF_CHAT_API_KEY").value_or("");
      }
      apply_endpoint(*st, sys.endpoint, where, env);
      if (auto v = get<std::string>(*st, "variant", where)) {
        auto variant = simulator::parse_variant(*v);
        if (!variant) fail(where, "variant must be simple, advanced or finetuned");
        sys.variant = *variant;
      }
      cfg.systems.push_back(std::move(sys));
    }
  }

  if (auto* t = subtable(root, "evaluate", "[evaluate]")) {
    check_keys(*t, "[evaluate]",
               {"match_threshold", "redundancy", "averaging", "summaries", "interactions"});
    if (auto v = get<double>(*t, "match_threshold", "[evaluate]")) {
      if (*v < 0 || *v > 1) fail("[evaluate]", "match_threshold must be in [0, 1]");
      cfg.scoring.match_threshold = *v;
    }
    if (auto v = get<std::string>(*t, "redundancy", "[evaluate]")) {
      auto m = metrics::parse_redundancy_mode(*v);
      if (!m) fail("[evaluate]", "redundancy must be max or mean");
      cfg.scoring.redundancy = *m;
    }
    if (auto v = get<std::string>(*t, "averaging", "[evaluate]")) {
      auto a = metrics::parse_averaging(*v);
      if (!a) fail("[evaluate]", "averaging must be macro or micro");
      cfg.averaging = *a;
    }
    if (auto v = get<std::string>(*t, "summaries", "[evaluate]")) cfg.summaries = resolve(base_dir, *v);
    if (auto v = get<std::string>(*t, "interactions", "[evaluate]")) {
      cfg.interactions = resolve(base_dir, *v);
    }
  }

  if (auto* t = subtable(root, "serve", "[serve]")) {
    check_keys(*t, "[serve]", {"host", "port", "data_dir", "static_dir", "idle_timeout_minutes"});
    if (auto v = get<std::string>(*t, "host", "[serve]")) cfg.serve.host = *v;
    if (auto v = get<std::int64_t>(*t, "port", "[serve]")) {
      if (*v < 0 || *v > 65535) fail("[serve]", "port out of range");
      cfg.serve.port = static_cast<int>(*v);
    }
    if (auto v = get<std::string>(*t, "data_dir", "[serve]")) {
      cfg.serve.data_dir = resolve(base_dir, *v);
      data_dir_set = true;
    }
    if (auto v = get<std::string>(*t, "static_dir", "[serve]")) {
      cfg.serve.static_dir = resolve(base_dir, *v);
    }
    if (auto v = get<double>(*t, "idle_timeout_minutes", "[serve]")) {
      if (*v < 0) fail("[serve]", "idle_timeout_minutes must be >= 0");
      cfg.serve.idle_timeout_minutes = *v;
    }
  }
  if (!data_dir_set) cfg.serve.data_dir = cfg.workdir / "sessions";

  if (auto* t = subtable(root, "training", "[training]")) {
    check_keys(*t, "[training]", {"sft", "dpo", "lora"});
    if (auto* s = subtable(*t, "sft", "[training.sft]")) {
      check_keys(*s, "[training.sft]", {"epochs", "learning_rate", "batch_size"});
      if (auto v = get<std::int64_t>(*s, "epochs", "[training.sft]")) cfg.training.sft_epochs = static_cast<int>(*v);
      if (auto v = get<double>(*s, "learning_rate", "[training.sft]")) cfg.training.sft_learning_rate = *v;
      if (auto v = get<std::int64_t>(*s, "batch_size", "[training.sft]")) cfg.training.sft_batch_size = static_cast<int>(*v);
    }
    if (auto* d = subtable(*t, "dpo", "[training.dpo]")) {
      check_keys(*d, "[training.dpo]", {"epochs", "learning_rate", "batch_size"});
      if (auto v = get<std::int64_t>(*d, "epochs", "[training.dpo]")) cfg.training.dpo_epochs = static_cast<int>(*v);
      if (auto v = get<double>(*d, "learning_rate", "[training.dpo]")) cfg.training.dpo_learning_rate = *v;
      if (auto v = get<std::int64_t>(*d, "batch_size", "[training.dpo]")) cfg.training.dpo_batch_size = static_cast<int>(*v);
    }
    if (auto* l = subtable(*t, "lora", "[training.lora]")) {
      check_keys(*l, "[training.lora]", {"rank", "alpha", "dropout"});
      if (auto v = get<std::int64_t>(*l, "rank", "[training.lora]")) cfg.training.lora.rank = static_cast<int>(*v);
      if (auto v = get<std::int64_t>(*l, "alpha", "[training.lora]")) cfg.training.lora.alpha = static_cast<int>(*v);
      if (auto v = get<double>(*l, "dropout", "[training.lora]")) cfg.training.lora.dropout = *v;
    }
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.has_parent_path() ? path.parent_path() : fs::path("."), env);
}

}  // namespace jf::pipeline
