#include "jf/llm/gateway.hpp"

#include <cmath>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"

namespace jf::llm {

using nlohmann::json;

class Gateway::Limiter {
 public:
  explicit Limiter(std::size_t limit) : limit_(limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t in_flight_ = 0;
};

namespace {

double unit_random() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::string join_url(const std::string& base, const std::string& path) {
  std::string b = base;
  while (!b.empty() && b.back() == '/') b.pop_back();
  return b + path;
}

bool accept_chat(const json& j) {
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return false;
  const auto& msg = (*choices)[0].value("message", json::object());
  const auto content = msg.find("content");
  return content != msg.end() && content->is_string() &&
         !text::trim(content->get_ref<const std::string&>()).empty();
}

bool accept_embeddings(const json& j) {
  const auto data = j.find("data");
  return data != j.end() && data->is_array();
}

}  // namespace

Gateway::Gateway(std::shared_ptr<Transport> transport) : transport_(std::move(transport)) {}

Gateway::~Gateway() = default;

std::size_t Gateway::attempts() const {
  std::lock_guard lock(stats_mu_);
  return attempts_;
}

Gateway::Limiter* Gateway::limiter_for(const EndpointConfig& cfg) {
  if (cfg.max_inflight == 0) return nullptr;
  std::lock_guard lock(limiters_mu_);
  auto& slot = limiters_[cfg.base_url + "|" + cfg.model_name];
  if (!slot) slot = std::make_unique<Limiter>(cfg.max_inflight);
  return slot.get();
}

json Gateway::post_with_retries(const EndpointConfig& cfg, const std::string& path,
                                const json& body, bool (*accept)(const json&)) {
  cfg.validate();
  const std::string url = join_url(cfg.base_url, path);
  Headers headers{{"Content-Type", "application/json"}};
  if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
  const std::string payload = body.dump();
  Limiter* limiter = limiter_for(cfg);

  std::string last_error;
  const int attempts = cfg.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const auto wait = cfg.backoff.delay(attempt - 1, unit_random());
      spdlog::debug("retrying {} in {} ms ({})", url, wait.count(), last_error);
      std::this_thread::sleep_for(wait);
    }
    {
      std::lock_guard lock(stats_mu_);
      ++attempts_;
    }
    HttpResponse res;
    try {
      if (limiter) limiter->acquire();
      res = transport_->post_json(url, payload, headers, cfg.timeout);
      if (limiter) limiter->release();
    } catch (const TransportError& e) {
      if (limiter) limiter->release();
      last_error = e.what();
      continue;
    } catch (...) {
      if (limiter) limiter->release();
      throw;
    }

    if (res.status == 429 || res.status >= 500) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status >= 400) {
      throw ConfigurationError("HTTP " + std::to_string(res.status) + " from " + url + ": " +
                               res.body.substr(0, 300));
    }
    if (res.status != 200) {
      last_error = "unexpected HTTP " + std::to_string(res.status);
      continue;
    }
    json parsed = json::parse(res.body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      last_error = "response body is not a JSON object";
      continue;
    }
    if (!accept(parsed)) {
      last_error = "empty or incomplete reply";
      continue;
    }
    return parsed;
  }
  throw EndpointUnavailable(url + " unavailable after " + std::to_string(attempts) +
                            " attempt(s): " + last_error);
}

std::string Gateway::complete(const EndpointConfig& cfg, const std::vector<ChatMessage>& messages) {
  validate_messages(messages);
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back(to_json(m));
  const json body = {{"model", cfg.model_name},
                     {"messages", std::move(msgs)},
                     {"temperature", cfg.temperature},
                     {"max_tokens", cfg.max_reply_tokens}};
  const json reply = post_with_retries(cfg, "/chat/completions", body, &accept_chat);
  return reply["choices"][0]["message"]["content"].get<std::string>();
}

std::vector<EmbeddingVector> Gateway::embed(const EndpointConfig& cfg,
                                            const std::vector<std::string>& texts) {
  if (texts.empty()) throw ValidationError("embedding request has no inputs");
  for (const auto& t : texts) {
    if (t.empty()) throw ValidationError("embedding input is empty");
  }
  const json body = {{"model", cfg.model_name}, {"input", texts}};
  const json reply = post_with_retries(cfg, "/embeddings", body, &accept_embeddings);
  const auto& data = reply["data"];
  if (data.size() != texts.size()) {
    throw ProviderError("embedding provider returned " + std::to_string(data.size()) +
                        " vectors for " + std::to_string(texts.size()) + " inputs");
  }

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<bool> filled(texts.size(), false);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& item = data[i];
    const std::size_t slot = item.contains("index") ? item["index"].get<std::size_t>() : i;
    if (slot >= out.size() || filled[slot]) {
      throw ProviderError("embedding provider returned a bad index");
    }
    if (!item.contains("embedding") || !item["embedding"].is_array()) {
      throw ProviderError("embedding item without an 'embedding' array");
    }
    EmbeddingVector v;
    for (const auto& x : item["embedding"]) {
      if (!x.is_number()) throw ProviderError("non-numeric embedding component");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw ProviderError("non-finite embedding component");
      v.values.push_back(d);
    }
    out[slot] = std::move(v);
    filled[slot] = true;
  }

  const std::size_t dim = out.front().dimension();
  for (auto& v : out) {
    if (v.dimension() != dim || dim == 0) {
      throw ProviderError("embedding dimension mismatch within a batch");
    }
    if (cfg.embedding_dimension != 0 && v.dimension() != cfg.embedding_dimension) {
      throw ProviderError("embedding dimension " + std::to_string(v.dimension()) +
                          " differs from configured " + std::to_string(cfg.embedding_dimension));
    }
    normalize(v);
  }
  return out;
}

EndpointChatModel::EndpointChatModel(Gateway& gateway, EndpointConfig cfg)
    : gateway_(gateway), cfg_(std::move(cfg)) {}

std::string EndpointChatModel::complete(const std::vector<ChatMessage>& messages) {
  return gateway_.complete(cfg_, messages);
}

EndpointEmbeddingProvider::EndpointEmbeddingProvider(Gateway& gateway, EndpointConfig cfg)
    : gateway_(gateway), cfg_(std::move(cfg)) {}

std::vector<EmbeddingVector> EndpointEmbeddingProvider::embed(const std::vector<std::string>& texts) {
  return gateway_.embed(cfg_, texts);
}

}  // namespace jf::llm
