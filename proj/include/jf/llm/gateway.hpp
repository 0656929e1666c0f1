#pragma once

#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/llm/endpoint.hpp"
#include "jf/llm/transport.hpp"

namespace jf::llm {

/// Client for OpenAI-style chat-completion and embedding endpoints. One
/// instance is shared by all pipeline workers; in-flight limits configured on
/// an endpoint apply across every caller of that endpoint.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Transport> transport = std::make_shared<HttpTransport>());
  ~Gateway();

  /// POST <base>/chat/completions. Transport failures, HTTP 429/5xx and empty
  /// replies are retried up to cfg.max_retries times with backoff; then
  /// EndpointUnavailable. Any other 4xx is a ConfigurationError, not retried.
  std::string complete(const EndpointConfig& cfg, const std::vector<ChatMessage>& messages);

  /// POST <base>/embeddings. One unit-normalized vector per input, in input
  /// order. Mixed or unexpected dimensions raise ProviderError.
  std::vector<EmbeddingVector> embed(const EndpointConfig& cfg,
                                     const std::vector<std::string>& texts);

  /// Total HTTP attempts issued so far (all endpoints).
  std::size_t attempts() const;

 private:
  class Limiter;

  nlohmann::json post_with_retries(const EndpointConfig& cfg, const std::string& path,
                                   const nlohmann::json& body,
                                   bool (*accept)(const nlohmann::json&));
  Limiter* limiter_for(const EndpointConfig& cfg);

  std::shared_ptr<Transport> transport_;
  std::mutex limiters_mu_;
  std::map<std::string, std::unique_ptr<Limiter>> limiters_;
  mutable std::mutex stats_mu_;
  std::size_t attempts_ = 0;
};

/// A role-playing or judging model as seen by the pipeline stages.
class ChatModel {
 public:
  virtual ~ChatModel() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

class EndpointChatModel final : public ChatModel {
 public:
  EndpointChatModel(Gateway& gateway, EndpointConfig cfg);
  std::string complete(const std::vector<ChatMessage>& messages) override;
  const EndpointConfig& config() const { return cfg_; }

 private:
  Gateway& gateway_;
  EndpointConfig cfg_;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

class EndpointEmbeddingProvider final : public EmbeddingProvider {
 public:
  EndpointEmbeddingProvider(Gateway& gateway, EndpointConfig cfg);
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  Gateway& gateway_;
  EndpointConfig cfg_;
};

}  // namespace jf::llm
