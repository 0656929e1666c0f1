#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace jf::llm {

/// Exponential backoff between attempts: base * factor^attempt, scaled by a
/// uniform jitter in [1 - jitter, 1 + jitter].
struct BackoffPolicy {
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  double jitter = 0.2;

  std::chrono::milliseconds delay(int attempt, double unit_random) const;
};

inline constexpr double kJudgeTemperature = 0.0;
inline constexpr double kGenerationTemperature = 0.7;

struct EndpointConfig {
  std::string base_url;
  std::string api_key;  // may be empty for local servers
  std::string model_name;
  double temperature = kGenerationTemperature;
  int max_reply_tokens = 1024;
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 3;
  BackoffPolicy backoff;
  // Requests allowed in flight against this endpoint across all callers;
  // 0 leaves it to the batch executor.
  std::size_t max_inflight = 0;
  // Expected embedding width; 0 accepts whatever the provider returns.
  std::size_t embedding_dimension = 0;

  /// Throws ConfigurationError for a malformed base URL or negative retries.
  void validate() const;

  /// Never includes the API key.
  nlohmann::json describe() const;
};

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
};

nlohmann::json to_json(const ChatMessage& m);

/// Non-empty contents; at most one system message, and only in front.
void validate_messages(const std::vector<ChatMessage>& messages);

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
};

/// Scales to unit L2 norm; a zero vector is left as is.
void normalize(EmbeddingVector& v);
double l2_norm(const EmbeddingVector& v);

/// Cosine similarity; 0 when either vector is zero.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace jf::llm
