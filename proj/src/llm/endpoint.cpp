#include "jf/llm/endpoint.hpp"

#include <cmath>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"

namespace jf::llm {

std::chrono::milliseconds BackoffPolicy::delay(int attempt, double unit_random) const {
  const double scale = 1.0 + jitter * (2.0 * unit_random - 1.0);
  const double ms = static_cast<double>(base.count()) * std::pow(factor, attempt) * scale;
  return std::chrono::milliseconds(static_cast<long long>(std::max(0.0, ms)));
}

void EndpointConfig::validate() const {
  const bool http = base_url.rfind("http://", 0) == 0;
  const bool https = base_url.rfind("https://", 0) == 0;
  if (!http && !https) {
    throw ConfigurationError("base_url must start with http:// or https://: '" + base_url + "'");
  }
  const std::string rest = base_url.substr(http ? 7 : 8);
  if (rest.empty() || rest.front() == '/' || rest.front() == ':') {
    throw ConfigurationError("base_url has no host: '" + base_url + "'");
  }
  if (max_retries < 0) throw ConfigurationError("max_retries must be >= 0");
  if (temperature < 0) throw ConfigurationError("temperature must be >= 0");
  if (max_reply_tokens <= 0) throw ConfigurationError("max_reply_tokens must be positive");
}

nlohmann::json EndpointConfig::describe() const {
  return {{"base_url", base_url},
          {"model", model_name},
          {"temperature", temperature},
          {"max_reply_tokens", max_reply_tokens},
          {"timeout_ms", timeout.count()},
          {"max_retries", max_retries}};
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

nlohmann::json to_json(const ChatMessage& m) {
  return {{"role", to_string(m.role)}, {"content", m.content}};
}

void validate_messages(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw ValidationError("chat request has no messages");
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (text::trim(messages[i].content).empty()) {
      throw ValidationError("chat message " + std::to_string(i) + " is empty");
    }
    if (messages[i].role == Role::kSystem && i != 0) {
      throw ValidationError("system message must come first and appear once");
    }
  }
}

double l2_norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

void normalize(EmbeddingVector& v) {
  const double n = l2_norm(v);
  if (n == 0.0) return;
  for (double& x : v.values) x /= n;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ProviderError("cosine of vectors with different dimensions");
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return dot / (na * nb);
}

}  // namespace jf::llm
