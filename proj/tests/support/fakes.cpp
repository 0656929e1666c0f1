#include "fakes.hpp"

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "jf/common/error.hpp"

namespace jf::testing {

namespace fs = std::filesystem;

std::string chat_body(const std::string& content) {
  return nlohmann::json{
      {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}}
      .dump();
}

void ScriptedTransport::push(int status, std::string body) {
  std::lock_guard lock(mu_);
  steps_.push_back(llm::HttpResponse{status, std::move(body)});
}

void ScriptedTransport::push_failure() {
  std::lock_guard lock(mu_);
  steps_.push_back(Fail{});
}

void ScriptedTransport::push_reply(const std::string& content) { push(200, chat_body(content)); }

llm::HttpResponse ScriptedTransport::post_json(const std::string& url, const std::string& body,
                                               const llm::Headers& headers,
                                               std::chrono::milliseconds) {
  std::lock_guard lock(mu_);
  requests_.push_back({url, body, headers});
  if (steps_.empty()) return {500, "script exhausted"};
  auto step = std::move(steps_.front());
  steps_.pop_front();
  if (std::holds_alternative<Fail>(step)) throw llm::TransportError("connection refused");
  return std::get<llm::HttpResponse>(step);
}

std::vector<ScriptedTransport::Request> ScriptedTransport::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t ScriptedTransport::remaining() const {
  std::lock_guard lock(mu_);
  return steps_.size();
}

ScriptedChatModel::ScriptedChatModel(std::vector<std::string> replies)
    : replies_(replies.begin(), replies.end()) {}

ScriptedChatModel::ScriptedChatModel(Fn fn) : fn_(std::move(fn)) {}

std::string ScriptedChatModel::complete(const std::vector<llm::ChatMessage>& messages) {
  std::unique_lock lock(mu_);
  calls_.push_back(messages);
  if (!replies_.empty()) {
    auto r = std::move(replies_.front());
    replies_.pop_front();
    return r;
  }
  if (!fn_) throw EndpointUnavailable("scripted model has no reply left");
  auto fn = fn_;
  lock.unlock();
  return fn(messages);
}

std::vector<std::vector<llm::ChatMessage>> ScriptedChatModel::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedChatModel::call_count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

std::string FailingChatModel::complete(const std::vector<llm::ChatMessage>&) {
  throw EndpointUnavailable("endpoint down");
}

std::vector<llm::EmbeddingVector> LengthBasisEmbeddings::embed(
    const std::vector<std::string>& texts) {
  std::vector<llm::EmbeddingVector> out;
  for (const auto& t : texts) {
    llm::EmbeddingVector v{std::vector<double>(dim_, 0.0)};
    v.values[t.size() % dim_] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<llm::EmbeddingVector> TableEmbeddings::embed(const std::vector<std::string>& texts) {
  std::vector<llm::EmbeddingVector> out;
  for (const auto& t : texts) {
    bool found = false;
    for (const auto& [key, vec] : table_) {
      if (key == t) {
        out.push_back(vec);
        found = true;
        break;
      }
    }
    if (!found) throw ProviderError("no stub embedding for '" + t + "'");
  }
  return out;
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("jf-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

llm::EndpointConfig test_endpoint(const std::string& base_url) {
  llm::EndpointConfig cfg;
  cfg.base_url = base_url;
  cfg.model_name = "test-model";
  cfg.backoff.base = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::milliseconds(5000);
  return cfg;
}

}  // namespace jf::testing
