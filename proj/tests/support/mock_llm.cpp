#include "mock_llm.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "jf/common/text.hpp"

namespace jf::testing {

using nlohmann::json;

namespace {

bool has(const std::string& s, std::string_view needle) {
  return s.find(needle) != std::string::npos;
}

std::string after(const std::string& s, std::string_view marker) {
  const auto pos = s.find(marker);
  return pos == std::string::npos ? std::string{} : s.substr(pos + marker.size());
}

std::vector<std::string> journalist_lines(const std::string& conversation) {
  std::vector<std::string> out;
  std::istringstream in(conversation);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("Journalist: ", 0) == 0) out.push_back(line.substr(12));
  }
  return out;
}

std::string rubric_reply(const std::string& prompt) {
  const bool low = has(after(prompt, "[PRESS RELEASE]:"), "LOWQ");
  int score;
  if (has(prompt, "Societal impact refers")) {
    score = low ? 1 : 3;
  } else if (has(prompt, "Scientific context puts")) {
    score = low ? 1 : 2;
  } else {
    score = low ? 2 : 4;
  }
  return "<think>Weighing the rubric anchors {carefully}.</think>\n{\"reasons\": \"mock rating\", "
         "\"score\": \"" +
         std::to_string(score) + "\"}";
}

std::string assess_reply(const std::string& prompt) {
  const auto answer = after(prompt, "[TEXT]:");
  if (has(answer, "vague")) return R"({"is_vague": true, "technical_concepts": []})";
  if (has(answer, "spectrometer")) {
    return R"(Reasoning first. {"is_vague": false, "technical_concepts": ["aerosol spectrometer TSI 3321"]})";
  }
  return R"({"is_vague": false, "technical_concepts": []})";
}

std::string extraction_reply(const std::string& prompt) {
  const auto questions = journalist_lines(after(prompt, "[CONVERSATION]:"));
  json picked = json::array();
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const bool take = has(prompt, "societal impact of\nthe research")
                          ? i % 2 == 0
                          : has(prompt, "scientific context of\nthe research") ? i % 3 == 0
                                                                               : i == questions.size() - 1;
    if (take) picked.push_back(questions[i]);
  }
  if (has(prompt, "societal impact of\nthe research")) picked.push_back("What about ethics?");
  return json{{"high_quality_questions", picked}}.dump();
}

std::string synthesis_reply() {
  return "Here is the conversation.\n"
         "**Journalist:** What problem does your study address?\n"
         "**Researcher:** We measured how masks filter particles in everyday settings.\n"
         "Journalist: How did you measure that?\n"
         "Researcher: We used an aerosol spectrometer TSI 3321 in a sealed room.\n"
         "Journalist: What does this mean for people at home?\n"
         "Researcher: It worked, more or less, in a vague way.\n";
}

std::string preference_reply(const std::string& prompt) {
  if (has(prompt, "generic question")) return "What was the overall goal of the research?";
  if (has(prompt, "The answer was vague")) return "Could you explain exactly what you found?";
  if (has(prompt, "complex aspects")) return "What is an aerosol spectrometer, in plain words?";
  return "How could these findings change daily life for the public?";
}

}  // namespace

std::string mock_reply(const std::vector<llm::ChatMessage>& messages) {
  const std::string system =
      !messages.empty() && messages.front().role == llm::Role::kSystem ? messages.front().content : "";
  const std::string last = messages.empty() ? "" : messages.back().content;

  if (has(last, "[PRESS RELEASE]:")) return rubric_reply(last);
  if (has(last, "[TEXT]:")) return assess_reply(last);
  if (has(last, "[CONVERSATION]:")) return extraction_reply(last);
  if (has(last, "[SCIENTIFIC-PAPER]:")) return synthesis_reply();
  if (has(last, "[CONVERSATION HISTORY]:")) return preference_reply(last);

  std::size_t own_turns = 0;
  for (const auto& m : messages) own_turns += m.role == llm::Role::kAssistant ? 1 : 0;
  const auto n = std::to_string(own_turns + 1);
  if (has(system, "You are the author")) {
    return "Answer " + n + ": the study found a measurable effect on particle filtering.";
  }
  return "Question " + n + ": how does your research on topic " + n + " help society?";
}

llm::EmbeddingVector mock_embedding(const std::string& text, std::size_t dim) {
  llm::EmbeddingVector v{std::vector<double>(dim, 0.0)};
  for (const auto& tok : text::word_tokens(text)) v.values[text::fnv1a64(tok, 7) % dim] += 1.0;
  return v;
}

MockLlmServer::MockLlmServer() : server_(std::make_unique<httplib::Server>()) {
  server_->Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    ++chat_requests_;
    if (failing_) {
      res.status = 500;
      res.set_content(R"({"error":"injected failure"})", "application/json");
      return;
    }
    const auto body = json::parse(req.body);
    std::vector<llm::ChatMessage> messages;
    for (const auto& m : body.at("messages")) {
      const auto role = m.at("role").get<std::string>();
      messages.push_back({role == "system"    ? llm::Role::kSystem
                          : role == "assistant" ? llm::Role::kAssistant
                                                : llm::Role::kUser,
                          m.at("content").get<std::string>()});
    }
    json out = {{"id", "mock"},
                {"model", body.value("model", "mock")},
                {"choices",
                 {{{"index", 0},
                   {"message", {{"role", "assistant"}, {"content", mock_reply(messages)}}},
                   {"finish_reason", "stop"}}}}};
    res.set_content(out.dump(), "application/json");
  });
  server_->Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
    ++embedding_requests_;
    const auto body = json::parse(req.body);
    json data = json::array();
    std::size_t i = 0;
    for (const auto& text : body.at("input")) {
      data.push_back({{"index", i++}, {"embedding", mock_embedding(text.get<std::string>()).values}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockLlmServer::~MockLlmServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockLlmServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
}

}  // namespace jf::testing
