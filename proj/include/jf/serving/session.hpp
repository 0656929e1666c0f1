#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/common/prompt_library.hpp"
#include "jf/corpus/document.hpp"
#include "jf/llm/gateway.hpp"
#include "jf/serving/registry.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::serving {

enum class SessionStatus { kActive, kClosed };

std::string_view to_string(SessionStatus s);

struct Session {
  std::string id;
  std::string created_at;  // ISO-8601 UTC
  std::string system_name;
  corpus::PaperContext context;
  synthesis::Transcript transcript;  // source = live, doc_id = id
  SessionStatus status = SessionStatus::kActive;
  std::int64_t last_activity_ms = 0;

  /// The last researcher turn has no journalist reply yet.
  bool pending() const;
};

/// Export document: {doc_id, source, turns, system_name, title, created_at,
/// status, pending, word_counts}. Keys are serialized sorted.
nlohmann::json export_json(const Session& s);

/// Append-only on-disk layout: <dir>/index.jsonl lists sessions in creation
/// order, <dir>/sessions/<id>.log holds one event per line. Each append is
/// fsync'd before returning.
class SessionLog {
 public:
  explicit SessionLog(std::filesystem::path data_dir);

  void append_index(const nlohmann::json& record);
  void append_events(const std::string& session_id, const std::vector<nlohmann::json>& events);

  /// Replays every indexed session. A torn final line is ignored.
  std::vector<Session> load_all() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path log_path(const std::string& id) const;
  std::filesystem::path dir_;
};

struct ServiceOptions {
  std::filesystem::path data_dir = "sessions";
  std::size_t token_budget = 1000;
  std::chrono::milliseconds idle_timeout = std::chrono::minutes(60);
};

using ModelFactory = std::function<std::shared_ptr<llm::ChatModel>(const SystemEntry&)>;
using Clock = std::function<std::chrono::system_clock::time_point()>;

struct CreatedSession {
  std::string session_id;
  std::string question;
};

/// Live practice sessions. Sessions are independent; within one session
/// messages are handled one at a time.
class SessionService {
 public:
  SessionService(SystemRegistry& registry, ModelFactory models, ServiceOptions options,
                 const PromptLibrary& prompts = PromptLibrary::builtin(),
                 Clock clock = [] { return std::chrono::system_clock::now(); });

  std::vector<std::string> systems() const { return registry_.names(); }

  /// Unknown system → NotFound, empty paper → ValidationError, model failure
  /// → ServiceUnavailable with nothing persisted.
  CreatedSession create_session(const std::string& title, const std::string& paper_text,
                                const std::string& system_name);

  /// Records the researcher turn, then asks the system for the next question.
  /// On model failure the turn stays, marked pending, and ServiceUnavailable
  /// is raised; `retry` re-attempts it.
  std::string post_answer(const std::string& session_id, const std::string& text);
  std::string retry(const std::string& session_id);

  void close(const std::string& session_id);

  /// Unknown id → NotFound. Closed sessions can still be exported.
  nlohmann::json export_transcript(const std::string& session_id);
  Session snapshot(const std::string& session_id);

  std::size_t session_count() const;

 private:
  struct Slot {
    std::mutex mu;
    Session session;
  };

  std::shared_ptr<Slot> slot(const std::string& id) const;
  std::int64_t now_ms() const;
  void expire_if_idle(Slot& slot);
  std::string ask_journalist(const Session& s);
  std::string retry_locked(Slot& slot);
  std::string new_id();

  SystemRegistry& registry_;
  ModelFactory models_;
  ServiceOptions options_;
  const PromptLibrary& prompts_;
  Clock clock_;
  SessionLog log_;

  mutable std::mutex map_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::mutex index_mu_;
};

}  // namespace jf::serving
