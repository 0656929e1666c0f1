#include "jf/serving/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <random>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/jsonl.hpp"
#include "jf/common/text.hpp"
#include "jf/corpus/tokens.hpp"
#include "jf/simulator/simulator.hpp"

namespace jf::serving {

using nlohmann::json;
using synthesis::Speaker;
using synthesis::Turn;

namespace fs = std::filesystem;

std::string_view to_string(SessionStatus s) {
  return s == SessionStatus::kActive ? "active" : "closed";
}

bool Session::pending() const {
  return !transcript.turns.empty() && transcript.turns.back().role == Speaker::kResearcher;
}

json export_json(const Session& s) {
  std::size_t journalist_words = 0;
  std::size_t researcher_words = 0;
  for (const auto& t : s.transcript.turns) {
    (t.role == Speaker::kJournalist ? journalist_words : researcher_words) +=
        text::count_words(t.text);
  }
  json out = synthesis::to_json(s.transcript);
  out["system_name"] = s.system_name;
  out["title"] = s.context.title;
  out["created_at"] = s.created_at;
  out["status"] = to_string(s.status);
  out["pending"] = s.pending();
  out["word_counts"] = {{"journalist", journalist_words},
                        {"researcher", researcher_words},
                        {"total", journalist_words + researcher_words}};
  return out;
}

namespace {

void append_fsync(const fs::path& path, const std::string& data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw IoError("write to " + path.string() + " failed: " + std::strerror(err));
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError("fsync of " + path.string() + " failed: " + std::strerror(err));
  }
  ::close(fd);
}

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json turn_event(const Turn& t, std::int64_t at) {
  return {{"event", "turn"}, {"role", synthesis::to_string(t.role)}, {"text", t.text}, {"at", at}};
}

// Applies one log event; returns false for an event that does not fit.
bool apply(Session& s, const json& ev) {
  const auto kind = ev.at("event").get<std::string>();
  if (ev.contains("at")) s.last_activity_ms = ev.at("at").get<std::int64_t>();
  if (kind == "created") {
    s.id = ev.at("session_id").get<std::string>();
    s.created_at = ev.at("created_at").get<std::string>();
    s.system_name = ev.at("system_name").get<std::string>();
    s.context = corpus::paper_context_from_json(ev.at("context"));
    s.transcript.doc_id = s.id;
    s.transcript.source = synthesis::Source::kLive;
    return true;
  }
  if (kind == "turn") {
    auto role = synthesis::parse_speaker(ev.at("role").get<std::string>());
    if (!role) return false;
    const bool expect_journalist =
        s.transcript.turns.empty() || s.transcript.turns.back().role == Speaker::kResearcher;
    if ((*role == Speaker::kJournalist) != expect_journalist) return false;
    s.transcript.turns.push_back({*role, ev.at("text").get<std::string>()});
    return true;
  }
  if (kind == "closed") {
    s.status = SessionStatus::kClosed;
    return true;
  }
  return kind == "pending";
}

}  // namespace

SessionLog::SessionLog(fs::path data_dir) : dir_(std::move(data_dir)) {
  fs::create_directories(dir_ / "sessions");
}

fs::path SessionLog::log_path(const std::string& id) const {
  return dir_ / "sessions" / (id + ".log");
}

void SessionLog::append_index(const json& record) {
  append_fsync(dir_ / "index.jsonl", record.dump() + "\n");
}

void SessionLog::append_events(const std::string& session_id, const std::vector<json>& events) {
  std::string data;
  for (const auto& e : events) data += e.dump() + "\n";
  append_fsync(log_path(session_id), data);
}

std::vector<Session> SessionLog::load_all() const {
  std::vector<Session> out;
  const auto index = dir_ / "index.jsonl";
  if (!fs::exists(index)) return out;
  jsonl::for_each(index, [&](const json& rec, std::size_t) {
    const auto id = rec.value("session_id", std::string{});
    if (id.empty()) return;
    const auto path = log_path(id);
    if (!fs::exists(path)) {
      spdlog::warn("session {} is indexed but has no log; skipped", id);
      return;
    }
    Session s;
    bool created = false;
    jsonl::for_each(path, [&](const json& ev, std::size_t line) {
      try {
        if (!apply(s, ev)) {
          spdlog::warn("{}:{}: event out of order, ignored", path.string(), line);
        } else if (ev.at("event") == "created") {
          created = true;
        }
      } catch (const std::exception& e) {
        spdlog::warn("{}:{}: bad event ({}), ignored", path.string(), line, e.what());
      }
    });
    if (!created || s.transcript.turns.empty()) {
      spdlog::warn("session {} log is incomplete; skipped", id);
      return;
    }
    out.push_back(std::move(s));
  });
  return out;
}

SessionService::SessionService(SystemRegistry& registry, ModelFactory models,
                               ServiceOptions options, const PromptLibrary& prompts, Clock clock)
    : registry_(registry),
      models_(std::move(models)),
      options_(std::move(options)),
      prompts_(prompts),
      clock_(std::move(clock)),
      log_(options_.data_dir) {
  for (auto& s : log_.load_all()) {
    auto slot = std::make_shared<Slot>();
    const auto id = s.id;
    slot->session = std::move(s);
    sessions_[id] = std::move(slot);
  }
  spdlog::info("loaded {} session(s) from {}", sessions_.size(), log_.dir().string());
}

std::int64_t SessionService::now_ms() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(clock_().time_since_epoch())
      .count();
}

std::string SessionService::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  for (;;) {
    auto id = text::hex64(rng());
    std::lock_guard lock(map_mu_);
    if (!sessions_.count(id)) return id;
  }
}

std::shared_ptr<SessionService::Slot> SessionService::slot(const std::string& id) const {
  std::lock_guard lock(map_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session: " + id);
  return it->second;
}

void SessionService::expire_if_idle(Slot& slot) {
  auto& s = slot.session;
  if (s.status != SessionStatus::kActive || options_.idle_timeout.count() <= 0) return;
  const auto now = now_ms();
  if (now - s.last_activity_ms <= options_.idle_timeout.count()) return;
  log_.append_events(s.id, {{{"event", "closed"}, {"reason", "idle"}, {"at", now}}});
  s.status = SessionStatus::kClosed;
  s.last_activity_ms = now;
  spdlog::info("session {} closed after idling", s.id);
}

std::string SessionService::ask_journalist(const Session& s) {
  const auto entry = registry_.at(s.system_name);
  try {
    auto model = models_(entry);
    return simulator::next_question(*model, entry.variant, s.context, s.transcript.turns,
                                    prompts_);
  } catch (const std::exception& e) {
    throw ServiceUnavailable("system " + s.system_name + " failed: " + e.what());
  }
}

CreatedSession SessionService::create_session(const std::string& title,
                                              const std::string& paper_text,
                                              const std::string& system_name) {
  if (text::trim(paper_text).empty()) throw ValidationError("paper_text must not be empty");
  registry_.at(system_name);

  Session s;
  s.id = new_id();
  const auto now = clock_();
  s.created_at = iso_utc(now);
  s.system_name = system_name;
  s.context = corpus::make_context(title, paper_text, options_.token_budget);
  s.transcript.doc_id = s.id;
  s.transcript.source = synthesis::Source::kLive;

  const auto question = ask_journalist(s);
  const auto at = now_ms();
  s.transcript.turns.push_back({Speaker::kJournalist, question});
  s.last_activity_ms = at;

  log_.append_events(s.id, {{{"event", "created"},
                             {"session_id", s.id},
                             {"created_at", s.created_at},
                             {"system_name", s.system_name},
                             {"context", corpus::to_json(s.context)},
                             {"at", at}},
                            turn_event(s.transcript.turns.back(), at)});
  {
    std::lock_guard lock(index_mu_);
    log_.append_index({{"session_id", s.id}, {"created_at", s.created_at}});
  }
  auto slot = std::make_shared<Slot>();
  slot->session = std::move(s);
  const auto id = slot->session.id;
  {
    std::lock_guard lock(map_mu_);
    sessions_[id] = std::move(slot);
  }
  spdlog::info("session {} created with system {}", id, system_name);
  return {id, question};
}

std::string SessionService::post_answer(const std::string& session_id, const std::string& text) {
  if (text::trim(text).empty()) throw ValidationError("answer text must not be empty");
  auto sl = slot(session_id);
  std::lock_guard lock(sl->mu);
  expire_if_idle(*sl);
  auto& s = sl->session;
  if (s.status == SessionStatus::kClosed) throw NotFound("session " + session_id + " is closed");
  if (s.pending()) {
    throw ValidationError("session " + session_id + " has an unanswered turn; retry it first");
  }
  const Turn turn{Speaker::kResearcher, std::string(text::trim(text))};
  const auto at = now_ms();
  log_.append_events(s.id, {turn_event(turn, at)});
  s.transcript.turns.push_back(turn);
  s.last_activity_ms = at;
  return retry_locked(*sl);
}

std::string SessionService::retry(const std::string& session_id) {
  auto sl = slot(session_id);
  std::lock_guard lock(sl->mu);
  expire_if_idle(*sl);
  auto& s = sl->session;
  if (s.status == SessionStatus::kClosed) throw NotFound("session " + session_id + " is closed");
  if (!s.pending()) throw ValidationError("session " + session_id + " has nothing to retry");
  return retry_locked(*sl);
}

std::string SessionService::retry_locked(Slot& sl) {
  auto& s = sl.session;
  std::string question;
  try {
    question = ask_journalist(s);
  } catch (const ServiceUnavailable& e) {
    log_.append_events(s.id, {{{"event", "pending"}, {"reason", e.what()}, {"at", now_ms()}}});
    throw;
  }
  const Turn reply{Speaker::kJournalist, question};
  const auto at = now_ms();
  log_.append_events(s.id, {turn_event(reply, at)});
  s.transcript.turns.push_back(reply);
  s.last_activity_ms = at;
  return question;
}

void SessionService::close(const std::string& session_id) {
  auto sl = slot(session_id);
  std::lock_guard lock(sl->mu);
  expire_if_idle(*sl);
  auto& s = sl->session;
  if (s.status == SessionStatus::kClosed) throw NotFound("session " + session_id + " is closed");
  const auto at = now_ms();
  log_.append_events(s.id, {{{"event", "closed"}, {"reason", "user"}, {"at", at}}});
  s.status = SessionStatus::kClosed;
  s.last_activity_ms = at;
}

Session SessionService::snapshot(const std::string& session_id) {
  auto sl = slot(session_id);
  std::lock_guard lock(sl->mu);
  expire_if_idle(*sl);
  return sl->session;
}

json SessionService::export_transcript(const std::string& session_id) {
  return export_json(snapshot(session_id));
}

std::size_t SessionService::session_count() const {
  std::lock_guard lock(map_mu_);
  return sessions_.size();
}

}  // namespace jf::serving
