#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "jf/common/error.hpp"
#include "jf/serving/session.hpp"

namespace httplib {
class Server;
}

namespace jf::serving {

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> static_dir;
  std::string cors_origin = "*";
};

/// JSON API over a SessionService:
///   GET  /systems                   → [{name}]
///   POST /sessions                  {title, paper_text, system} → {session_id, question}
///   POST /sessions/{id}/messages    {text} → {question}
///   POST /sessions/{id}/retry       → {question}
///   GET  /sessions/{id}             → export document
///   POST /sessions/{id}/close       → {session_id, status}
/// Errors are {"error": kind, "message": ...} with 400/404/503 status codes.
class HttpServer {
 public:
  HttpServer(SessionService& service, HttpOptions options);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and blocks until stop(). Port 0 picks a free port.
  void run();
  /// Binds without serving yet; returns the bound port.
  int bind();
  void listen_after_bind();
  void stop();
  bool running() const;

 private:
  void install_routes();

  SessionService& service_;
  HttpOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

/// HTTP status for an error kind.
int status_for(ErrorKind kind);

}  // namespace jf::serving
