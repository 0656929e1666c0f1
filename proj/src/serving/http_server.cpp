#include "jf/serving/http_server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"

namespace jf::serving {

using nlohmann::json;

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNotFound:
      return 404;
    case ErrorKind::kValidation:
      return 400;
    case ErrorKind::kServiceUnavailable:
    case ErrorKind::kEndpointUnavailable:
      return 503;
    default:
      return 500;
  }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  send_json(res, {{"error", to_string(kind)}, {"message", message}}, status_for(kind));
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw ValidationError("request body must be a JSON object");
  }
  return body;
}

std::string required_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw ValidationError(std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      if (status_for(e.kind()) >= 500) spdlog::warn("{} {}: {}", req.method, req.path, e.what());
      send_error(res, e.kind(), e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, {{"error", "InternalError"}, {"message", e.what()}}, 500);
    }
  };
}

}  // namespace

HttpServer::HttpServer(SessionService& service, HttpOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto& srv = *server_;
  const auto origin = options_.cors_origin;

  srv.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    }
  });
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}});
  });

  srv.Get("/systems", guarded([this](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& name : service_.systems()) out.push_back({{"name", name}});
            send_json(res, out);
          }));

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const auto created =
                 service_.create_session(body.value("title", std::string{}),
                                         required_string(body, "paper_text"),
                                         required_string(body, "system"));
             send_json(res, {{"session_id", created.session_id}, {"question", created.question}},
                       201);
           }));

  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/messages)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const auto q = service_.post_answer(req.matches[1], required_string(body, "text"));
             send_json(res, {{"question", q}});
           }));

  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/retry)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, {{"question", service_.retry(req.matches[1])}});
           }));

  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/close)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             service_.close(id);
             send_json(res, {{"session_id", id}, {"status", "closed"}});
           }));

  srv.Get(R"(/sessions/([0-9A-Za-z_-]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, service_.export_transcript(req.matches[1]));
          }));

  if (options_.static_dir) {
    if (!srv.set_mount_point("/", options_.static_dir->string())) {
      throw ConfigurationError("static directory not found: " + options_.static_dir->string());
    }
  }
}

int HttpServer::bind() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.host);
  } else if (!server_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw ConfigurationError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  return port;
}

void HttpServer::listen_after_bind() { server_->listen_after_bind(); }

void HttpServer::run() {
  const int port = bind();
  spdlog::info("serving on http://{}:{}", options_.host, port);
  listen_after_bind();
}

void HttpServer::stop() {
  if (server_) server_->stop();
}

bool HttpServer::running() const { return server_ && server_->is_running(); }

}  // namespace jf::serving
