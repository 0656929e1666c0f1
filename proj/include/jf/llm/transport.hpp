#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>

namespace jf::llm {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Connection-level failure: refused, reset, timed out. Always retryable.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Headers = std::multimap<std::string, std::string>;

/// Seam between the gateway's request logic and the wire. Implementations
/// must tolerate concurrent calls.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                 const Headers& headers, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport; one client per request.
class HttpTransport final : public Transport {
 public:
  HttpResponse post_json(const std::string& url, const std::string& body, const Headers& headers,
                         std::chrono::milliseconds timeout) override;
};

}  // namespace jf::llm
