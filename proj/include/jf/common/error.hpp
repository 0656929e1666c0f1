#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jf {

/// Failure categories surfaced across module boundaries. The CLI prints the
/// kind in its machine-readable error line and the HTTP layer maps it onto a
/// status code.
enum class ErrorKind {
  kEndpointUnavailable,
  kConfiguration,
  kParseFailure,
  kProvider,
  kNotFound,
  kValidation,
  kServiceUnavailable,
  kDocumentSkipped,
  kCorpus,
  kIo,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class EndpointUnavailable : public Error {
 public:
  explicit EndpointUnavailable(const std::string& message)
      : Error(ErrorKind::kEndpointUnavailable, message) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& message)
      : Error(ErrorKind::kConfiguration, message) {}
};

// Carries the raw model reply so callers can log what could not be parsed.
class ParseFailure : public Error {
 public:
  ParseFailure(const std::string& message, std::string raw)
      : Error(ErrorKind::kParseFailure, message), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& message)
      : Error(ErrorKind::kProvider, message) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message)
      : Error(ErrorKind::kNotFound, message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

class ServiceUnavailable : public Error {
 public:
  explicit ServiceUnavailable(const std::string& message)
      : Error(ErrorKind::kServiceUnavailable, message) {}
};

class DocumentSkipped : public Error {
 public:
  explicit DocumentSkipped(const std::string& message)
      : Error(ErrorKind::kDocumentSkipped, message) {}
};

class CorpusError : public Error {
 public:
  explicit CorpusError(const std::string& message)
      : Error(ErrorKind::kCorpus, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

}  // namespace jf
