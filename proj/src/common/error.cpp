#include "jf/common/error.hpp"

namespace jf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEndpointUnavailable: return "EndpointUnavailable";
    case ErrorKind::kConfiguration: return "ConfigurationError";
    case ErrorKind::kParseFailure: return "ParseFailure";
    case ErrorKind::kProvider: return "ProviderError";
    case ErrorKind::kNotFound: return "NotFound";
    case ErrorKind::kValidation: return "ValidationError";
    case ErrorKind::kServiceUnavailable: return "ServiceUnavailable";
    case ErrorKind::kDocumentSkipped: return "DocumentSkipped";
    case ErrorKind::kCorpus: return "CorpusError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Error";
}

}  // namespace jf
