#pragma once

#include <shared_mutex>
#include <string>
#include <vector>

#include "jf/llm/endpoint.hpp"
#include "jf/simulator/simulator.hpp"

namespace jf::serving {

/// A journalist system offered to live users. `name` is the display label
/// and may be a blind alias that hides the underlying model.
struct SystemEntry {
  std::string name;
  llm::EndpointConfig endpoint;
  simulator::PromptVariant variant = simulator::PromptVariant::kSimple;
};

class SystemRegistry {
 public:
  SystemRegistry() = default;
  explicit SystemRegistry(std::vector<SystemEntry> entries);

  /// Duplicate or empty names raise ValidationError.
  void add(SystemEntry entry);
  void replace_all(std::vector<SystemEntry> entries);

  /// Case-sensitive exact lookup; NotFound otherwise.
  SystemEntry at(const std::string& name) const;
  bool contains(const std::string& name) const;

  /// Display names in registration order.
  std::vector<std::string> names() const;

 private:
  static void check_unique(const std::vector<SystemEntry>& entries);

  mutable std::shared_mutex mu_;
  std::vector<SystemEntry> entries_;
};

}  // namespace jf::serving
