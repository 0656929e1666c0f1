#include "jf/serving/registry.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "jf/common/error.hpp"

namespace jf::serving {

SystemRegistry::SystemRegistry(std::vector<SystemEntry> entries) {
  replace_all(std::move(entries));
}

void SystemRegistry::check_unique(const std::vector<SystemEntry>& entries) {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.name.empty()) throw ValidationError("system name must not be empty");
    if (!seen.insert(e.name).second) throw ValidationError("duplicate system name: " + e.name);
  }
}

void SystemRegistry::add(SystemEntry entry) {
  std::unique_lock lock(mu_);
  auto next = entries_;
  next.push_back(std::move(entry));
  check_unique(next);
  entries_ = std::move(next);
}

void SystemRegistry::replace_all(std::vector<SystemEntry> entries) {
  check_unique(entries);
  std::unique_lock lock(mu_);
  entries_ = std::move(entries);
}

SystemEntry SystemRegistry::at(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const SystemEntry& e) { return e.name == name; });
  if (it == entries_.end()) throw NotFound("unknown system: " + name);
  return *it;
}

bool SystemRegistry::contains(const std::string& name) const {
  std::shared_lock lock(mu_);
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const SystemEntry& e) { return e.name == name; });
}

std::vector<std::string> SystemRegistry::names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

}  // namespace jf::serving
