#include "jf/common/prompt_library.hpp"

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/jsonl.hpp"
#include "jf/common/text.hpp"

namespace jf {

std::string render_template(std::string_view tmpl, const PromptVars& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const std::string_view name = tmpl.substr(i + 1, close - i - 1);
        if (auto it = vars.find(name); it != vars.end()) {
          out.append(it->second);
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary lib = [] {
    PromptLibrary l;
    for (const auto& [id, body] : embedded_prompts()) {
      l.templates_.emplace(std::string(id), std::string(text::trim(body)));
    }
    return l;
  }();
  return lib;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
  PromptLibrary lib = builtin();
  if (dir.empty()) return lib;
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigurationError("prompts directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    const std::string id = entry.path().stem().string();
    lib.templates_[id] = std::string(text::trim(jsonl::read_text(entry.path())));
    spdlog::info("prompt '{}' overridden from {}", id, entry.path().string());
  }
  return lib;
}

const std::string& PromptLibrary::text(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw ConfigurationError("unknown prompt template: " + std::string(id));
  }
  return it->second;
}

std::string PromptLibrary::render(std::string_view id, const PromptVars& vars) const {
  return render_template(text(id), vars);
}

std::string PromptLibrary::version(std::string_view id) const {
  return text::hex64(text::fnv1a64(text(id)));
}

nlohmann::json PromptLibrary::versions() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [id, body] : templates_) out[id] = text::hex64(text::fnv1a64(body));
  return out;
}

bool PromptLibrary::contains(std::string_view id) const {
  return templates_.find(id) != templates_.end();
}

}  // namespace jf
