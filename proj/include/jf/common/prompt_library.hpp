#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace jf {

namespace prompt_ids {
inline constexpr std::string_view kConversationSynthesis = "conversation_synthesis";
inline constexpr std::string_view kJournalistSimple = "journalist_simple";
inline constexpr std::string_view kJournalistAdvanced = "journalist_advanced";
inline constexpr std::string_view kResearcher = "researcher";
inline constexpr std::string_view kAnswerAssess = "answer_assess";
inline constexpr std::string_view kPrefClarifyVague = "pref_clarify_vague";
inline constexpr std::string_view kPrefClarifyTechnical = "pref_clarify_technical";
inline constexpr std::string_view kPrefSocietal = "pref_societal";
inline constexpr std::string_view kPrefGeneral = "pref_general";
inline constexpr std::string_view kExtractSocietal = "extract_societal";
inline constexpr std::string_view kExtractScientific = "extract_scientific";
inline constexpr std::string_view kExtractAccess = "extract_access";
inline constexpr std::string_view kSocietalPr = "societal_pr";
inline constexpr std::string_view kScientificPr = "scientific_pr";
inline constexpr std::string_view kAccessibilityPr = "accessibility_pr";
}  // namespace prompt_ids

// Defined in the generated prompts_embedded.cpp.
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_prompts();

using PromptVars = std::map<std::string, std::string, std::less<>>;

/// Replaces `{name}` for every name present in `vars`. Braces that do not
/// name a variable (the JSON output formats inside the templates) are kept.
std::string render_template(std::string_view tmpl, const PromptVars& vars);

/// Versioned prompt templates keyed by id. The built-in set is compiled from
/// prompts/*.txt; a directory of `<id>.txt` files can replace entries.
class PromptLibrary {
 public:
  static const PromptLibrary& builtin();
  static PromptLibrary with_overrides(const std::filesystem::path& dir);

  const std::string& text(std::string_view id) const;
  std::string render(std::string_view id, const PromptVars& vars) const;

  /// Content hash of the template, recorded in run manifests.
  std::string version(std::string_view id) const;
  nlohmann::json versions() const;

  bool contains(std::string_view id) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace jf
