#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace jf::corpus {

enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view s);

struct Document {
  std::string id;
  std::string title;
  std::string paper_text;
  std::string press_release;  // empty for simulation-only documents
  std::string domain;
  Split split = Split::kTrain;

  /// Documents without a press release may be simulated or served but never
  /// enter synthesis filtering.
  bool simulation_only() const { return press_release.empty(); }
};

/// Title plus a truncated paper body; the per-conversation paper input.
struct PaperContext {
  std::string title;
  std::string excerpt;
  std::size_t token_budget = 1000;

  /// Text block handed to prompts.
  std::string render() const;
};

nlohmann::json to_json(const Document& doc);
nlohmann::json to_json(const PaperContext& ctx);
PaperContext paper_context_from_json(const nlohmann::json& j);

}  // namespace jf::corpus
