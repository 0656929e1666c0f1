#include "jf/corpus/document.hpp"

#include "jf/common/error.hpp"

namespace jf::corpus {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

std::string PaperContext::render() const {
  return "[TITLE]: " + title + "\n" + excerpt;
}

nlohmann::json to_json(const Document& doc) {
  return {{"id", doc.id},
          {"title", doc.title},
          {"paper_text", doc.paper_text},
          {"press_release", doc.press_release},
          {"domain", doc.domain},
          {"split", to_string(doc.split)}};
}

nlohmann::json to_json(const PaperContext& ctx) {
  return {{"title", ctx.title}, {"excerpt", ctx.excerpt}, {"token_budget", ctx.token_budget}};
}

PaperContext paper_context_from_json(const nlohmann::json& j) {
  PaperContext ctx;
  ctx.title = j.at("title").get<std::string>();
  ctx.excerpt = j.at("excerpt").get<std::string>();
  ctx.token_budget = j.value("token_budget", std::size_t{1000});
  return ctx;
}

}  // namespace jf::corpus
