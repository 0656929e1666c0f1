#include "jf/corpus/tokens.hpp"

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"

namespace jf::corpus {

std::size_t approx_tokens(std::string_view text) {
  const std::size_t chars = text::count_visible_chars(text);
  return (chars + kCharsPerToken - 1) / kCharsPerToken;
}

std::string_view truncate_text(std::string_view body, std::size_t budget) {
  if (approx_tokens(body) <= budget) return body;
  const std::size_t max_chars = budget * kCharsPerToken;
  // Walk the text once, remembering the end of the last word that still fit.
  std::size_t visible = 0;
  std::size_t last_fit_end = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (text::is_space(c)) {
      if (i > 0 && !text::is_space(body[i - 1]) && visible <= max_chars) last_fit_end = i;
      continue;
    }
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++visible;
    if (visible > max_chars) break;
  }
  return body.substr(0, last_fit_end);
}

PaperContext make_context(std::string title, std::string_view paper_text, std::size_t budget) {
  if (budget == 0) throw ValidationError("token budget must be >= 1");
  PaperContext ctx;
  ctx.title = std::move(title);
  ctx.excerpt = std::string(truncate_text(paper_text, budget));
  ctx.token_budget = budget;
  return ctx;
}

PaperContext truncate(const Document& doc, std::size_t budget) {
  return make_context(doc.title, doc.paper_text, budget);
}

}  // namespace jf::corpus
