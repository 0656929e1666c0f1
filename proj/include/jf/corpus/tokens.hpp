#pragma once

#include <cstddef>
#include <string_view>

#include "jf/corpus/document.hpp"

namespace jf::corpus {

inline constexpr std::size_t kCharsPerToken = 4;
inline constexpr std::size_t kDefaultTokenBudget = 1000;

/// ceil(visible characters / 4). Whitespace is not counted, so splitting text
/// at a space never changes the total.
std::size_t approx_tokens(std::string_view text);

/// Longest prefix of `text` that ends at a whitespace boundary (or the end of
/// the text) and stays within `budget` approximate tokens. Text already under
/// budget is returned unchanged. Trailing whitespace of a cut prefix is
/// dropped, which makes the operation idempotent.
std::string_view truncate_text(std::string_view text, std::size_t budget);

/// The title is not charged against the budget.
PaperContext truncate(const Document& doc, std::size_t budget);
PaperContext make_context(std::string title, std::string_view paper_text, std::size_t budget);

}  // namespace jf::corpus
