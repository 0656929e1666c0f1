#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace jf::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool is_space(char c);

/// Lowercased maximal alphanumeric runs. Bytes >= 0x80 count as word
/// characters so UTF-8 words stay whole.
std::vector<std::string> word_tokens(std::string_view s);

/// Whitespace-delimited word count.
std::size_t count_words(std::string_view s);

/// Number of UTF-8 code points that are not ASCII whitespace.
std::size_t count_visible_chars(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// 64-bit FNV-1a, optionally mixed with a seed. Stable across platforms and
/// used wherever an identifier must be hashed reproducibly.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0);

std::string hex64(std::uint64_t value);

}  // namespace jf::text
