#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace jf::testing {

inline std::vector<std::string> oracle_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::size_t oracle_unigram_overlap(const std::vector<std::string>& a,
                                          const std::vector<std::string>& b) {
  std::map<std::string, int> ca, cb;
  for (const auto& t : a) ++ca[t];
  for (const auto& t : b) ++cb[t];
  std::size_t n = 0;
  for (const auto& [tok, k] : ca) n += static_cast<std::size_t>(std::min(k, cb[tok]));
  return n;
}

inline bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i) {
    if (of[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

/// Longest subsequence of `a` that is also one of `b`, by enumerating every
/// subset of `a`. Only for short inputs.
inline std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

struct OracleScore {
  double p = 0, r = 0, f = 0;
};

inline OracleScore oracle_prf(std::size_t hits, std::size_t cand_len, std::size_t ref_len) {
  OracleScore s;
  if (cand_len == 0 || ref_len == 0) return s;
  s.p = static_cast<double>(hits) / static_cast<double>(cand_len);
  s.r = static_cast<double>(hits) / static_cast<double>(ref_len);
  s.f = 2.0 * static_cast<double>(hits) / static_cast<double>(cand_len + ref_len);
  return s;
}

/// Up to ten tokens over a tiny alphabet, with mixed case and punctuation.
inline std::string random_rouge_text(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"a", "B", "c", "the", "Cat", "sat", "x1"};
  static const std::vector<std::string> seps = {" ", ", ", "  ", "-", ". "};
  std::uniform_int_distribution<std::size_t> len(0, 10), w(0, words.size() - 1),
      sp(0, seps.size() - 1);
  const std::size_t n = len(rng);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += seps[sp(rng)];
    out += words[w(rng)];
  }
  return out;
}

}  // namespace jf::testing
