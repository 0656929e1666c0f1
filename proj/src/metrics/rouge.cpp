#include "jf/metrics/rouge.hpp"

#include <algorithm>
#include <unordered_map>

#include "jf/common/text.hpp"

namespace jf::metrics {

std::size_t unigram_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& t : b) ++counts[t];
  std::size_t hits = 0;
  for (const auto& t : a) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_tokens(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference, RougeVariant variant) {
  RougeScore s;
  if (candidate.empty() || reference.empty()) return s;
  const std::size_t hits = variant == RougeVariant::kRouge1 ? unigram_overlap(candidate, reference)
                                                            : lcs_length(candidate, reference);
  s.precision = static_cast<double>(hits) / static_cast<double>(candidate.size());
  s.recall = static_cast<double>(hits) / static_cast<double>(reference.size());
  // 2PR / (P + R) reduced to counts, so simple ratios come out exact.
  s.f1 = 2.0 * static_cast<double>(hits) /
         static_cast<double>(candidate.size() + reference.size());
  return s;
}

RougeScore rouge(std::string_view candidate, std::string_view reference, RougeVariant variant) {
  return rouge_tokens(text::word_tokens(candidate), text::word_tokens(reference), variant);
}

OverlapStats overlap(std::string_view summary, const synthesis::Transcript& interaction) {
  std::string joined;
  OverlapStats s;
  for (const auto& t : interaction.turns) {
    if (!joined.empty()) joined.push_back('\n');
    joined.append(t.text);
    s.word_count_interaction += text::count_words(t.text);
  }
  const auto cand = text::word_tokens(summary);
  const auto ref = text::word_tokens(joined);
  s.rouge1_f = rouge_tokens(cand, ref, RougeVariant::kRouge1).f1;
  s.rougeL_f = rouge_tokens(cand, ref, RougeVariant::kRougeL).f1;
  return s;
}

nlohmann::json to_json(const OverlapStats& s) {
  return {{"rouge1_f", s.rouge1_f},
          {"rougeL_f", s.rougeL_f},
          {"word_count_interaction", s.word_count_interaction}};
}

}  // namespace jf::metrics
