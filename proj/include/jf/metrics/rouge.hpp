#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/synthesis/transcript.hpp"

namespace jf::metrics {

enum class RougeVariant { kRouge1, kRougeL };

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Tokens are lowercased maximal alphanumeric runs. ROUGE-1 counts clipped
/// unigram overlap, ROUGE-L uses the longest common subsequence. An empty
/// candidate or reference scores all zeros.
RougeScore rouge(std::string_view candidate, std::string_view reference, RougeVariant variant);
RougeScore rouge_tokens(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference, RougeVariant variant);

std::size_t unigram_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Overlap between a user-written summary and the conversation it came from.
struct OverlapStats {
  double rouge1_f = 0.0;
  double rougeL_f = 0.0;
  std::size_t word_count_interaction = 0;
};

OverlapStats overlap(std::string_view summary, const synthesis::Transcript& interaction);
nlohmann::json to_json(const OverlapStats& s);

}  // namespace jf::metrics
