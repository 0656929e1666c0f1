#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/judge/judge.hpp"
#include "jf/llm/endpoint.hpp"
#include "jf/llm/gateway.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::metrics {

inline constexpr double kDefaultMatchThreshold = 0.8;

/// How a question's similarity to its predecessors is reduced.
enum class RedundancyMode { kMax, kMean };
/// Macro: every conversation weighs the same. Micro: rates are pooled over
/// all questions.
enum class Averaging { kMacro, kMicro };

std::string_view to_string(RedundancyMode m);
std::optional<RedundancyMode> parse_redundancy_mode(std::string_view s);
std::string_view to_string(Averaging a);
std::optional<Averaging> parse_averaging(std::string_view s);

struct ScoringOptions {
  double match_threshold = kDefaultMatchThreshold;
  RedundancyMode redundancy = RedundancyMode::kMax;
};

/// |A ∩ B| / |A ∪ B| over normalized token sets; 1 for two empty sets.
double token_jaccard(const std::string& a, const std::string& b);

/// Maps each extracted question to the unmatched journalist question with
/// the highest token Jaccard similarity, accepting it on an exact normalized
/// match or similarity >= threshold. Returns 0-based question indices; every
/// question is matched at most once. Unmatched extractions are logged.
std::set<std::size_t> match_questions(const synthesis::Transcript& transcript,
                                      const judge::QuestionExtraction& extraction,
                                      double threshold = kDefaultMatchThreshold);

struct AspectExtractions {
  judge::QuestionExtraction societal{judge::Aspect::kSocietal, {}, false};
  judge::QuestionExtraction scientific{judge::Aspect::kScientific, {}, false};
  judge::QuestionExtraction accessibility{judge::Aspect::kAccessibility, {}, false};
};

nlohmann::json to_json(const AspectExtractions& e);
AspectExtractions aspect_extractions_from_json(const nlohmann::json& j);

struct ConversationScores {
  std::string doc_id;
  double access_rate = 0.0;
  double scientific_rate = 0.0;
  double societal_rate = 0.0;
  double redundancy = 0.0;
  double follow_up = 0.0;
  std::size_t question_count = 0;
};

nlohmann::json to_json(const ConversationScores& s);
ConversationScores conversation_scores_from_json(const nlohmann::json& j);

/// Mean over questions q_i (i >= 2) of max_{j<i} cos(q_i, q_j) (or the mean
/// over j with kMean); 0 for a single question.
double redundancy(const std::vector<llm::EmbeddingVector>& questions,
                  RedundancyMode mode = RedundancyMode::kMax);

/// Mean over q_i (i >= 2) of cos(q_i, a_{i-1}), where answers[i-1] is the
/// researcher turn right before question i; 0 for a single question.
double follow_up(const std::vector<llm::EmbeddingVector>& questions,
                 const std::vector<llm::EmbeddingVector>& answers);

ConversationScores score_conversation(const synthesis::Transcript& transcript,
                                      const AspectExtractions& extractions,
                                      llm::EmbeddingProvider& embeddings,
                                      const ScoringOptions& options = {});

/// 3 / (1/a + 1/s + 1/so), or 0 when any argument is 0.
double harmonic_avg(double a, double s, double so);

struct MetricReport {
  std::string system_name;
  double access = 0.0;
  double scientific = 0.0;
  double societal = 0.0;
  double harmonic_avg = 0.0;
  double redundancy = 0.0;
  double follow_up = 0.0;
  std::size_t n_conversations = 0;
};

/// Averages every field over conversations, then takes the harmonic average
/// of the averaged rates. Throws ValidationError on empty input.
MetricReport aggregate(const std::string& system_name, const std::vector<ConversationScores>& scores,
                       Averaging averaging = Averaging::kMacro);

nlohmann::json to_json(const MetricReport& r);
MetricReport metric_report_from_json(const nlohmann::json& j);

/// Aligned text table with columns Access., Scientific., Societal., AVG.,
/// Redund., Follow.
std::string format_table(const std::vector<MetricReport>& reports);

}  // namespace jf::metrics
