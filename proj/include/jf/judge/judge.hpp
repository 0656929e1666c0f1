#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jf/common/prompt_library.hpp"
#include "jf/corpus/document.hpp"
#include "jf/llm/gateway.hpp"
#include "jf/synthesis/transcript.hpp"

namespace jf::judge {

enum class Aspect { kSocietal, kScientific, kAccessibility };

inline constexpr Aspect kAllAspects[] = {Aspect::kSocietal, Aspect::kScientific,
                                         Aspect::kAccessibility};

std::string_view to_string(Aspect a);
std::optional<Aspect> parse_aspect(std::string_view s);

struct ScoreRange {
  int lo;
  int hi;
};

/// Societal and scientific context are scored 1-3 (the scientific prompt's
/// anchors stop at 3), accessibility 1-5.
ScoreRange rubric_range(Aspect a);
int clamp_score(Aspect a, int raw);

std::string_view press_release_prompt_id(Aspect a);
std::string_view extraction_prompt_id(Aspect a);

struct RubricScore {
  Aspect aspect = Aspect::kSocietal;
  int score = 1;
  std::string reasons;
};

/// accessibility > 3 and (societal + scientific) / 2 > 2, both strict.
bool passes_quality_filter(int accessibility, int scientific, int societal);

struct QualityRecord {
  std::string doc_id;
  RubricScore societal{Aspect::kSocietal, 1, {}};
  RubricScore scientific{Aspect::kScientific, 1, {}};
  RubricScore accessibility{Aspect::kAccessibility, 1, {}};
  bool passed = false;
  // Set when a rubric reply could not be parsed; such records never pass.
  std::optional<std::string> unscorable;

  /// Recomputes `passed` from the stored scores.
  bool derive_passed() const;
};

nlohmann::json to_json(const QualityRecord& r);
QualityRecord quality_record_from_json(const nlohmann::json& j);

/// Ids of passing records in input order.
std::vector<std::string> filter_corpus(const std::vector<QualityRecord>& records);

struct AnswerAssessment {
  bool is_vague = false;
  std::vector<std::string> technical_concepts;
  bool judge_failed = false;
};

nlohmann::json to_json(const AnswerAssessment& a);

struct QuestionExtraction {
  Aspect aspect = Aspect::kSocietal;
  std::vector<std::string> extracted;
  bool failed = false;
};

nlohmann::json to_json(const QuestionExtraction& e);
QuestionExtraction question_extraction_from_json(const nlohmann::json& j);

/// Every rubric in the pipeline, issued against one judge model. A reply
/// that cannot be parsed is re-requested `parse_retries` more times.
class Judge {
 public:
  explicit Judge(llm::ChatModel& model, const PromptLibrary& prompts = PromptLibrary::builtin(),
                 int parse_retries = 2);

  /// Three separate rubric calls. Out-of-range scores are clamped with a
  /// warning; a persistent parse failure marks the record unscorable.
  QualityRecord score_press_release(const corpus::Document& doc);

  /// Throws ParseFailure once retries are exhausted.
  RubricScore score_rubric(Aspect aspect, std::string_view press_release);

  /// A persistent parse failure yields judge_failed = true.
  AnswerAssessment assess_answer(std::string_view answer);

  /// Returns the judge's question list verbatim; matching against real turns
  /// happens in the metrics module.
  QuestionExtraction extract_questions(const synthesis::Transcript& transcript, Aspect aspect);

 private:
  template <class Parse>
  auto ask(const std::string& prompt, Parse parse) -> decltype(parse(nlohmann::json{}));

  llm::ChatModel& model_;
  const PromptLibrary& prompts_;
  int parse_retries_;
};

}  // namespace jf::judge
