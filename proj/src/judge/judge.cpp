#include "jf/judge/judge.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"
#include "jf/llm/json_extract.hpp"

namespace jf::judge {

using nlohmann::json;

std::string_view to_string(Aspect a) {
  switch (a) {
    case Aspect::kSocietal: return "societal";
    case Aspect::kScientific: return "scientific";
    case Aspect::kAccessibility: return "accessibility";
  }
  return "societal";
}

std::optional<Aspect> parse_aspect(std::string_view s) {
  if (s == "societal") return Aspect::kSocietal;
  if (s == "scientific") return Aspect::kScientific;
  if (s == "accessibility") return Aspect::kAccessibility;
  return std::nullopt;
}

ScoreRange rubric_range(Aspect a) {
  return a == Aspect::kAccessibility ? ScoreRange{1, 5} : ScoreRange{1, 3};
}

int clamp_score(Aspect a, int raw) {
  const auto [lo, hi] = rubric_range(a);
  return std::min(hi, std::max(lo, raw));
}

std::string_view press_release_prompt_id(Aspect a) {
  switch (a) {
    case Aspect::kSocietal: return prompt_ids::kSocietalPr;
    case Aspect::kScientific: return prompt_ids::kScientificPr;
    case Aspect::kAccessibility: return prompt_ids::kAccessibilityPr;
  }
  return prompt_ids::kSocietalPr;
}

std::string_view extraction_prompt_id(Aspect a) {
  switch (a) {
    case Aspect::kSocietal: return prompt_ids::kExtractSocietal;
    case Aspect::kScientific: return prompt_ids::kExtractScientific;
    case Aspect::kAccessibility: return prompt_ids::kExtractAccess;
  }
  return prompt_ids::kExtractSocietal;
}

bool passes_quality_filter(int accessibility, int scientific, int societal) {
  // (sci + soc) / 2 > 2  <=>  sci + soc > 4, kept in integers.
  return accessibility > 3 && scientific + societal > 4;
}

bool QualityRecord::derive_passed() const {
  return !unscorable &&
         passes_quality_filter(accessibility.score, scientific.score, societal.score);
}

namespace {

json score_json(const RubricScore& s) { return s.score; }

RubricScore score_from_json(Aspect a, const json& j, const json& reasons) {
  RubricScore s;
  s.aspect = a;
  s.score = j.get<int>();
  s.reasons = reasons.value(std::string(to_string(a)), std::string{});
  return s;
}

}  // namespace

json to_json(const QualityRecord& r) {
  json out = {{"doc_id", r.doc_id},
              {"societal", score_json(r.societal)},
              {"scientific", score_json(r.scientific)},
              {"accessibility", score_json(r.accessibility)},
              {"passed", r.passed},
              {"reasons_by_aspect",
               {{"societal", r.societal.reasons},
                {"scientific", r.scientific.reasons},
                {"accessibility", r.accessibility.reasons}}}};
  if (r.unscorable) {
    out["unscorable"] = *r.unscorable;
    out["societal"] = nullptr;
    out["scientific"] = nullptr;
    out["accessibility"] = nullptr;
  }
  return out;
}

QualityRecord quality_record_from_json(const json& j) {
  QualityRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  if (j.contains("unscorable") && !j["unscorable"].is_null()) {
    r.unscorable = j["unscorable"].get<std::string>();
    r.passed = false;
    return r;
  }
  const json reasons = j.value("reasons_by_aspect", json::object());
  r.societal = score_from_json(Aspect::kSocietal, j.at("societal"), reasons);
  r.scientific = score_from_json(Aspect::kScientific, j.at("scientific"), reasons);
  r.accessibility = score_from_json(Aspect::kAccessibility, j.at("accessibility"), reasons);
  r.passed = j.at("passed").get<bool>();
  return r;
}

std::vector<std::string> filter_corpus(const std::vector<QualityRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (r.passed && !r.unscorable) out.push_back(r.doc_id);
  }
  return out;
}

json to_json(const AnswerAssessment& a) {
  return {{"is_vague", a.is_vague},
          {"technical_concepts", a.technical_concepts},
          {"judge_failed", a.judge_failed}};
}

json to_json(const QuestionExtraction& e) {
  return {{"aspect", to_string(e.aspect)}, {"extracted", e.extracted}, {"failed", e.failed}};
}

QuestionExtraction question_extraction_from_json(const json& j) {
  QuestionExtraction e;
  auto aspect = parse_aspect(j.at("aspect").get<std::string>());
  if (!aspect) throw ValidationError("unknown aspect in extraction record");
  e.aspect = *aspect;
  e.extracted = j.at("extracted").get<std::vector<std::string>>();
  e.failed = j.value("failed", false);
  return e;
}

Judge::Judge(llm::ChatModel& model, const PromptLibrary& prompts, int parse_retries)
    : model_(model), prompts_(prompts), parse_retries_(parse_retries) {}

template <class Parse>
auto Judge::ask(const std::string& prompt, Parse parse) -> decltype(parse(json{})) {
  const std::vector<llm::ChatMessage> messages{{llm::Role::kUser, prompt}};
  std::string last_reply;
  for (int attempt = 0; attempt <= parse_retries_; ++attempt) {
    last_reply = model_.complete(messages);
    try {
      return parse(llm::extract_json(last_reply));
    } catch (const ParseFailure& e) {
      spdlog::debug("judge reply unparseable (attempt {}): {}", attempt + 1, e.what());
    } catch (const json::exception& e) {
      spdlog::debug("judge reply has unexpected shape (attempt {}): {}", attempt + 1, e.what());
    }
  }
  throw ParseFailure("judge reply unparseable after " + std::to_string(parse_retries_ + 1) +
                         " attempt(s)",
                     last_reply);
}

namespace {

bool parse_flag(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<int>() != 0;
  if (v.is_string()) {
    const std::string s = text::to_lower(text::trim(v.get<std::string>()));
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
  }
  throw ParseFailure("not a boolean: " + v.dump(), v.dump());
}

std::vector<std::string> parse_string_list(const json& v) {
  if (!v.is_array()) throw ParseFailure("expected a list: " + v.dump(), v.dump());
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ParseFailure("list entry is not a string", v.dump());
    std::string s(text::trim(item.get<std::string>()));
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

RubricScore Judge::score_rubric(Aspect aspect, std::string_view press_release) {
  const std::string prompt = prompts_.render(press_release_prompt_id(aspect),
                                             {{"press_release", std::string(press_release)}});
  return ask(prompt, [aspect](const json& obj) {
    const auto it = obj.find("score");
    if (it == obj.end()) throw ParseFailure("reply has no score", obj.dump());
    int raw = 0;
    if (it->is_number_integer()) {
      raw = it->get<int>();
    } else if (it->is_number_float() && std::floor(it->get<double>()) == it->get<double>()) {
      raw = static_cast<int>(it->get<double>());
    } else {
      throw ParseFailure("score is not an integer: " + it->dump(), obj.dump());
    }
    RubricScore s;
    s.aspect = aspect;
    s.score = clamp_score(aspect, raw);
    if (s.score != raw) {
      spdlog::warn("{} score {} outside [{},{}], clamped to {}", to_string(aspect), raw,
                   rubric_range(aspect).lo, rubric_range(aspect).hi, s.score);
    }
    if (auto r = obj.find("reasons"); r != obj.end()) {
      s.reasons = r->is_string() ? r->get<std::string>() : r->dump();
    }
    return s;
  });
}

QualityRecord Judge::score_press_release(const corpus::Document& doc) {
  if (text::trim(doc.press_release).empty()) {
    throw ValidationError("document " + doc.id + " has no press release to score");
  }
  QualityRecord record;
  record.doc_id = doc.id;
  try {
    record.societal = score_rubric(Aspect::kSocietal, doc.press_release);
    record.scientific = score_rubric(Aspect::kScientific, doc.press_release);
    record.accessibility = score_rubric(Aspect::kAccessibility, doc.press_release);
  } catch (const ParseFailure& e) {
    spdlog::warn("document {} unscorable: {}", doc.id, e.what());
    record.unscorable = e.what();
    record.passed = false;
    return record;
  }
  record.passed = record.derive_passed();
  return record;
}

AnswerAssessment Judge::assess_answer(std::string_view answer) {
  if (text::trim(answer).empty()) throw ValidationError("answer to assess is empty");
  const std::string prompt =
      prompts_.render(prompt_ids::kAnswerAssess, {{"last_answer", std::string(answer)}});
  try {
    return ask(prompt, [](const json& obj) {
      AnswerAssessment a;
      auto vague = obj.find("is_vague");
      if (vague == obj.end()) vague = obj.find("vague");
      if (vague == obj.end()) throw ParseFailure("reply has no vagueness flag", obj.dump());
      a.is_vague = parse_flag(*vague);
      if (auto c = obj.find("technical_concepts"); c != obj.end() && !c->is_null()) {
        a.technical_concepts = parse_string_list(*c);
      }
      return a;
    });
  } catch (const ParseFailure& e) {
    spdlog::warn("answer assessment failed: {}", e.what());
    AnswerAssessment failed;
    failed.judge_failed = true;
    return failed;
  }
}

QuestionExtraction Judge::extract_questions(const synthesis::Transcript& transcript,
                                            Aspect aspect) {
  if (transcript.questions().empty()) {
    throw ValidationError("transcript " + transcript.doc_id + " has no journalist turn");
  }
  const std::string prompt = prompts_.render(
      extraction_prompt_id(aspect), {{"conversation", synthesis::format_turns(transcript.turns)}});
  QuestionExtraction out;
  out.aspect = aspect;
  try {
    out.extracted = ask(prompt, [](const json& obj) {
      auto it = obj.find("high_quality_questions");
      if (it == obj.end()) throw ParseFailure("reply has no high_quality_questions", obj.dump());
      return parse_string_list(*it);
    });
  } catch (const ParseFailure& e) {
    spdlog::warn("{} extraction failed for {}: {}", to_string(aspect), transcript.doc_id,
                 e.what());
    out.failed = true;
  }
  return out;
}

}  // namespace jf::judge
