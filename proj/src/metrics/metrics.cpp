#include "jf/metrics/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"

namespace jf::metrics {

using nlohmann::json;

namespace {

std::set<std::string> token_set(const std::string& s) {
  const auto tokens = text::word_tokens(s);
  return {tokens.begin(), tokens.end()};
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

std::string_view to_string(RedundancyMode m) { return m == RedundancyMode::kMax ? "max" : "mean"; }

std::optional<RedundancyMode> parse_redundancy_mode(std::string_view s) {
  if (s == "max") return RedundancyMode::kMax;
  if (s == "mean") return RedundancyMode::kMean;
  return std::nullopt;
}

std::string_view to_string(Averaging a) { return a == Averaging::kMacro ? "macro" : "micro"; }

std::optional<Averaging> parse_averaging(std::string_view s) {
  if (s == "macro") return Averaging::kMacro;
  if (s == "micro") return Averaging::kMicro;
  return std::nullopt;
}

double token_jaccard(const std::string& a, const std::string& b) {
  return jaccard(token_set(a), token_set(b));
}

std::set<std::size_t> match_questions(const synthesis::Transcript& transcript,
                                      const judge::QuestionExtraction& extraction,
                                      double threshold) {
  const auto questions = transcript.questions();
  std::vector<std::vector<std::string>> q_tokens;
  std::vector<std::set<std::string>> q_sets;
  for (const auto& q : questions) {
    q_tokens.push_back(text::word_tokens(q));
    q_sets.emplace_back(q_tokens.back().begin(), q_tokens.back().end());
  }

  std::set<std::size_t> matched;
  for (const auto& extracted : extraction.extracted) {
    const auto e_tokens = text::word_tokens(extracted);
    if (e_tokens.empty()) continue;
    const std::set<std::string> e_set(e_tokens.begin(), e_tokens.end());

    std::optional<std::size_t> best;
    double best_sim = -1.0;
    bool best_exact = false;
    for (std::size_t i = 0; i < questions.size(); ++i) {
      if (matched.count(i)) continue;
      const bool exact = e_tokens == q_tokens[i];
      const double sim = exact ? 1.0 : jaccard(e_set, q_sets[i]);
      if (sim > best_sim) {
        best = i;
        best_sim = sim;
        best_exact = exact;
      }
    }
    if (best && (best_exact || best_sim + 1e-12 >= threshold)) {
      matched.insert(*best);
    } else {
      spdlog::debug("{}: {} extraction not found in transcript: '{}'", transcript.doc_id,
                    judge::to_string(extraction.aspect), extracted);
    }
  }
  return matched;
}

json to_json(const AspectExtractions& e) {
  return {{"societal", judge::to_json(e.societal)},
          {"scientific", judge::to_json(e.scientific)},
          {"accessibility", judge::to_json(e.accessibility)}};
}

AspectExtractions aspect_extractions_from_json(const json& j) {
  AspectExtractions e;
  e.societal = judge::question_extraction_from_json(j.at("societal"));
  e.scientific = judge::question_extraction_from_json(j.at("scientific"));
  e.accessibility = judge::question_extraction_from_json(j.at("accessibility"));
  return e;
}

json to_json(const ConversationScores& s) {
  return {{"doc_id", s.doc_id},
          {"access_rate", s.access_rate},
          {"scientific_rate", s.scientific_rate},
          {"societal_rate", s.societal_rate},
          {"redundancy", s.redundancy},
          {"follow_up", s.follow_up},
          {"question_count", s.question_count}};
}

ConversationScores conversation_scores_from_json(const json& j) {
  ConversationScores s;
  s.doc_id = j.at("doc_id").get<std::string>();
  s.access_rate = j.at("access_rate").get<double>();
  s.scientific_rate = j.at("scientific_rate").get<double>();
  s.societal_rate = j.at("societal_rate").get<double>();
  s.redundancy = j.at("redundancy").get<double>();
  s.follow_up = j.at("follow_up").get<double>();
  s.question_count = j.at("question_count").get<std::size_t>();
  return s;
}

double redundancy(const std::vector<llm::EmbeddingVector>& questions, RedundancyMode mode) {
  if (questions.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 1; i < questions.size(); ++i) {
    double best = llm::cosine(questions[i], questions[0]);
    double sum = best;
    for (std::size_t j = 1; j < i; ++j) {
      const double c = llm::cosine(questions[i], questions[j]);
      best = std::max(best, c);
      sum += c;
    }
    total += mode == RedundancyMode::kMax ? best : sum / static_cast<double>(i);
  }
  return total / static_cast<double>(questions.size() - 1);
}

double follow_up(const std::vector<llm::EmbeddingVector>& questions,
                 const std::vector<llm::EmbeddingVector>& answers) {
  if (questions.size() < 2) return 0.0;
  if (answers.size() + 1 < questions.size()) {
    throw ValidationError("follow-up needs an answer before every question after the first");
  }
  double total = 0.0;
  for (std::size_t i = 1; i < questions.size(); ++i) {
    total += llm::cosine(questions[i], answers[i - 1]);
  }
  return total / static_cast<double>(questions.size() - 1);
}

ConversationScores score_conversation(const synthesis::Transcript& transcript,
                                      const AspectExtractions& extractions,
                                      llm::EmbeddingProvider& embeddings,
                                      const ScoringOptions& options) {
  const double match_threshold = options.match_threshold;
  const auto questions = transcript.questions();
  if (questions.empty()) {
    throw ValidationError("transcript " + transcript.doc_id + " has no journalist question");
  }
  ConversationScores s;
  s.doc_id = transcript.doc_id;
  s.question_count = questions.size();
  const double n = static_cast<double>(questions.size());
  s.access_rate = match_questions(transcript, extractions.accessibility, match_threshold).size() / n;
  s.scientific_rate = match_questions(transcript, extractions.scientific, match_threshold).size() / n;
  s.societal_rate = match_questions(transcript, extractions.societal, match_threshold).size() / n;

  if (questions.size() >= 2) {
    // Only answers that precede some question take part in follow-up.
    auto answers = transcript.answers();
    answers.resize(std::min(answers.size(), questions.size() - 1));
    std::vector<std::string> texts = questions;
    texts.insert(texts.end(), answers.begin(), answers.end());
    auto vectors = embeddings.embed(texts);
    if (vectors.size() != texts.size()) {
      throw ProviderError("embedding provider returned the wrong number of vectors");
    }
    const std::vector<llm::EmbeddingVector> q_vecs(vectors.begin(),
                                                   vectors.begin() + questions.size());
    const std::vector<llm::EmbeddingVector> a_vecs(vectors.begin() + questions.size(),
                                                   vectors.end());
    s.redundancy = redundancy(q_vecs, options.redundancy);
    s.follow_up = follow_up(q_vecs, a_vecs);
  }
  return s;
}

double harmonic_avg(double a, double s, double so) {
  if (a <= 0.0 || s <= 0.0 || so <= 0.0) return 0.0;
  return 3.0 / (1.0 / a + 1.0 / s + 1.0 / so);
}

MetricReport aggregate(const std::string& system_name,
                       const std::vector<ConversationScores>& scores, Averaging averaging) {
  if (scores.empty()) throw ValidationError("cannot aggregate zero conversations");
  MetricReport r;
  r.system_name = system_name;
  r.n_conversations = scores.size();
  for (const auto& s : scores) {
    r.access += s.access_rate;
    r.scientific += s.scientific_rate;
    r.societal += s.societal_rate;
    r.redundancy += s.redundancy;
    r.follow_up += s.follow_up;
  }
  const double n = static_cast<double>(scores.size());
  r.access /= n;
  r.scientific /= n;
  r.societal /= n;
  if (averaging == Averaging::kMicro) {
    double questions = 0.0;
    r.access = r.scientific = r.societal = 0.0;
    for (const auto& s : scores) {
      const double q = static_cast<double>(s.question_count);
      questions += q;
      r.access += s.access_rate * q;
      r.scientific += s.scientific_rate * q;
      r.societal += s.societal_rate * q;
    }
    if (questions > 0.0) {
      r.access /= questions;
      r.scientific /= questions;
      r.societal /= questions;
    }
  }
  r.redundancy /= n;
  r.follow_up /= n;
  r.harmonic_avg = harmonic_avg(r.access, r.scientific, r.societal);
  return r;
}

json to_json(const MetricReport& r) {
  return {{"system_name", r.system_name},
          {"access", r.access},
          {"scientific", r.scientific},
          {"societal", r.societal},
          {"harmonic_avg", r.harmonic_avg},
          {"redundancy", r.redundancy},
          {"follow_up", r.follow_up},
          {"n_conversations", r.n_conversations}};
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  r.system_name = j.at("system_name").get<std::string>();
  r.access = j.at("access").get<double>();
  r.scientific = j.at("scientific").get<double>();
  r.societal = j.at("societal").get<double>();
  r.harmonic_avg = j.at("harmonic_avg").get<double>();
  r.redundancy = j.at("redundancy").get<double>();
  r.follow_up = j.at("follow_up").get<double>();
  r.n_conversations = j.at("n_conversations").get<std::size_t>();
  return r;
}

std::string format_table(const std::vector<MetricReport>& reports) {
  std::size_t name_width = 6;
  for (const auto& r : reports) name_width = std::max(name_width, r.system_name.size());
  const char* headers[] = {"Access.", "Scientific.", "Societal.", "AVG.", "Redund.", "Follow.", "N"};
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_width)) << "System";
  for (const char* h : headers) os << "  " << std::right << std::setw(11) << h;
  os << '\n';
  os << std::fixed << std::setprecision(2);
  for (const auto& r : reports) {
    os << std::left << std::setw(static_cast<int>(name_width)) << r.system_name << std::right;
    for (double v : {r.access, r.scientific, r.societal, r.harmonic_avg, r.redundancy,
                     r.follow_up}) {
      os << "  " << std::setw(11) << v;
    }
    os << "  " << std::setw(11) << r.n_conversations << '\n';
  }
  return os.str();
}

}  // namespace jf::metrics
