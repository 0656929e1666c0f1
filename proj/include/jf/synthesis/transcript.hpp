#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace jf::synthesis {

enum class Speaker { kJournalist, kResearcher };
enum class Source { kSynthesized, kSimulated, kLive };

std::string_view to_string(Speaker s);
std::string_view to_string(Source s);
std::optional<Speaker> parse_speaker(std::string_view s);
std::optional<Source> parse_source(std::string_view s);

struct Turn {
  Speaker role = Speaker::kJournalist;
  std::string text;

  bool operator==(const Turn&) const = default;
};

/// Turns alternate strictly, journalist first, and none is blank.
struct Transcript {
  std::string doc_id;
  std::vector<Turn> turns;
  Source source = Source::kSynthesized;

  bool operator==(const Transcript&) const = default;

  /// Throws ValidationError describing the first violated invariant.
  void validate() const;

  std::vector<std::string> questions() const;
  std::vector<std::string> answers() const;
  std::size_t journalist_turn_count() const;
};

/// Same rules as Transcript::validate for a bare turn list; `allow_empty`
/// admits the empty history of a first question.
void validate_turns(const std::vector<Turn>& turns, bool allow_empty);

nlohmann::json to_json(const Turn& t);
nlohmann::json to_json(const Transcript& t);
/// {doc_id, source, turns:[{role,text}]}; extra keys are ignored. Validates.
Transcript transcript_from_json(const nlohmann::json& j);
std::vector<Turn> turns_from_json(const nlohmann::json& arr);

/// Canonical surface form: one "Journalist: ..." / "Researcher: ..." block per
/// turn, separated by newlines.
std::string format_turns(const std::vector<Turn>& turns);

struct ParsedTurns {
  std::vector<Turn> turns;
  bool ok = false;
  std::size_t error_line = 0;  // 1-based line of the first offending line
  std::string error;
};

/// Reads speaker-labelled text. Labels are "Journalist:" and "Researcher:",
/// case-insensitive, optionally wrapped in markdown bold. Unlabelled lines
/// continue the current turn; text before the first label and any leading
/// <think> block are ignored. Fails when no turn is found, when the first
/// turn is the researcher's, when one speaker has two labelled turns in a
/// row, or when a turn ends up blank.
ParsedTurns parse_transcript(std::string_view raw);

}  // namespace jf::synthesis
