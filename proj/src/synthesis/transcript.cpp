#include "jf/synthesis/transcript.hpp"

#include <algorithm>
#include <regex>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"

namespace jf::synthesis {

using nlohmann::json;

std::string_view to_string(Speaker s) {
  return s == Speaker::kJournalist ? "journalist" : "researcher";
}

std::string_view to_string(Source s) {
  switch (s) {
    case Source::kSynthesized: return "synthesized";
    case Source::kSimulated: return "simulated";
    case Source::kLive: return "live";
  }
  return "synthesized";
}

std::optional<Speaker> parse_speaker(std::string_view s) {
  if (s == "journalist") return Speaker::kJournalist;
  if (s == "researcher") return Speaker::kResearcher;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view s) {
  if (s == "synthesized") return Source::kSynthesized;
  if (s == "simulated") return Source::kSimulated;
  if (s == "live") return Source::kLive;
  return std::nullopt;
}

void validate_turns(const std::vector<Turn>& turns, bool allow_empty) {
  if (turns.empty() && !allow_empty) throw ValidationError("transcript has no turns");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Speaker expected = (i % 2 == 0) ? Speaker::kJournalist : Speaker::kResearcher;
    if (turns[i].role != expected) {
      throw ValidationError("turn " + std::to_string(i) + " should be " +
                            std::string(to_string(expected)));
    }
    if (text::trim(turns[i].text).empty()) {
      throw ValidationError("turn " + std::to_string(i) + " is blank");
    }
  }
}

void Transcript::validate() const { validate_turns(turns, /*allow_empty=*/false); }

std::vector<std::string> Transcript::questions() const {
  std::vector<std::string> out;
  for (const auto& t : turns) {
    if (t.role == Speaker::kJournalist) out.push_back(t.text);
  }
  return out;
}

std::vector<std::string> Transcript::answers() const {
  std::vector<std::string> out;
  for (const auto& t : turns) {
    if (t.role == Speaker::kResearcher) out.push_back(t.text);
  }
  return out;
}

std::size_t Transcript::journalist_turn_count() const { return (turns.size() + 1) / 2; }

json to_json(const Turn& t) { return {{"role", to_string(t.role)}, {"text", t.text}}; }

json to_json(const Transcript& t) {
  json turns = json::array();
  for (const auto& turn : t.turns) turns.push_back(to_json(turn));
  return {{"doc_id", t.doc_id}, {"source", to_string(t.source)}, {"turns", std::move(turns)}};
}

std::vector<Turn> turns_from_json(const json& arr) {
  if (!arr.is_array()) throw ValidationError("turns must be an array");
  std::vector<Turn> turns;
  for (const auto& item : arr) {
    auto role = parse_speaker(item.at("role").get<std::string>());
    if (!role) throw ValidationError("unknown role '" + item.at("role").get<std::string>() + "'");
    turns.push_back({*role, item.at("text").get<std::string>()});
  }
  return turns;
}

Transcript transcript_from_json(const json& j) {
  Transcript t;
  try {
    t.doc_id = j.at("doc_id").get<std::string>();
    auto source = parse_source(j.value("source", std::string("synthesized")));
    if (!source) throw ValidationError("unknown transcript source");
    t.source = *source;
    t.turns = turns_from_json(j.at("turns"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad transcript record: ") + e.what());
  }
  t.validate();
  return t;
}

std::string format_turns(const std::vector<Turn>& turns) {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(turns[i].role == Speaker::kJournalist ? "Journalist: " : "Researcher: ");
    out.append(turns[i].text);
  }
  return out;
}

namespace {

const std::regex& label_regex() {
  static const std::regex re(
      R"(^\s*(?:\*\*)?\s*(journalist|researcher)\s*(?:\*\*)?\s*:\s*(?:\*\*)?[ \t]?(.*)$)",
      std::regex::icase | std::regex::optimize);
  return re;
}

}  // namespace

ParsedTurns parse_transcript(std::string_view raw) {
  ParsedTurns result;
  std::size_t line_offset = 0;
  if (const auto think_end = raw.rfind("</think>"); think_end != std::string_view::npos) {
    const std::string_view skipped = raw.substr(0, think_end + 8);
    line_offset = static_cast<std::size_t>(std::count(skipped.begin(), skipped.end(), '\n'));
    raw.remove_prefix(think_end + 8);
  }

  const auto lines = text::split_lines(raw);
  std::vector<Turn> turns;
  std::vector<std::size_t> turn_lines;
  auto fail = [&](std::size_t line, std::string why) {
    result.ok = false;
    result.error_line = line;
    result.error = std::move(why);
    result.turns.clear();
    return result;
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = line_offset + i + 1;
    const std::string line(lines[i]);
    std::smatch m;
    if (std::regex_match(line, m, label_regex())) {
      const Speaker role =
          text::to_lower(m[1].str()) == "journalist" ? Speaker::kJournalist : Speaker::kResearcher;
      if (turns.empty() && role == Speaker::kResearcher) {
        return fail(line_no, "transcript starts with a researcher turn");
      }
      if (!turns.empty() && turns.back().role == role) {
        return fail(line_no, "two consecutive " + std::string(to_string(role)) + " turns");
      }
      turns.push_back({role, m[2].str()});
      turn_lines.push_back(line_no);
    } else if (!turns.empty()) {
      turns.back().text.push_back('\n');
      turns.back().text.append(line);
    }
  }

  if (turns.empty()) return fail(line_offset + 1, "no speaker-labelled turns");
  for (std::size_t k = 0; k < turns.size(); ++k) {
    turns[k].text = std::string(text::trim(turns[k].text));
    if (turns[k].text.empty()) return fail(turn_lines[k], "blank turn");
  }
  result.ok = true;
  result.turns = std::move(turns);
  return result;
}

}  // namespace jf::synthesis
