#include "jf/llm/json_extract.hpp"

#include <charconv>
#include <optional>
#include <string>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"

namespace jf::llm {

namespace {

// Index one past the brace that closes the object opened at `start`, or npos
// if the braces never balance. String literals are skipped so braces inside
// them do not count.
std::size_t match_object_end(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<long long> parse_integer(std::string_view s) {
  s = text::trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  return std::nullopt;
}

bool is_score_key(const std::string& key) {
  return key == "score" ||
         (key.size() > 6 && key.compare(key.size() - 6, 6, "_score") == 0);
}

}  // namespace

void coerce_scores(nlohmann::json& value) {
  if (value.is_object()) {
    for (auto it = value.begin(); it != value.end(); ++it) {
      if (is_score_key(it.key()) && it->is_string()) {
        if (auto v = parse_integer(it->get<std::string>())) *it = *v;
      } else {
        coerce_scores(*it);
      }
    }
  } else if (value.is_array()) {
    for (auto& v : value) coerce_scores(v);
  }
}

std::vector<nlohmann::json> find_json_objects(std::string_view reply) {
  std::vector<nlohmann::json> found;
  std::size_t pos = 0;
  while (pos < reply.size()) {
    const std::size_t open = reply.find('{', pos);
    if (open == std::string_view::npos) break;
    const std::size_t end = match_object_end(reply, open);
    if (end != std::string_view::npos) {
      auto parsed = nlohmann::json::parse(reply.substr(open, end - open), nullptr,
                                          /*allow_exceptions=*/false);
      if (!parsed.is_discarded() && parsed.is_object()) {
        found.push_back(std::move(parsed));
        pos = end;
        continue;
      }
    }
    pos = open + 1;
  }
  return found;
}

nlohmann::json extract_json(std::string_view reply) {
  auto objects = find_json_objects(reply);
  if (objects.empty()) {
    throw ParseFailure("no JSON object in model reply", std::string(reply));
  }
  nlohmann::json out = std::move(objects.back());
  coerce_scores(out);
  return out;
}

}  // namespace jf::llm
