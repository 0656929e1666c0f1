#pragma once

#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace jf::llm {

/// Returns the last syntactically valid top-level JSON object in a model
/// reply. Reasoning models write prose (and sometimes echo the requested
/// format) before the answer, so the final object is taken. Objects nested
/// inside another valid object are not candidates. String-valued scores
/// ("score": "3") are coerced to integers. Throws ParseFailure carrying the
/// raw reply when no object is found.
nlohmann::json extract_json(std::string_view reply);

/// All top-level objects in reading order (exposed for diagnostics/tests).
std::vector<nlohmann::json> find_json_objects(std::string_view reply);

/// In-place: every member named "score" or ending in "_score" whose value is
/// a string holding an integer becomes that integer.
void coerce_scores(nlohmann::json& value);

}  // namespace jf::llm
