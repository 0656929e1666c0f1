#include "jf/corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/jsonl.hpp"
#include "jf/common/text.hpp"

namespace jf::corpus {

using nlohmann::json;

void SplitRatios::validate() const {
  if (train < 0 || validation < 0 || test < 0) {
    throw ValidationError("split ratios must be non-negative");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1.0");
  }
}

Corpus::Corpus(std::vector<Document> docs, std::uint64_t seed, SplitRatios ratios)
    : docs_(std::move(docs)), seed_(seed), ratios_(ratios) {
  index_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) index_.emplace(docs_[i].id, i);
}

const Document* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &docs_[it->second];
}

const Document& Corpus::at(std::string_view id) const {
  if (const Document* d = find(id)) return *d;
  throw NotFound("document not found: " + std::string(id));
}

std::vector<const Document*> Corpus::by_split(Split split) const {
  std::vector<const Document*> out;
  for (const auto& d : docs_) {
    if (d.split == split) out.push_back(&d);
  }
  return out;
}

std::vector<Split> assign_splits(const std::vector<std::string>& ids, const SplitRatios& ratios,
                                 std::uint64_t seed) {
  const std::size_t n = ids.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = text::fnv1a64(ids[i], seed);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : ids[a] < ids[b];
  });

  const std::array<double, 3> shares{ratios.train, ratios.validation, ratios.test};
  std::array<std::size_t, 3> quota{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = shares[k] * static_cast<double>(n);
    quota[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[k] = exact - static_cast<double>(quota[k]);
    assigned += quota[k];
  }
  while (assigned < n) {
    // Ties go to the earlier split (train, then validation).
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (remainder[k] > remainder[best] + 1e-12) best = k;
    }
    ++quota[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  std::vector<Split> out(n);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t c = 0; c < quota[k]; ++c) out[order[pos++]] = static_cast<Split>(k);
  }
  return out;
}

namespace {

// Returns false (with a reason) when the record is not a usable document.
bool parse_record(const json& j, Document& doc, bool& has_split, std::string& why) {
  if (!j.is_object()) {
    why = "record is not an object";
    return false;
  }
  auto str_field = [&](const char* key, std::string& out, bool required) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) why = std::string("missing field '") + key + "'";
      return !required;
    }
    if (!it->is_string()) {
      why = std::string("field '") + key + "' is not a string";
      return false;
    }
    out = it->get<std::string>();
    return true;
  };
  if (!str_field("id", doc.id, true) || !str_field("title", doc.title, true) ||
      !str_field("paper_text", doc.paper_text, true) ||
      !str_field("press_release", doc.press_release, false) ||
      !str_field("domain", doc.domain, false)) {
    return false;
  }
  if (text::trim(doc.id).empty()) {
    why = "empty id";
    return false;
  }
  if (text::trim(doc.title).empty()) {
    why = "empty title";
    return false;
  }
  if (text::trim(doc.paper_text).empty()) {
    why = "empty paper_text";
    return false;
  }
  has_split = false;
  if (auto it = j.find("split"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      why = "split is not a string";
      return false;
    }
    auto split = parse_split(it->get<std::string>());
    if (!split) {
      why = "unknown split '" + it->get<std::string>() + "'";
      return false;
    }
    doc.split = *split;
    has_split = true;
  }
  return true;
}

json ratios_json(const SplitRatios& r) {
  return json::array({r.train, r.validation, r.test});
}

}  // namespace

IngestResult ingest(const std::filesystem::path& path, const SplitRatios& ratios,
                    std::uint64_t seed) {
  ratios.validate();
  IngestReport report;
  std::vector<Document> docs;
  std::vector<bool> explicit_split;
  std::unordered_map<std::string, std::size_t> seen;

  const auto stats = jsonl::for_each(path, [&](const json& j, std::size_t line_no) {
    Document doc;
    bool has_split = false;
    std::string why;
    if (!parse_record(j, doc, has_split, why)) {
      ++report.malformed;
      spdlog::warn("{}:{}: rejected record: {}", path.string(), line_no, why);
      return;
    }
    if (seen.count(doc.id)) {
      ++report.duplicates;
      spdlog::warn("{}:{}: duplicate id '{}' rejected (first seen on line {})", path.string(),
                   line_no, doc.id, seen[doc.id]);
      return;
    }
    seen.emplace(doc.id, line_no);
    explicit_split.push_back(has_split);
    docs.push_back(std::move(doc));
  });
  report.malformed += stats.malformed;

  if (docs.empty()) {
    throw CorpusError("no valid records in " + path.string());
  }

  std::vector<std::string> unassigned_ids;
  std::vector<std::size_t> unassigned_pos;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (explicit_split[i]) {
      ++report.explicit_splits;
    } else {
      unassigned_ids.push_back(docs[i].id);
      unassigned_pos.push_back(i);
    }
  }
  const auto splits = assign_splits(unassigned_ids, ratios, seed);
  for (std::size_t k = 0; k < splits.size(); ++k) docs[unassigned_pos[k]].split = splits[k];

  for (const auto& d : docs) {
    ++report.split_counts[static_cast<std::size_t>(d.split)];
    if (d.simulation_only()) ++report.simulation_only;
  }
  report.accepted = docs.size();
  spdlog::info("ingested {} documents ({} train / {} validation / {} test), {} malformed, {} "
               "duplicates, {} simulation-only",
               report.accepted, report.split_counts[0], report.split_counts[1],
               report.split_counts[2], report.malformed, report.duplicates,
               report.simulation_only);
  return {Corpus(std::move(docs), seed, ratios), report};
}

void Corpus::save(const std::filesystem::path& dir, const IngestReport& report) const {
  std::filesystem::create_directories(dir);
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    std::vector<json> records;
    for (const auto* d : by_split(s)) records.push_back(to_json(*d));
    jsonl::write_all(dir / (std::string(to_string(s)) + ".jsonl"), records);
  }
  json manifest = {
      {"seed", seed_},
      {"ratios", ratios_json(ratios_)},
      {"counts",
       {{"train", report.split_counts[0]},
        {"validation", report.split_counts[1]},
        {"test", report.split_counts[2]},
        {"total", docs_.size()}}},
      {"malformed", report.malformed},
      {"duplicates", report.duplicates},
      {"simulation_only", report.simulation_only},
      {"explicit_splits", report.explicit_splits},
  };
  jsonl::write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Corpus Corpus::load(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw IoError("corpus manifest not found in " + dir.string());
  }
  const json manifest = json::parse(jsonl::read_text(manifest_path));
  SplitRatios ratios;
  const auto& r = manifest.at("ratios");
  ratios.train = r.at(0).get<double>();
  ratios.validation = r.at(1).get<double>();
  ratios.test = r.at(2).get<double>();

  std::vector<Document> docs;
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    const auto file = dir / (std::string(to_string(s)) + ".jsonl");
    if (!std::filesystem::exists(file)) continue;
    for (const auto& j : jsonl::read_all(file)) {
      Document d;
      d.id = j.at("id").get<std::string>();
      d.title = j.at("title").get<std::string>();
      d.paper_text = j.at("paper_text").get<std::string>();
      d.press_release = j.value("press_release", std::string{});
      d.domain = j.value("domain", std::string{});
      d.split = s;
      docs.push_back(std::move(d));
    }
  }
  return Corpus(std::move(docs), manifest.at("seed").get<std::uint64_t>(), ratios);
}

}  // namespace jf::corpus
