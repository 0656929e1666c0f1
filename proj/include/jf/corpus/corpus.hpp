#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jf/corpus/document.hpp"

namespace jf::corpus {

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;

  /// Throws ValidationError unless all ratios are non-negative and sum to
  /// 1 within 1e-9.
  void validate() const;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t simulation_only = 0;
  std::size_t explicit_splits = 0;
  std::array<std::size_t, 3> split_counts{};  // indexed by Split
};

/// Immutable once built; safe for concurrent reads.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Document> docs, std::uint64_t seed, SplitRatios ratios);

  const std::vector<Document>& documents() const { return docs_; }
  std::size_t size() const { return docs_.size(); }

  const Document* find(std::string_view id) const;
  const Document& at(std::string_view id) const;  // throws NotFound
  std::vector<const Document*> by_split(Split split) const;

  std::uint64_t seed() const { return seed_; }
  const SplitRatios& ratios() const { return ratios_; }

  /// Directory layout: train.jsonl, validation.jsonl, test.jsonl and
  /// manifest.json (seed, ratios, counts).
  void save(const std::filesystem::path& dir, const IngestReport& report) const;
  static Corpus load(const std::filesystem::path& dir);

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t seed_ = 0;
  SplitRatios ratios_;
};

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

/// Reads one JSON record per line. Records that carry a valid `split` keep
/// it; the rest are partitioned by a seeded hash of their id (see
/// assign_splits). Malformed lines and duplicate ids are counted and logged.
/// Throws IoError for an unreadable path and CorpusError when no record is
/// valid.
IngestResult ingest(const std::filesystem::path& path, const SplitRatios& ratios,
                    std::uint64_t seed);

/// Orders ids by their seeded hash and hands out split quotas in that order
/// (largest-remainder rounding of ratio * n). The result depends only on the
/// id set, the seed and the ratios, never on input order.
std::vector<Split> assign_splits(const std::vector<std::string>& ids, const SplitRatios& ratios,
                                 std::uint64_t seed);

}  // namespace jf::corpus
