#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace jf::jsonl {

using Json = nlohmann::json;

struct ReadStats {
  std::size_t records = 0;
  std::size_t malformed = 0;
};

/// Streams a JSON-lines file. Blank lines are ignored; lines that fail to
/// parse are counted and logged, and `fn` is never called for them. Throws
/// IoError when the file cannot be opened.
ReadStats for_each(const std::filesystem::path& path,
                   const std::function<void(const Json&, std::size_t line_no)>& fn);

/// Reads every record; any malformed line is an IoError.
std::vector<Json> read_all(const std::filesystem::path& path);

/// Append-only writer; `write` may be called from several threads.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path, bool append = false);

  void write(const Json& record);
  void flush();
  std::size_t count() const;

 private:
  mutable std::mutex mu_;
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t count_ = 0;
};

void write_all(const std::filesystem::path& path, const std::vector<Json>& records);

/// Writes through a temporary file and renames, so readers never observe a
/// half-written file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace jf::jsonl
