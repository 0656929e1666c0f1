#include "jf/common/jsonl.hpp"

#include <sstream>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/text.hpp"

namespace jf::jsonl {

ReadStats for_each(const std::filesystem::path& path,
                   const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ReadStats stats;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      ++stats.malformed;
      spdlog::warn("{}:{}: malformed JSON line ({})", path.string(), line_no, e.what());
      continue;
    }
    ++stats.records;
    fn(record, line_no);
  }
  return stats;
}

std::vector<Json> read_all(const std::filesystem::path& path) {
  std::vector<Json> out;
  const ReadStats stats =
      for_each(path, [&](const Json& j, std::size_t) { out.push_back(j); });
  if (stats.malformed > 0) {
    throw IoError(path.string() + ": " + std::to_string(stats.malformed) +
                  " malformed line(s)");
  }
  return out;
}

Writer::Writer(const std::filesystem::path& path, bool append) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void Writer::write(const Json& record) {
  const std::string line = record.dump();
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  ++count_;
}

void Writer::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
  if (!out_) throw IoError("write failed on " + path_.string());
}

std::size_t Writer::count() const {
  std::lock_guard lock(mu_);
  return count_;
}

void write_all(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ostringstream os;
  for (const auto& r : records) os << r.dump() << '\n';
  write_text_atomic(path, os.str());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace jf::jsonl
