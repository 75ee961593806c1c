#pragma once

// Line-delimited JSON record files. Every intermediate pipeline artifact is
// one of these so stages stay independently inspectable.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dtsynth/error.hpp"

namespace dtsynth {

using Json = nlohmann::ordered_json;

/// Write-temp-then-rename so readers never observe a partial file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_records(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::string buf;
  for (const Json& r : records) {
    buf += r.dump();
    buf += '\n';
  }
  write_text_atomic(path, buf);
}

inline std::vector<Json> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());
  std::vector<Json> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace dtsynth
