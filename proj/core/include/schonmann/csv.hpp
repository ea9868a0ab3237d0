#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "schonmann/snapshot.hpp"

namespace schonmann {

// Minimal CSV emitter: comma separators, '.' decimal point (shortest
// round-trip doubles), LF line endings, mandatory header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<const char*> header);

  void row(const std::vector<std::string>& cells);
  void close();

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(uint64_t v) { return std::to_string(v); }
  static std::string cell(int64_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }

 private:
  std::ofstream out_;
  size_t columns_ = 0;
};

// FNV-1a 64-bit digest of a file's bytes (manifest checksums).
uint64_t fnv1a64_file(const std::string& path);
std::string fnv1a64_hex(uint64_t digest);

}  // namespace schonmann
