#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace localest::harness {

/// Shortest round-trip text for a double.
std::string format_double(double v);

/// Rows collected in memory, written to a temporary file and renamed into place.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::string str() const;
  void write_atomic(const std::string& path) const;
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_file_atomic(const std::string& path, const std::string& contents);

/// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a(const std::string& text);

}  // namespace localest::harness
