#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rclqr {

/// Minimal CSV writer with stable formatting (max_digits10 round-trip doubles)
/// so repeated runs with identical inputs produce byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);

  void write_row(const std::vector<double>& values);
  /// Pre-formatted cells, for values a double cannot carry exactly.
  void write_row_raw(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

std::string format_double(double v);

}  // namespace rclqr
