#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace blockcov::csv {

struct Table {
  std::vector<std::string> header;  // empty unless read with has_header
  Eigen::MatrixXd values;
};

/// Comma-separated numbers, '.' decimal separator. Blank lines are skipped.
/// Throws IoError on unreadable files, ragged rows or unparsable/non-finite
/// fields (the message carries path, line and column).
Table read_matrix(const std::filesystem::path& path, bool has_header);

/// Round-trip exact (shortest representation) and locale independent.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  std::span<const std::string> header = {});

/// One column with a header line.
void write_column(const std::filesystem::path& path, const std::string& name,
                  std::span<const int> values);

std::string format_double(double v);

}  // namespace blockcov::csv
