#include "blockcov/csv.hpp"

#include "blockcov/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace blockcov::csv {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

Table read_matrix(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  Table table;
  std::vector<double> flat;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (header_pending) {
      for (auto f : fields) table.header.push_back(unquote(f));
      cols = fields.size();
      header_pending = false;
      continue;
    }
    if (cols == 0) cols = fields.size();
    if (fields.size() != cols) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                    " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::string_view f = fields[c];
      if (!f.empty() && f.front() == '+') f.remove_prefix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() || !std::isfinite(v)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": field " + std::to_string(c + 1) +
                      " is not a finite number: '" + std::string(fields[c]) + "'");
      }
      flat.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) {
    throw IoError(path.string() + ": no data rows");
  }
  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * cols + c];
    }
  }
  return table;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  std::span<const std::string> header) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  std::string buf;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) buf += ',';
      buf += header[c];
    }
    buf += '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) buf += ',';
      buf += format_double(m(r, c));
    }
    buf += '\n';
  }
  out << buf;
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

void write_column(const std::filesystem::path& path, const std::string& name, std::span<const int> values) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << name << '\n';
  for (int v : values) out << v << '\n';
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

}  // namespace blockcov::csv
