#include "msv/csv.hpp"

#include <unistd.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "msv/errors.hpp"

namespace msv {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string where =
      "row " + std::to_string(row) + ", column " + std::to_string(col);
  std::size_t begin = cell.find_first_not_of(" \t");
  if (begin == std::string::npos) {
    throw DataFormatError("empty cell at " + where);
  }
  std::size_t end = cell.find_last_not_of(" \t") + 1;
  double value = 0.0;
  const char* first = cell.data() + begin;
  const char* last = cell.data() + end;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataFormatError("cannot parse '" + cell + "' as a number at " + where);
  }
  if (!std::isfinite(value)) {
    throw DataFormatError("non-finite value at " + where);
  }
  return value;
}

}  // namespace

ReturnsCsv read_returns_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw DataFormatError("'" + path + "' is empty");
  ReturnsCsv out;
  out.labels = split_csv_line(line);
  const std::size_t p = out.labels.size();
  if (p == 0 || (p == 1 && out.labels[0].empty())) {
    throw DataFormatError("'" + path + "' has no header labels");
  }

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;  // trailing newline
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != p) {
      throw DataFormatError("row " + std::to_string(lineno) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(p));
    }
    for (std::size_t j = 0; j < p; ++j) {
      values.push_back(parse_cell(cells[j], lineno, j + 1));
    }
    ++rows;
  }
  if (rows == 0) throw DataFormatError("'" + path + "' has a header but no data rows");

  out.y.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t j = 0; j < p; ++j) {
      out.y(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = values[t * p + j];
    }
  }
  return out;
}

std::string format_double(double v) {
  // Shortest representation that round-trips; %.17g always does, but trim via
  // a %.15g / %.16g probe first so typical values stay readable.
  std::array<char, 40> buf;
  for (int precision : {15, 16, 17}) {
    const int len = std::snprintf(buf.data(), buf.size(), "%.*g", precision, v);
    double back = 0.0;
    std::from_chars(buf.data(), buf.data() + len, back);
    if (back == v || (std::isnan(back) && std::isnan(v))) {
      return std::string(buf.data(), static_cast<std::size_t>(len));
    }
  }
  return std::string(buf.data());
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataFormatError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataFormatError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataFormatError("cannot move temp file onto '" + path + "': " + ec.message());
  }
}

void write_returns_csv(const std::string& path, const Eigen::MatrixXd& y,
                       std::vector<std::string> labels) {
  const auto p = static_cast<std::size_t>(y.cols());
  if (labels.empty()) {
    labels.reserve(p);
    for (std::size_t i = 1; i <= p; ++i) labels.push_back("s" + std::to_string(i));
  }
  if (labels.size() != p) {
    throw ConfigError("label count " + std::to_string(labels.size()) + " does not match " +
                      std::to_string(p) + " columns");
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < p; ++i) {
    if (i) out << ',';
    out << labels[i];
  }
  out << '\n';
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
      if (i) out << ',';
      out << format_double(y(t, i));
    }
    out << '\n';
  }
  atomic_write_file(path, out.str());
}

}  // namespace msv
