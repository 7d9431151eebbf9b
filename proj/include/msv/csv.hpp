#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace msv {

/// A parsed returns file: header row of series labels, numeric body.
struct ReturnsCsv {
  std::vector<std::string> labels;
  Eigen::MatrixXd y;  // T x p
};

/// Reads a returns CSV. The first row must be labels; every body cell must
/// parse as a finite decimal number (period decimal point regardless of
/// locale). Empty cells, NaN/inf, and ragged rows are rejected with the
/// offending row/column in the message.
ReturnsCsv read_returns_csv(const std::string& path);

/// Writes a returns CSV (atomically: temp file + rename). Labels default to
/// s1..sp when empty.
void write_returns_csv(const std::string& path, const Eigen::MatrixXd& y,
                       std::vector<std::string> labels = {});

/// Atomic text-file write used by every emitter: content goes to a temp file
/// in the same directory, then rename() replaces the target.
void atomic_write_file(const std::string& path, const std::string& content);

/// Full-precision decimal rendering of a double (round-trips exactly).
std::string format_double(double v);

}  // namespace msv
