#include "msv/covseq_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msv/csv.hpp"
#include "msv/errors.hpp"

namespace msv {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'V', 'C', 'O', 'V', 'B', '\0'};
constexpr std::uint32_t kBinaryVersion = 1;

void check_sequence(const CovSequence& seq) {
  if (seq.matrices.empty()) {
    throw LengthMismatchError("cannot write an empty covariance sequence");
  }
  if (seq.horizon.size() != seq.matrices.size()) {
    throw LengthMismatchError("covariance sequence has " +
                              std::to_string(seq.horizon.size()) + " labels for " +
                              std::to_string(seq.matrices.size()) + " matrices");
  }
  const Eigen::Index p = seq.matrices.front().rows();
  for (const auto& m : seq.matrices) {
    if (m.rows() != p || m.cols() != p) {
      throw LengthMismatchError("covariance sequence matrices must all be " +
                                std::to_string(p) + "x" + std::to_string(p));
    }
  }
}

void append_u32(std::string& out, std::uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  out.append(bytes, 4);
}

std::uint32_t read_u32(const std::string& data, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, data.data() + offset, 4);
  return v;
}

std::string read_whole_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(std::string("cannot open ") + what + " file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double parse_cell(const std::string& cell, int line, const char* what) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw DataFormatError("covariance CSV line " + std::to_string(line) + ": " + what +
                          " \"" + cell + "\" is not a number");
  }
  return v;
}

}  // namespace

void write_cov_csv(const CovSequence& seq, const std::string& path) {
  check_sequence(seq);
  const Eigen::Index p = seq.matrices.front().rows();
  std::string out = "t,i,j,value\n";
  for (std::size_t k = 0; k < seq.matrices.size(); ++k) {
    const auto& m = seq.matrices[k];
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        out += std::to_string(seq.horizon[k]);
        out += ',';
        out += std::to_string(i + 1);
        out += ',';
        out += std::to_string(j + 1);
        out += ',';
        out += format_double(m(i, j));
        out += '\n';
      }
    }
  }
  atomic_write_file(path, out);
}

CovSequence read_cov_csv(const std::string& path) {
  const std::string data = read_whole_file(path, "covariance CSV");
  std::istringstream stream(data);
  std::string line;
  int line_no = 1;
  if (!std::getline(stream, line) || line != "t,i,j,value") {
    throw DataFormatError("covariance CSV must start with the header \"t,i,j,value\": " +
                          path);
  }

  struct Row {
    int t, i, j;
    double value;
  };
  std::vector<Row> rows;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    Row row{};
    int field = 0;
    while (std::getline(cells, cell, ',')) {
      switch (field++) {
        case 0: row.t = static_cast<int>(parse_cell(cell, line_no, "t")); break;
        case 1: row.i = static_cast<int>(parse_cell(cell, line_no, "i")); break;
        case 2: row.j = static_cast<int>(parse_cell(cell, line_no, "j")); break;
        case 3: row.value = parse_cell(cell, line_no, "value"); break;
        default: break;
      }
    }
    if (field != 4) {
      throw DataFormatError("covariance CSV line " + std::to_string(line_no) +
                            " has " + std::to_string(field) + " fields; expected 4");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw DataFormatError("covariance CSV has no data rows: " + path);

  // The first t-group fixes p; every group must then be a full row-major scan.
  std::size_t first_group = 1;
  while (first_group < rows.size() && rows[first_group].t == rows.front().t) ++first_group;
  const int p = static_cast<int>(std::lround(std::sqrt(static_cast<double>(first_group))));
  if (static_cast<std::size_t>(p) * p != first_group) {
    throw DataFormatError("covariance CSV first time group has " +
                          std::to_string(first_group) + " rows, not a square count");
  }
  if (rows.size() % first_group != 0) {
    throw DataFormatError("covariance CSV row count is not a multiple of p² = " +
                          std::to_string(first_group));
  }

  CovSequence seq;
  seq.kind = CovKind::Smoothed;
  const std::size_t groups = rows.size() / first_group;
  std::size_t k = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    Eigen::MatrixXd m(p, p);
    const int t = rows[k].t;
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j, ++k) {
        const Row& row = rows[k];
        if (row.t != t || row.i != i + 1 || row.j != j + 1) {
          throw DataFormatError("covariance CSV rows are not t-grouped row-major near t=" +
                                std::to_string(row.t) + ", i=" + std::to_string(row.i) +
                                ", j=" + std::to_string(row.j));
        }
        m(i, j) = row.value;
      }
    }
    seq.horizon.push_back(t);
    seq.matrices.push_back(std::move(m));
  }
  return seq;
}

void write_cov_binary(const CovSequence& seq, const std::string& path) {
  check_sequence(seq);
  const Eigen::Index p = seq.matrices.front().rows();
  const std::uint32_t T = static_cast<std::uint32_t>(seq.matrices.size());

  std::string out;
  out.reserve(20 + static_cast<std::size_t>(T) * p * p * sizeof(double));
  out.append(kMagic, 8);
  append_u32(out, kBinaryVersion);
  append_u32(out, static_cast<std::uint32_t>(p));
  append_u32(out, T);
  for (const auto& m : seq.matrices) {
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        char bytes[sizeof(double)];
        const double v = m(i, j);
        std::memcpy(bytes, &v, sizeof(double));
        out.append(bytes, sizeof(double));
      }
    }
  }
  atomic_write_file(path, out);
}

CovSequence read_cov_binary(const std::string& path) {
  const std::string data = read_whole_file(path, "covariance dump");
  if (data.size() < 20 || std::memcmp(data.data(), kMagic, 8) != 0) {
    throw DataFormatError("not a covariance dump (bad magic): " + path);
  }
  const std::uint32_t version = read_u32(data, 8);
  if (version != kBinaryVersion) {
    throw DataFormatError("unsupported covariance dump version " +
                          std::to_string(version) + ": " + path);
  }
  const std::uint32_t p = read_u32(data, 12);
  const std::uint32_t T = read_u32(data, 16);
  if (p < 1 || T < 1) {
    throw DataFormatError("covariance dump declares empty dimensions: " + path);
  }
  const std::size_t expected =
      20 + static_cast<std::size_t>(T) * p * p * sizeof(double);
  if (data.size() != expected) {
    throw DataFormatError("covariance dump size " + std::to_string(data.size()) +
                          " does not match header (expected " +
                          std::to_string(expected) + "): " + path);
  }

  CovSequence seq;
  seq.kind = CovKind::Smoothed;
  std::size_t offset = 20;
  for (std::uint32_t t = 0; t < T; ++t) {
    Eigen::MatrixXd m(p, p);
    for (std::uint32_t i = 0; i < p; ++i) {
      for (std::uint32_t j = 0; j < p; ++j) {
        double v;
        std::memcpy(&v, data.data() + offset, sizeof(double));
        offset += sizeof(double);
        m(i, j) = v;
      }
    }
    seq.horizon.push_back(static_cast<int>(t) + 1);
    seq.matrices.push_back(std::move(m));
  }
  return seq;
}

}  // namespace msv
