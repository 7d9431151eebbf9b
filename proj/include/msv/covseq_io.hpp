#pragma once

#include <string>

#include "msv/smoother.hpp"

namespace msv {

/// Long-format CSV with header "t,i,j,value": one row per matrix entry,
/// indices 1-based and row-major within each time, t taken from the
/// sequence's horizon labels. Values render in round-trip precision.
void write_cov_csv(const CovSequence& seq, const std::string& path);

/// Reads the long format back. Rows must arrive t-grouped and row-major —
/// exactly as the writer emits them; the matrix dimension is inferred from
/// the first group. The sequence kind is not encoded in the file and
/// defaults to Smoothed.
CovSequence read_cov_csv(const std::string& path);

/// Binary dump: 8-byte magic "MSVCOVB\0", uint32 version (1), uint32 p,
/// uint32 T, then T·p·p row-major little-endian IEEE-754 doubles. Time
/// labels are positional (1..T on read); use the CSV form when real labels
/// matter.
void write_cov_binary(const CovSequence& seq, const std::string& path);
CovSequence read_cov_binary(const std::string& path);

}  // namespace msv
