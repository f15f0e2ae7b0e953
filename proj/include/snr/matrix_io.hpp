#pragma once

#include <string>

#include "snr/matrix_stats.hpp"

namespace snr {

/// Headerless comma-separated decimal text, one row per line. Trailing blank
/// lines are ignored. Throws ParseError on a malformed or non-finite token,
/// RaggedRows when rows differ in length, EmptyInput when there are no rows.
Matrix parse_matrix(const std::string& text);
Matrix read_matrix(const std::string& path);

/// 17 significant digits, so parse_matrix(format_matrix(m)) == m bitwise.
std::string format_matrix(const Matrix& m);
void write_matrix(const std::string& path, const Matrix& m);

}  // namespace snr
