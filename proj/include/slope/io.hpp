#pragma once

#include "slope/sorted_l1.hpp"

#include <iosfwd>
#include <string>

namespace slope {

/// Raised on malformed CSV; message carries the 1-based line number.
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Comma-separated, row-major, no header unless `skip_header`.
Matrix read_matrix_csv(const std::string& path, bool skip_header = false);
Vector read_vector_csv(const std::string& path, bool skip_header = false);

/// 17 significant digits for bit-faithful round trips.
void write_vector_csv(std::ostream& os, const Vector& v);
void write_vector_csv(const std::string& path, const Vector& v);

std::string format_double(double v);

}  // namespace slope
