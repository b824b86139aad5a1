#include "slope/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace slope {

namespace {

std::vector<std::vector<double>> read_rows(const std::string& path,
                                           bool skip_header) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && skip_header) continue;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw CsvError(path + ": line " + std::to_string(lineno) +
                       ": not a number: '" + cell + "'");
      }
      while (used < cell.size() && std::isspace((unsigned char)cell[used])) ++used;
      if (used != cell.size()) {
        throw CsvError(path + ": line " + std::to_string(lineno) +
                       ": trailing garbage in '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) {
      throw CsvError(path + ": line " + std::to_string(lineno) + ": empty row");
    }
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw CsvError(path + ": line " + std::to_string(lineno) +
                     ": ragged row (expected " +
                     std::to_string(rows.front().size()) + " columns)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError(path + ": no data rows");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix read_matrix_csv(const std::string& path, bool skip_header) {
  const auto rows = read_rows(path, skip_header);
  Matrix m(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[std::size_t(i)][std::size_t(j)];
    }
  }
  return m;
}

Vector read_vector_csv(const std::string& path, bool skip_header) {
  const auto rows = read_rows(path, skip_header);
  if (rows.front().size() != 1) {
    throw CsvError(path + ": expected a single column, got " +
                   std::to_string(rows.front().size()));
  }
  Vector v(Eigen::Index(rows.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rows[std::size_t(i)][0];
  return v;
}

void write_vector_csv(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << format_double(v[i]) << '\n';
}

void write_vector_csv(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot open " + path + " for writing");
  write_vector_csv(out, v);
}

}  // namespace slope
