#include "ensctl/matrix_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace ensctl {

ParseError::ParseError(const std::string& what, int line, int column)
    : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
      line_(line),
      column_(column) {}

namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '#') continue;

    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const int column = static_cast<int>(pos) + 1;
      const auto start = field.find_first_not_of(" \t\r");
      if (start == std::string::npos) throw ParseError("empty field", line_no, column);
      const char* begin = field.c_str() + start;
      char* end = nullptr;
      errno = 0;
      const double value = std::strtod(begin, &end);
      if (end == begin || !blank(std::string(end)) || errno == ERANGE) {
        throw ParseError("not a number: '" + field + "'", line_no, column + static_cast<int>(start));
      }
      row.push_back(value);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw RaggedRows("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                       " fields, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", line_no + 1, 1);

  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Matrix load_matrix(const std::string& path) { return parse_matrix(read_file(path)); }

Vector load_vector(const std::string& path) {
  const Matrix m = load_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw ShapeMismatch(path + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                      ", expected a single row or column");
}

std::string format_matrix(const Matrix& m) {
  std::string out;
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

void save_matrix(const std::string& path, const Matrix& m) { write_file(path, format_matrix(m)); }

void save_vector(const std::string& path, const Vector& v) { write_file(path, format_matrix(v)); }

}  // namespace ensctl
