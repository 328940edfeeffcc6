#pragma once

#include "ensctl/types.hpp"

#include <string>

namespace ensctl {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed numeric text; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class RaggedRows : public Error {
 public:
  using Error::Error;
};

/// Comma-separated rows of reals. Blank lines and lines starting with '#'
/// are skipped; a file with no data rows is a ParseError.
Matrix parse_matrix(const std::string& text);
Matrix load_matrix(const std::string& path);

/// A vector file is either one row or one column.
Vector load_vector(const std::string& path);

/// Writes with 17 significant digits so load(save(m)) == m.
void save_matrix(const std::string& path, const Matrix& m);
void save_vector(const std::string& path, const Vector& v);  // one entry per line
std::string format_matrix(const Matrix& m);

}  // namespace ensctl
