#pragma once

#include <stdexcept>
#include <string>

namespace riklr {

/// Invalid argument or malformed data supplied by the caller.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Eigensolver failure, non-finite intermediate values.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request exceeds a configured memory cap.
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unparseable input file; the message carries row and column.
class parse_error : public input_error {
 public:
  parse_error(const std::string& what, std::size_t row, std::size_t column)
      : input_error(what + " (row " + std::to_string(row) + ", column " +
                    std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Inconsistent configuration (missing keys, wrong types, empty grids).
class config_error : public input_error {
 public:
  using input_error::input_error;
};

}  // namespace riklr
