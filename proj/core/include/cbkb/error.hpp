#pragma once

#include <stdexcept>
#include <string>

namespace cbkb {

enum class ErrorCode {
  malformed_name,
  parse_error,
  unknown_object,
  no_anchor,
  cycle_introduced,
  out_of_range,
  ill_typed_expression,
  unsupported,
  gap_in_sequence,
  write_failure,
  corrupt_entry,
  not_registered,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Position is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string expected,
             std::string found);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string expected_;
  std::string found_;
};

}  // namespace cbkb
