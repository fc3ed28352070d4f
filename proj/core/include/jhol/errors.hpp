#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jhol {

// Failure classes map onto CLI exit codes: parse = 2, validation = 3,
// numerical = 4.

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace jhol
