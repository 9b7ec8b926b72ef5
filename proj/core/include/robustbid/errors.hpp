#pragma once

#include <stdexcept>
#include <string>

namespace robustbid {

// Raised when caller-supplied parameters are out of range or inconsistent.
// The CLI maps this to exit code 2; every other failure maps to exit code 1.
class ParamError : public std::runtime_error {
 public:
  explicit ParamError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an input file cannot be parsed or fails validation.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace robustbid
