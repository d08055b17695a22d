#pragma once

#include <stdexcept>
#include <string>

namespace lrdseg {

/// Broad failure category. The CLI maps each to a distinct exit code.
enum class ErrorKind {
  invalid_argument,  // parameter outside its documented range
  data,              // unreadable or malformed input
  numeric,           // estimation could not produce a finite answer
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::invalid_argument, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

/// Every periodogram ordinate of a segment is zero, so the local Whittle
/// contrast is -infinity there.
class DegenerateSegment : public NumericError {
 public:
  explicit DegenerateSegment(const std::string& what) : NumericError(what) {}
};

/// The candidate grid cannot host the requested number of breaks, or no
/// finite-cost segmentation exists.
class InfeasibleSegmentation : public NumericError {
 public:
  explicit InfeasibleSegmentation(const std::string& what)
      : NumericError(what) {}
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return "invalid_argument";
    case ErrorKind::data:
      return "data";
    case ErrorKind::numeric:
      return "numeric";
  }
  return "unknown";
}

}  // namespace lrdseg
