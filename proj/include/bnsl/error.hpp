#pragma once

#include <stdexcept>
#include <string>

namespace bnsl {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error { using Error::Error; };
struct CyclicGraphError : Error { using Error::Error; };
struct EmptyDatasetError : Error { using Error::Error; };
struct SchemaMismatchError : Error { using Error::Error; };
struct MalformedRowError : Error { using Error::Error; };
struct KOutOfRangeError : Error { using Error::Error; };
struct StateSpaceTooLargeError : Error { using Error::Error; };
struct InfiniteSampleError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Carries the 1-based data row and column of the offending cell.
struct UnknownValueError : Error {
  UnknownValueError(const std::string& msg, long long row, int column)
      : Error(msg), row(row), column(column) {}
  long long row;
  int column;
};

}  // namespace bnsl
