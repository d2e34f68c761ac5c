#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace unfolding {

// Exit codes used by the command line tool: 2, 3, 4 respectively.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResonanceError : DegenerateError {
  using DegenerateError::DegenerateError;
};

// Parameter on (or within tolerance of) a homoclinic hypersurface.
struct BifurcationError : DegenerateError {
  BifurcationError(const std::string& what, std::vector<std::vector<int>> parts)
      : DegenerateError(what), partitions(std::move(parts)) {}
  std::vector<std::vector<int>> partitions;
};

struct EscapeError : NumericError {
  using NumericError::NumericError;
};

struct ContourError : NumericError {
  using NumericError::NumericError;
};

// A sector boundary trajectory left the disk; the angle profile needs adjusting.
struct RemedyError : NumericError {
  using NumericError::NumericError;
};

struct GluingError : NumericError {
  using NumericError::NumericError;
};

}  // namespace unfolding
