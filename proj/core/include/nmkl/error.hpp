#pragma once

#include <stdexcept>
#include <string>

namespace nmkl {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, invalid datasets, bad split or noise parameters.
class DataError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatches and invalid arguments to numerical routines.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Non-finite iterates or other failures detected inside a solve.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace nmkl
