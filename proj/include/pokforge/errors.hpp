#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pokforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LengthError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or corrupted serialized artifact.
class FormatError : public Error {
 public:
  using Error::Error;
};

class SampleSizeError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve ran out of iterations; carries the residual it reached.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class OverProgramError : public Error {
 public:
  using Error::Error;
};

class UnderProgramError : public Error {
 public:
  using Error::Error;
};

/// A read pulse would have heated some cell to the melting point.
class ReadDisturbError : public Error {
 public:
  using Error::Error;
};

/// Path resistance contrast below the configured floor. The bit is still
/// available; `index` is the position inside a word read (0 for single cells).
class WeakCellError : public Error {
 public:
  WeakCellError(const std::string& what, int bit, double contrast,
                std::size_t index = 0)
      : Error(what), bit_(bit), contrast_(contrast), index_(index) {}
  int bit() const noexcept { return bit_; }
  double contrast() const noexcept { return contrast_; }
  std::size_t index() const noexcept { return index_; }

 private:
  int bit_;
  double contrast_;
  std::size_t index_;
};

class EnrollError : public Error {
 public:
  using Error::Error;
};

class KeyMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace pokforge
