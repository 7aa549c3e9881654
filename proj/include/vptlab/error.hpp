#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vptlab {

enum class ErrorKind {
  Validation,
  ResourceLimit,
  PrecisionExhausted,
  DomainError,
  NoExtremum,
  NoConvergence,
  NonConvergent,
  InsufficientPrecision,
  FitDiverged,
  DegenerateFit,
  DivisionByZero,
  PoleAtIndex,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// True for failures of a numerical procedure (as opposed to bad input or IO).
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Error carrying an offending index (DivisionByZero, PoleAtIndex) or order.
class IndexedError : public Error {
 public:
  IndexedError(ErrorKind kind, long index, const std::string& what)
      : Error(kind, what), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

}  // namespace vptlab
