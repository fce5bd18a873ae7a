#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bsvd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class MemoryBudgetError : public Error {
 public:
  MemoryBudgetError(const std::string& block, std::size_t requested, std::size_t budget)
      : Error("memory budget exceeded by " + block + ": " + std::to_string(requested) +
              " bytes requested, budget " + std::to_string(budget)),
        block_(block) {}
  const std::string& block() const { return block_; }

 private:
  std::string block_;
};

/// Raised when a Householder reflector is requested for an all-zero vector.
class ZeroColumnError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class SymmetryError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class OrthogonalityError : public Error {
 public:
  using Error::Error;
};

/// The requested norm fraction is only reached with every column in block 1.
class DegenerateCutError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsvd
