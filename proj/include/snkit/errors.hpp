#ifndef SNKIT_ERRORS_HPP
#define SNKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace snkit {

/// Caller violated a precondition (bad dimensions, invalid argument).
class UsageError : public std::invalid_argument {
public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// A matrix turned out singular where an inverse was required.
class SingularMatrixError : public std::runtime_error {
public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// A diffusion operator was requested on a region containing void
/// (sigma_t == 0) elements. Carries the offending element id.
class VoidInScopeError : public std::runtime_error {
public:
  VoidInScopeError(const std::string& what, std::size_t element)
      : std::runtime_error(what), element_(element) {}
  std::size_t element() const { return element_; }

private:
  std::size_t element_;
};

/// Malformed input file; message carries line/column where known.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver hit a non-recoverable state (NaN residual etc.).
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Multigrid setup could not proceed (e.g. zero diagonal row).
class AmgSetupError : public std::runtime_error {
public:
  explicit AmgSetupError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace snkit

#endif
