#pragma once

#include <stdexcept>
#include <string>

namespace lipschitz {

// Malformed input or a violated type invariant (bad determinant, non-reduced
// slope, off-surface trace triple, unparsable file).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The arguments are well formed but the operation does not apply to them,
// e.g. a pinch scan requested for a class that is not reducible.
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A trace of magnitude <= 2 where a hyperbolic element was required.
class DegenerateStructure : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A chart point whose discriminant is negative.
class ChartDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lipschitz
