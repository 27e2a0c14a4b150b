#pragma once

#include <stdexcept>
#include <string>

namespace dgue {

// Input that violates a documented precondition or schema.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A quantity sits inside a tolerance band where the classification it drives
// cannot be trusted (near-degenerate edges, critical spikes).
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver exhausted its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A root or feature expected from theory was not found where the model says
// it should be.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dgue
