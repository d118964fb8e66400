#pragma once

#include <stdexcept>
#include <string>

namespace kvstream {

// Input outside an operation's mathematical domain (empty input, non-finite
// value, dimension mismatch, index out of range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A parameter combination that violates a construction requirement, such as
// threshold separation or a generator precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A state invariant that failed at runtime. Seeing one of these is a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail

}  // namespace kvstream
