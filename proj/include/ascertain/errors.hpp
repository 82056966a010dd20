#pragma once

#include <stdexcept>
#include <string>

namespace ascertain {

// Raised when an input file or JSON document cannot be parsed or violates the
// config schema. Maps to CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when observed count data cannot support estimation (an empty
// denominator). Maps to CLI exit code 3.
class degenerate_counts_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the effective-hazard-ratio equation has no root for the given
// inputs, or iteration fails to converge. Maps to CLI exit code 4.
class solver_error : public std::runtime_error {
 public:
  enum class kind { no_solution, no_convergence };

  solver_error(kind k, const std::string& message)
      : std::runtime_error(message), kind_(k) {}

  kind failure_kind() const { return kind_; }

 private:
  kind kind_;
};

}  // namespace ascertain
