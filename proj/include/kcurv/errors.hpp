#pragma once

#include <stdexcept>
#include <string>

namespace kcurv {

/// Error taxonomy mirrored by the CLI exit codes:
///   check_error      -> 1 (a numeric check failed)
///   validation_error -> 2 (malformed or out-of-range input)
///   evaluation_error -> 3 (pointwise domain violation: log of a nonpositive
///                          value, division by zero, v <= 0, ...)
///   quadrature_error -> 4 (non-finite sample, divergent tail, non-convergence)
///   hypothesis_error -> 5 (a theorem hypothesis fails: cone membership,
///                          Cotton admissibility, sigma_k positivity)
struct check_error : std::runtime_error {
  explicit check_error(const std::string& m) : std::runtime_error(m) {}
};
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& m) : std::runtime_error(m) {}
};
struct evaluation_error : std::runtime_error {
  explicit evaluation_error(const std::string& m) : std::runtime_error(m) {}
};
struct quadrature_error : std::runtime_error {
  explicit quadrature_error(const std::string& m) : std::runtime_error(m) {}
};
struct hypothesis_error : std::runtime_error {
  explicit hypothesis_error(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace kcurv
