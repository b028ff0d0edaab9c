#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "kcurv/errors.hpp"

namespace kcurv {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;

/// Validated hermitian matrix. Construction symmetrizes (A + A^dagger)/2 after
/// checking the hermitian defect entrywise.
struct HermitianMatrix {
  MatC a;

  [[nodiscard]] int dim() const { return static_cast<int>(a.rows()); }

  /// Validates |A - A^dagger| <= tol * max(1, max|A|) per entry, then stores
  /// the symmetrized matrix. Throws validation_error otherwise.
  static HermitianMatrix from(const MatC& raw, double tol = 1e-12);

  /// Trusted constructor for matrices hermitian by assembly; still
  /// symmetrizes to kill roundoff drift.
  static HermitianMatrix assembled(const MatC& raw);
};

/// Eigenvalues in ascending order (self-adjoint solver).
[[nodiscard]] VecR eigenvalues(const HermitianMatrix& A);

/// Elementary symmetric functions e_0..e_m of the entries of lam, via the
/// stable one-pass recurrence (descending inner index).
[[nodiscard]] VecR elementary_symmetric(const VecR& lam);

/// Exact binomial coefficient as double (n <= 60 or so; plenty here).
[[nodiscard]] double binom(int n, int k);

/// sigma_k(A) = e_k(eigenvalues). sigma_0 = 1. Throws validation_error for
/// k < 0 or k > dim.
[[nodiscard]] double sigma_k(const HermitianMatrix& A, int k);

/// Independent oracle: sum of principal k x k minors (the Kronecker-symbol
/// expansion grouped into subset determinants). Intended for dim <= 8.
[[nodiscard]] double sigma_k_minors(const HermitianMatrix& A, int k);

/// Newton transform T_m(A) via the recurrence T_0 = I,
/// T_m = sigma_m(A) I - T_{m-1} A. Valid for 0 <= m <= dim.
[[nodiscard]] HermitianMatrix newton_transform(const HermitianMatrix& A, int m);

/// Direct polynomial form T_m = sum_{j<=m} (-1)^j sigma_{m-j}(A) A^j,
/// used as the cross-check route for the recurrence.
[[nodiscard]] HermitianMatrix newton_transform_direct(const HermitianMatrix& A,
                                                      int m);

/// Garding cone membership: in_cone[j-1] = (sigma_j > 0) for j = 1..k;
/// member = all of them.
struct ConeReport {
  int k = 0;
  std::vector<double> sigmas;   // sigma_1..sigma_k
  std::vector<bool> in_cone;    // per j
  bool member = false;
};
[[nodiscard]] ConeReport cone_membership(const HermitianMatrix& A, int k);

/// Slack report for the two sharp inequalities on Gamma_k^+ and the
/// equality detector. slack_ratio (the Maclaurin-quotient form
/// (n-k)/(n(k+1)) sigma_k sigma_1 - sigma_{k+1}) exists only for k <= n-1.
/// slack_power = sigma_{k-1} - k/(n-k+1) C(n,k)^{1/k} sigma_k^{(k-1)/k}
/// is identically zero at k = 1, so equality detection uses slack_ratio.
struct InequalityReport {
  int n = 0, k = 0;
  double sigma_km1 = 0.0, sigma_k = 0.0;
  std::optional<double> sigma_kp1;
  std::optional<double> slack_ratio;
  double slack_power = 0.0;
  bool equality = false;  // slack_ratio ~ 0 at scale tolerance (k <= n-1)
  double tol = 0.0;       // absolute tolerance used for the equality call
};

/// Preconditions A in Gamma_k^+ (throws hypothesis_error otherwise).
[[nodiscard]] InequalityReport inequality_suite(const HermitianMatrix& A,
                                                int k);

/// Concavity gap of sigma_k^{1/k} along the segment (1-t)A + tB at the given
/// t-samples; both endpoints must lie in Gamma_k^+ and every sampled interior
/// matrix is re-checked (hypothesis_error on exit from the cone).
struct ConcavityReport {
  std::vector<double> t;
  std::vector<double> gap;  // f((1-t)A+tB) - (1-t)f(A) - t f(B), f = sigma_k^{1/k}
  double min_gap = 0.0;
};
[[nodiscard]] ConcavityReport concavity_check(const HermitianMatrix& A,
                                              const HermitianMatrix& B, int k,
                                              const std::vector<double>& ts);

/// Hermitian representative of the raised-index block: with h = L L^dagger,
/// returns M = L^{-1} S L^{-dagger}, similar to S h^{-1} (same spectrum and
/// sigma_k). h must be positive definite (validation_error otherwise).
[[nodiscard]] HermitianMatrix raise_index(const HermitianMatrix& S_lower,
                                          const HermitianMatrix& h);

}  // namespace kcurv
