#pragma once

#include <string>
#include <vector>

#include "kcurv/conformal.hpp"
#include "kcurv/quadrature.hpp"

namespace kcurv {

/// Rayleigh-type quotient for the power-form factor v > 0 on the flat group,
/// with p = 2 + 2/n:
///
///   Y_k    = integral of v^{p(1-k)+k} sigma_k(V/c)
///   volume = integral of v^p            (the volume of e^{2u} Theta_0)
///   J_k    = Y_k / volume^{1 - 2k/(np)}
///
/// Pointwise v^{p(1-k)+k} sigma_k(V/c) equals (n/2)^k e^{2(n+1)u} times the
/// sigma_k curvature of the rescaled structure, so Y_k is (n/2)^k times its
/// total sigma_k curvature and J_k the volume-normalized value.
/// lambda_estimate divides the (n/2)^k back out, which lands the round CR
/// sphere on binom(n,k) pi^k.
struct FunctionalReport {
  int n = 0;
  int k = 0;
  double Y_k = 0.0;
  double volume = 0.0;
  double J_k = 0.0;
  double lambda_estimate = 0.0;

  // grid used for the estimate
  int grid_level = 0;
  long nodes = 0;
  double tail_numerator = 0.0;
  double tail_volume = 0.0;

  /// |J_k at the refined grid - J_k|; 0 when refinement was skipped.
  double error_estimate = 0.0;
};

/// Evaluates J_k for a power-form structure. The numerator and the volume
/// integral both run over `grid`; radial grids therefore require the factor
/// to be U(n)-invariant. Tail mass above 5% of either integral raises
/// quadrature_error (the integrand does not decay enough to trust the
/// truncation). k = n+1 is rejected up front: it zeroes the normalization
/// exponent 1 - 2k/(np) and J_k stops being scale-invariant there.
[[nodiscard]] FunctionalReport evaluate_Jk(const ConformalStructure& cs,
                                           int k, const QuadratureGrid& grid,
                                           bool refine_for_error = true);

struct SphereLambdaReport {
  int n = 0;
  int k = 0;
  double estimate = 0.0;   // (2/n)^k J_k at the catalog sphere factor
  double target = 0.0;     // binom(n,k) pi^k
  double deviation = 0.0;  // |estimate - target| / target
  FunctionalReport detail;
};

/// J_k at the extremal factor v0 = ((1+r^2)^2 + t^2)^{-n/2}, against the
/// closed-form sphere constant binom(n,k) pi^k.
[[nodiscard]] SphereLambdaReport sphere_lambda(int n, int k,
                                               const QuadratureGrid& grid);

/// First variation of F_k(u) = integral of e^{2(n+1-k)u} sigma_k(A(u)/c)
/// against a compactly supported direction phi, compared with the multiple
/// of I_phi = integral of phi sigma_k(theta~) dV_theta~ that the divergence
/// structure predicts.
///
/// Two constants are reported side by side. With the volume convention used
/// here, dV_theta~ = e^{2(n+1)u} dV, the chain rule on the explicit weight
/// gives +2(n+1-k) I_phi once the curvature cross-term integrates away. The
/// opposite sign convention for the volume weight, dV_theta~ = e^{-2(n+1)u}
/// dV, turns the same exponent into -(n+1) - k and yields -2(n+k+1) I_phi.
/// Both predictions are evaluated so the conventions stay distinguishable
/// in the output instead of being silently reconciled.
struct VariationReport {
  int n = 0;
  int k = 0;
  std::string direction;  // printed form of phi
  double step = 0.0;

  double fd_coarse = 0.0;      // central difference at `step`
  double fd_half = 0.0;        // central difference at `step/2`
  double fd_derivative = 0.0;  // Richardson: (4 fd_half - fd_coarse) / 3

  double I_phi = 0.0;

  // gap_* = |fd_derivative - predicted_*| / max(1, |fd_derivative|,
  // |predicted_*|), so a critical 0 = 0 comparison reads as a small gap
  // instead of dividing two roundoff residues.
  double coeff_transcribed = 0.0;  // -2(n+k+1)
  double predicted_transcribed = 0.0;
  double gap_transcribed = 0.0;

  double coeff_derived = 0.0;  // +2(n+1-k)
  double predicted_derived = 0.0;
  double gap_derived = 0.0;

  double cotton_violation = 0.0;    // max |C| sampled on supp phi
  std::string hypothesis_route;     // "bilinear" or "parallel-schouten"

  // error budget, reported separately so quadrature and differencing stay
  // distinguishable: the first is |I_phi(refined grid) - I_phi| scaled by
  // the derived coefficient, the second the Richardson step size
  double quadrature_error = 0.0;
  double differencing_error = 0.0;
};

/// The cross-term argument needs the Cotton obstruction of e^{2u} Theta_0 to
/// vanish on supp phi. Route one checks the gradient bilinear directly
/// (max |C| <= 1e-8 on the sampled support). Route two accepts a structure
/// whose rescaled Schouten is a single constant multiple of the identity
/// across the support (parallel Schouten forces the covariant obstruction to
/// vanish even though the base-frame bilinear does not). `strict` disables
/// route two; failing both raises hypothesis_error with the max violation.
[[nodiscard]] VariationReport variational_derivative(
    const FieldExpr& u, const FieldExpr& phi, int k,
    const QuadratureGrid& grid, double step = 1e-4, bool strict = false);

struct CriticalityReport {
  int n = 0;
  int k = 0;
  double J_base = 0.0;                // J_k at the sphere factor
  std::vector<double> derivative;     // Richardson dJ_k per direction
  std::vector<double> normalized;     // |dJ| / (|J_base| max|psi/v0|)
  double max_normalized = 0.0;
};

/// Directional derivatives of J_k at the sphere factor v0 along each psi in
/// `directions`, scale-normalized by max |psi/v0| over the grid so bump
/// amplitudes do not distort the verdict. J_k is scale invariant, so any
/// direction proportional to v0 itself differentiates to zero exactly;
/// genuine criticality shows as a small residual along every other
/// direction.
[[nodiscard]] CriticalityReport criticality_check(
    int k, const QuadratureGrid& grid,
    const std::vector<FieldExpr>& directions, double step = 1e-4);

/// sigma_k of a pseudo-Einstein structure with constant Webster scalar R:
/// binom(n,k) (R / (2n(n+1)))^k.
[[nodiscard]] double pseudo_einstein_sigma(int n, int k, double R);

}  // namespace kcurv
