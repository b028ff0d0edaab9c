#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "kcurv/heisenberg.hpp"
#include "kcurv/symfun.hpp"

namespace kcurv {

/// theta~ = e^{2u} Theta_0, in one of two parameterizations of the same
/// deformation:
///
///   log form    factor = u
///   power form  factor = v > 0, with e^{2u} = v^{p-2}, p = 2 + 2/n
enum class factor_form { log_u, power_v };

struct ConformalStructure {
  ModelConvention conv;
  factor_form form = factor_form::log_u;
  FieldExpr factor;

  /// the log-form field u; for the power form this is log(v)/n
  [[nodiscard]] FieldExpr log_factor() const;
  /// the power-form field v; for the log form this is exp(n u)
  [[nodiscard]] FieldExpr power_factor() const;
  /// u at the point (power form checks v > 0 first)
  [[nodiscard]] double u_at(const HPoint& p) const;
  /// e^{2u} at the point
  [[nodiscard]] double weight_at(const HPoint& p) const;
};

[[nodiscard]] ConformalStructure log_structure(const ModelConvention& conv,
                                               FieldExpr u);
[[nodiscard]] ConformalStructure power_structure(const ModelConvention& conv,
                                                 FieldExpr v);

/// Deformed Schouten tensor at one point, in base-coframe components. The
/// flat base has S = 0, so only the deformation survives:
///
///   S_lower(a,b) = -(u_{ab~} + u_{b~a}) - |du|^2 h_{ab~}
///
/// (the transformation law's i u0 h term is absorbed by writing the hessian
/// part in hermitized form). S_mixed raises one index with the deformed
/// Levi form h~ = e^{2u} h, so sigma_k(S_mixed) is the k-curvature of
/// theta~.
struct SchoutenAtPoint {
  double u = 0.0;       // log-form exponent at the point
  double weight = 1.0;  // e^{2u}
  CovariantJet jet;     // frame jet of the log-form factor, kept for callers
  HermitianMatrix S_lower;
  HermitianMatrix S_mixed;
  /// power form only: relative gap between the u-route and the V-route
  double route_gap = 0.0;
};

/// Power form evaluates S_lower twice, through the u-jet and through
/// (2/(nv)) V[v], and throws check_error if they disagree beyond 1e-8
/// relative. Power form with v <= 0 at the point throws evaluation_error.
[[nodiscard]] SchoutenAtPoint schouten(const ConformalStructure& cs,
                                       const HPoint& p);

/// Hermitized V[v] tensor of the power form (lower indices):
///
///   V(a,b) = -(v_{ab~} + v_{b~a})/2 + v_a conj(v_b)/v
///            - (|dv|^2 / (2 n v)) h_{ab~}
///
/// Satisfies S_lower = (2/(nv)) V identically; schouten() asserts it.
[[nodiscard]] HermitianMatrix V_tensor(const ConformalStructure& cs,
                                       const HPoint& p);

/// sigma_k(theta~) at the point: sigma_k of the mixed deformed Schouten
/// block, equal to e^{-2ku} sigma_k(A/c) with A the lower block.
[[nodiscard]] double sigma_k_curvature(const ConformalStructure& cs,
                                       const HPoint& p, int k);

/// Pointwise residuals of the constant-k-curvature equation, in both
/// parameterizations. They vanish together: the v-form equals the u-form
/// times (n/2)^k v^{(1-k)(n+2)/n + k} > 0.
///
/// lambda_hat is the v-form constant our own algebra derives,
/// (n/2)^k lambda. lambda_hat_alt carries the extra factor k that the
/// transcribed constant shows; it is reported alongside so the discrepancy
/// stays visible instead of being silently resolved.
struct YamabeResidual {
  double u_form = 0.0;  // sigma_k(A_mixed) - lambda e^{2ku}
  double v_form = 0.0;  // v^{(1-k)(n+2)/n} sigma_k(V_mixed) - lambda_hat v^{(n+2)/n}
  double lambda = 0.0;
  double lambda_hat = 0.0;
  double lambda_hat_alt = 0.0;
};
[[nodiscard]] YamabeResidual yamabe_residual(const ConformalStructure& cs,
                                             int k, double lambda,
                                             const HPoint& p);

/// Reduced Cotton obstruction on the torsion-free base:
///
///   C[s](a,b) = -2 (u_a u_{b~s} - u_s u_{b~a})
///
/// antisymmetric under a <-> s by assembly. Its vanishing is the
/// Cotton-admissibility condition. Note this is a base-frame reduction, not
/// the conformally covariant Cotton tensor itself: the scaled sphere
/// structure has parallel Schouten (so covariant Cotton zero) yet C != 0
/// for n >= 2.
struct CottonAtPoint {
  int n = 0;
  std::vector<Eigen::MatrixXcd> C;  // C[s](a,b)
  [[nodiscard]] double max_abs() const;
};
[[nodiscard]] CottonAtPoint cotton(const ConformalStructure& cs,
                                   const HPoint& p);

/// Third-order assembly T_s A_{ab~} - T_a A_{sb~} of the lower Schouten
/// components along the base frame, built from the third-order jets. The
/// frame commutation identities collapse it to first/second-order data:
///
///   2 i s (d_{sb} G_a - d_{ab} G_s) - 2 (d_{ab} P_s - d_{sb} P_a)
///
/// with G_a = T_a(u0) and P_s = sum_g (u_{gs} conj(u_g) + u_g u_{g~s}).
/// The test suite verifies that cancellation; it is the third-order analogue
/// of the second-order commutation check.
[[nodiscard]] CottonAtPoint cotton_direct(const ConformalStructure& cs,
                                          const HPoint& p);

struct AdmissibilityReport {
  bool admissible = false;
  double max_violation = 0.0;
  std::size_t worst_point = 0;  // index into the sample vector
};

/// max over samples of max_{a,b,s} |u_a u_{b~s} - u_s u_{b~a}| compared
/// against tol. The sample set must be nonempty.
[[nodiscard]] AdmissibilityReport cotton_admissible(
    const FieldExpr& u, const std::vector<HPoint>& points,
    const ModelConvention& conv, double tol);

/// Gamma_j^+ membership of S_mixed for j <= k, one report per point.
[[nodiscard]] std::vector<ConeReport> k_positive(
    const ConformalStructure& cs, const std::vector<HPoint>& points, int k);

/// Ellipticity of the sigma_k operator at the structure, over the samples:
/// min eigenvalue of T_{k-1}(S_mixed), plus a verification of the
/// linearization
///
///   DF(phi) = tr(T_{k-1}(S_mixed) Sdot(phi)),
///   Sdot    = e^{-2u} (Adot/c - 2 phi A/c),
///   Adot    = -(phi_{ab~} + phi_{b~a}) - 2<du,dphi> h
///
/// against a central difference of sigma_k_curvature under u -> u + s phi.
/// Requires sigma_k(S_mixed) > 0 at every sample (hypothesis_error names
/// the failing point otherwise).
struct EllipticityReport {
  double min_eigenvalue = 0.0;
  std::size_t worst_point = 0;  // sample attaining the minimum
  double max_linearization_gap = 0.0;
  [[nodiscard]] bool elliptic() const { return min_eigenvalue > 0.0; }
};
[[nodiscard]] EllipticityReport ellipticity_certificate(
    const ConformalStructure& cs, int k, const std::vector<HPoint>& points,
    const FieldExpr& direction, double fd_step = 1e-5);

}  // namespace kcurv
