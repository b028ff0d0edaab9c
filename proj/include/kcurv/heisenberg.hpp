#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "kcurv/errors.hpp"
#include "kcurv/field.hpp"

namespace kcurv {

/// Normalization record for the flat model (H^n, Theta_0). Every quantity
/// downstream reads these three constants; they are fixed once per run.
///
///   h_{ab~}     = levi_scale * delta_ab
///   T_a         = d/dz^a + frame_sign * i * conj(z^a) * d/dt
///   dV_{Theta0} = kappa() * dx dy dt
///
/// The defaults (c = 2, s = +1, kappa = 4^n n!) are pinned by the
/// calibration test that forces lambda_1(S^3) = pi.
struct ModelConvention {
  int n = 1;
  double levi_scale = 2.0;
  double frame_sign = 1.0;

  [[nodiscard]] int dim() const { return 2 * n + 1; }
  [[nodiscard]] double kappa() const;
  void validate() const;
};

/// Point of H^n: z = (x_1 + i y_1, ..., x_n + i y_n), t. Stored flat as
/// (x_1..x_n, y_1..y_n, t), the same slot layout FieldExpr uses.
struct HPoint {
  Eigen::VectorXd v;

  explicit HPoint(Eigen::VectorXd coords);
  [[nodiscard]] int n() const { return (static_cast<int>(v.size()) - 1) / 2; }
  [[nodiscard]] double x(int a) const { return v(a); }
  [[nodiscard]] double y(int a) const { return v(n() + a); }
  [[nodiscard]] double t() const { return v(2 * n()); }
  [[nodiscard]] std::complex<double> z(int a) const { return {x(a), y(a)}; }
  [[nodiscard]] const Eigen::VectorXd& flat() const { return v; }
};

/// Frame derivatives of a real scalar u at one point, up to the third-order
/// components the Cotton assembly needs. Index convention: the rightmost
/// subscript is the outermost derivative, so u_{ab~} = T_b~ T_a u.
///
///   u_alpha(a)         = T_a u
///   u_albe_bar(a,b)    = u_{ab~}   = T_b~ T_a u
///   u_bebar_al(a,b)    = u_{b~a}   = T_a T_b~ u
///   u_alpha_beta(a,b)  = u_{ab}    = T_b T_a u
///   third[s](a,b)      = u_{ab~;s} = T_s T_b~ T_a u
///   third_ba[s](a,b)   = u_{b~a;s} = T_s T_a T_b~ u
///
/// For real u, u_bebar_al equals the conjugate transpose of u_albe_bar and
/// the commutation identity u_{ab~} - u_{b~a} = i u0 h_{ab~} holds.
struct CovariantJet {
  int n = 0;
  double u = 0.0;
  double u0 = 0.0;
  Eigen::VectorXcd u_alpha;
  Eigen::MatrixXcd u_albe_bar;
  Eigen::MatrixXcd u_bebar_al;
  Eigen::MatrixXcd u_alpha_beta;
  std::vector<Eigen::MatrixXcd> third;
  std::vector<Eigen::MatrixXcd> third_ba;
};

[[nodiscard]] CovariantJet frame_derivatives(const Jet3& jet,
                                             const HPoint& point,
                                             const ModelConvention& conv);
[[nodiscard]] CovariantJet frame_derivatives(const FieldExpr& u,
                                             const HPoint& point,
                                             const ModelConvention& conv);

/// Delta_b u = -(u_a{}^a + u_a~{}^a~), indices raised by h^{ab~} = delta/c.
/// Throws check_error if the imaginary residue exceeds 1e-10 relative.
[[nodiscard]] double sublaplacian(const CovariantJet& cj,
                                  const ModelConvention& conv);

/// |du|^2 = 2 u_a conj(u_a) / c >= 0
[[nodiscard]] double grad_norm_sq(const CovariantJet& cj,
                                  const ModelConvention& conv);

}  // namespace kcurv
