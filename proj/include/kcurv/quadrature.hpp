#pragma once

#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "kcurv/heisenberg.hpp"

namespace kcurv {

/// Tensor-product Gauss-Legendre grids over H^n = R^{2n+1}, in four flavors:
///
///   full_tan    all 2n+1 axes mapped by x = L tan(pi xi / 2); whole space
///   full_box    plain Gauss product on [-w, w]^{2n+1); compact supports
///   radial_tan  (rho, t) half-plane with weight omega_{2n} rho^{2n-1};
///               valid only for U(n)-invariant integrands, which are
///               sampled at z = (rho, 0, ..., 0)
///   radial_box  same reduction on a compact (rho, t) box
///
/// Weights already include kappa_n, the angular factor and all jacobians, so
/// sum_i w_i f(p_i) approximates integral f dV_{Theta0}. The tan map makes
/// integrands with polynomial decay analytic on the closed parameter cube,
/// so refinement converges geometrically.
struct QuadratureGrid {
  enum class kind { full_tan, full_box, radial_tan, radial_box };

  kind k = kind::radial_tan;
  int n = 1;
  int level = 0;
  Eigen::MatrixXd points;   // K x (2n+1) node coordinates
  Eigen::VectorXd weights;  // K
  // nodes whose parameter-space coordinate lies in the outer decile; used
  // by the tail_fraction divergence heuristic
  std::vector<bool> outer;
  // construction parameters, kept so refined() can rebuild
  double z_len = 0, t_len = 0, rho_max = 0, t_min = 0, t_max = 0,
         half_width = 0;

  [[nodiscard]] static QuadratureGrid radial(const ModelConvention& conv,
                                             int level, double z_len = 4.0,
                                             double t_len = 8.0);
  [[nodiscard]] static QuadratureGrid radial_box(const ModelConvention& conv,
                                                 int level, double rho_max,
                                                 double t_min, double t_max);
  [[nodiscard]] static QuadratureGrid full(const ModelConvention& conv,
                                           int level, double z_len = 4.0,
                                           double t_len = 8.0);
  [[nodiscard]] static QuadratureGrid box(const ModelConvention& conv,
                                          int level, double half_width);
  [[nodiscard]] QuadratureGrid refined() const;
  [[nodiscard]] long node_count() const { return weights.size(); }
};

struct IntegrateResult {
  double value = 0.0;
  /// share of sum |w f| carried by the outer parameter band; values that are
  /// not << 1 indicate the integrand decays too slowly for the grid
  double tail_fraction = 0.0;
  long nodes = 0;
};

using Integrand = std::function<double(const Eigen::VectorXd&)>;

/// Sum of w_i f(p_i), optionally times the conformal volume factor
/// e^{2(n+1)u} of theta~ = e^{2u} Theta_0. Node evaluation may run on
/// several threads; the reduction is a fixed-order pairwise tree, so the
/// result is bitwise identical for every worker count. Non-finite samples
/// raise quadrature_error naming the node.
[[nodiscard]] IntegrateResult integrate(const QuadratureGrid& grid,
                                        const Integrand& f,
                                        const FieldExpr* conformal_weight =
                                            nullptr,
                                        int workers = 0);

/// value at level+1 together with |level+1 - level| as the error estimate
[[nodiscard]] std::pair<double, double> refinement_error(
    const QuadratureGrid& grid, const Integrand& f,
    const FieldExpr* conformal_weight = nullptr, int workers = 0);

/// Gauss-Legendre nodes and weights on [-1, 1]
[[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(
    int m);

}  // namespace kcurv
