#include "kcurv/functional.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include "kcurv/errors.hpp"
#include "kcurv/field.hpp"
#include "kcurv/symfun.hpp"

namespace kcurv {

namespace {

void require_k_range(int k, int n, const char* who) {
  if (k < 1 || k > n) {
    std::ostringstream os;
    os << who << ": k must satisfy 1 <= k <= n; got k = " << k
       << " with n = " << n;
    throw validation_error(os.str());
  }
}

HPoint node_point(const QuadratureGrid& grid, long i) {
  return HPoint(grid.points.row(i).transpose());
}

// base + s * dir. The sign lives in the node choice so literal constants
// stay nonnegative.
FieldExpr shifted_field(const FieldExpr& base, const FieldExpr& dir,
                        double s) {
  if (s >= 0.0)
    return FieldExpr{base.n, e_add(base.root, e_mul(e_const(s), dir.root))};
  return FieldExpr{base.n, e_sub(base.root, e_mul(e_const(-s), dir.root))};
}

void check_tail(const IntegrateResult& r, const char* what) {
  if (r.tail_fraction > 0.05) {
    std::ostringstream os;
    os << "the " << what << " integral does not decay: tail fraction "
       << r.tail_fraction << " exceeds 0.05";
    throw quadrature_error(os.str());
  }
}

}  // namespace

FunctionalReport evaluate_Jk(const ConformalStructure& cs, int k,
                             const QuadratureGrid& grid,
                             bool refine_for_error) {
  if (cs.form != factor_form::power_v)
    throw validation_error(
        "evaluate_Jk needs a power-form structure (factor v > 0)");
  const int n = cs.conv.n;
  if (grid.n != n)
    throw validation_error("evaluate_Jk: grid dimension does not match the "
                           "structure");
  if (k == n + 1) {
    std::ostringstream os;
    os << "evaluate_Jk: k = n + 1 = " << k
       << " zeroes the normalization exponent 1 - 2k/(np); the quotient is "
          "not scale invariant there and is rejected";
    throw validation_error(os.str());
  }
  require_k_range(k, n, "evaluate_Jk");

  const double c = cs.conv.levi_scale;
  const double p = 2.0 + 2.0 / n;
  const double num_exp = p * (1.0 - k) + k;

  const Integrand num_f = [&](const Eigen::VectorXd& x) {
    const double v = eval_value(cs.factor, x);
    const HermitianMatrix V = V_tensor(cs, HPoint(x));
    const HermitianMatrix Vm = HermitianMatrix::assembled(V.a / c);
    return std::pow(v, num_exp) * sigma_k(Vm, k);
  };
  const Integrand den_f = [&](const Eigen::VectorXd& x) {
    return std::pow(eval_value(cs.factor, x), p);
  };

  const IntegrateResult rn = integrate(grid, num_f);
  const IntegrateResult rd = integrate(grid, den_f);
  check_tail(rn, "numerator");
  check_tail(rd, "volume");

  FunctionalReport rep;
  rep.n = n;
  rep.k = k;
  rep.Y_k = rn.value;
  rep.volume = rd.value;
  rep.J_k = rn.value / std::pow(rd.value, 1.0 - 2.0 * k / (n * p));
  rep.lambda_estimate = std::pow(2.0 / n, k) * rep.J_k;
  rep.grid_level = grid.level;
  rep.nodes = rn.nodes;
  rep.tail_numerator = rn.tail_fraction;
  rep.tail_volume = rd.tail_fraction;
  if (refine_for_error) {
    const FunctionalReport fine = evaluate_Jk(cs, k, grid.refined(), false);
    rep.error_estimate = std::abs(fine.J_k - rep.J_k);
  }
  return rep;
}

SphereLambdaReport sphere_lambda(int n, int k, const QuadratureGrid& grid) {
  if (n < 1)
    throw validation_error("sphere_lambda: n must be at least 1");
  require_k_range(k, n, "sphere_lambda");
  ModelConvention conv;
  conv.n = n;
  conv.validate();

  SphereLambdaReport rep;
  rep.n = n;
  rep.k = k;
  rep.detail =
      evaluate_Jk(power_structure(conv, catalog_v0(n)), k, grid, true);
  rep.estimate = rep.detail.lambda_estimate;
  rep.target = binom(n, k) * std::pow(std::numbers::pi, k);
  rep.deviation = std::abs(rep.estimate - rep.target) / rep.target;
  return rep;
}

VariationReport variational_derivative(const FieldExpr& u,
                                       const FieldExpr& phi, int k,
                                       const QuadratureGrid& grid, double step,
                                       bool strict) {
  const int n = grid.n;
  ModelConvention conv;
  conv.n = n;
  conv.validate();
  if (u.n != n || phi.n != n)
    throw validation_error(
        "variational_derivative: field dimension does not match the grid");
  require_k_range(k, n, "variational_derivative");
  if (!(step > 0.0))
    throw validation_error("variational_derivative: step must be positive");

  // Sample the direction's support on the grid nodes.
  std::vector<long> support;
  for (long i = 0; i < grid.points.rows(); ++i)
    if (eval_value(phi, grid.points.row(i).transpose()) != 0.0)
      support.push_back(i);
  if (support.empty())
    throw validation_error(
        "variational_derivative: the direction vanishes at every grid node");
  const std::size_t stride =
      std::max<std::size_t>(1, support.size() / std::size_t{64});
  std::vector<HPoint> samples;
  for (std::size_t j = 0; j < support.size(); j += stride)
    samples.push_back(node_point(grid, support[j]));

  VariationReport rep;
  rep.n = n;
  rep.k = k;
  rep.direction = print_field(phi);
  rep.step = step;
  rep.coeff_transcribed = -2.0 * (n + k + 1);
  rep.coeff_derived = 2.0 * (n + 1 - k);

  const AdmissibilityReport adm = cotton_admissible(u, samples, conv, 1e-8);
  rep.cotton_violation = adm.max_violation;
  if (adm.admissible) {
    rep.hypothesis_route = "bilinear";
  } else if (strict) {
    std::ostringstream os;
    os << "variational_derivative: the Cotton obstruction does not vanish on "
          "the direction support (max |C| = "
       << adm.max_violation << "); strict mode allows no waiver";
    throw hypothesis_error(os.str());
  } else {
    // Parallel-Schouten waiver: one constant multiple of the identity across
    // the whole sampled support.
    const ConformalStructure cs0 = log_structure(conv, u);
    std::vector<double> lams;
    double worst_shape = 0.0;
    for (const HPoint& pt : samples) {
      const SchoutenAtPoint sp = schouten(cs0, pt);
      const double lam = sp.S_mixed.a.trace().real() / n;
      double shape = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const std::complex<double> want =
              a == b ? std::complex<double>(lam, 0.0)
                     : std::complex<double>(0.0, 0.0);
          shape = std::max(shape, std::abs(sp.S_mixed.a(a, b) - want));
        }
      worst_shape =
          std::max(worst_shape, shape / std::max(1.0, std::abs(lam)));
      lams.push_back(lam);
    }
    double lam_bar = 0.0;
    for (double l : lams) lam_bar += l;
    lam_bar /= static_cast<double>(lams.size());
    double spread = 0.0;
    for (double l : lams) spread = std::max(spread, std::abs(l - lam_bar));
    spread /= std::max(1.0, std::abs(lam_bar));
    if (worst_shape > 1e-8 || spread > 1e-8) {
      std::ostringstream os;
      os << "variational_derivative: the Cotton obstruction does not vanish "
            "on the direction support (max |C| = "
         << adm.max_violation
         << ") and the rescaled Schouten tensor is not a constant multiple "
            "of the identity there (shape defect "
         << worst_shape << ", spread " << spread << ")";
      throw hypothesis_error(os.str());
    }
    rep.hypothesis_route = "parallel-schouten";
  }

  // F(s) = integral of e^{2(n+1-k)(u+s phi)} sigma_k(A(u+s phi)/c); written
  // below as weight^{n+1} sigma_k(S~) which is the same product.
  const auto F_of = [&](double s) {
    const ConformalStructure cs = log_structure(conv, shifted_field(u, phi, s));
    const Integrand f = [&](const Eigen::VectorXd& x) {
      const SchoutenAtPoint sp = schouten(cs, HPoint(x));
      return std::pow(sp.weight, n + 1) * sigma_k(sp.S_mixed, k);
    };
    return integrate(grid, f).value;
  };

  {
    const ConformalStructure cs0 = log_structure(conv, u);
    const Integrand f = [&](const Eigen::VectorXd& x) {
      const double ph = eval_value(phi, x);
      if (ph == 0.0) return 0.0;
      const SchoutenAtPoint sp = schouten(cs0, HPoint(x));
      return ph * std::pow(sp.weight, n + 1) * sigma_k(sp.S_mixed, k);
    };
    rep.I_phi = integrate(grid, f).value;
    const double fine = integrate(grid.refined(), f).value;
    rep.quadrature_error =
        std::abs(fine - rep.I_phi) * std::abs(rep.coeff_derived);
  }

  const double fp = F_of(step);
  const double fm = F_of(-step);
  const double fph = F_of(step / 2.0);
  const double fmh = F_of(-step / 2.0);
  rep.fd_coarse = (fp - fm) / (2.0 * step);
  rep.fd_half = (fph - fmh) / step;
  rep.fd_derivative = (4.0 * rep.fd_half - rep.fd_coarse) / 3.0;

  rep.predicted_transcribed = rep.coeff_transcribed * rep.I_phi;
  rep.predicted_derived = rep.coeff_derived * rep.I_phi;
  const auto gap = [&](double pred) {
    return std::abs(rep.fd_derivative - pred) /
           std::max({1.0, std::abs(rep.fd_derivative), std::abs(pred)});
  };
  rep.gap_transcribed = gap(rep.predicted_transcribed);
  rep.gap_derived = gap(rep.predicted_derived);
  rep.differencing_error = std::abs(rep.fd_derivative - rep.fd_half);
  return rep;
}

CriticalityReport criticality_check(int k, const QuadratureGrid& grid,
                                    const std::vector<FieldExpr>& directions,
                                    double step) {
  const int n = grid.n;
  ModelConvention conv;
  conv.n = n;
  conv.validate();
  require_k_range(k, n, "criticality_check");
  if (directions.empty())
    throw validation_error("criticality_check: no directions given");
  if (!(step > 0.0))
    throw validation_error("criticality_check: step must be positive");

  const FieldExpr v0 = catalog_v0(n);
  const auto J_of = [&](const FieldExpr& f) {
    return evaluate_Jk(power_structure(conv, f), k, grid, false).J_k;
  };

  CriticalityReport rep;
  rep.n = n;
  rep.k = k;
  rep.J_base = J_of(v0);
  for (const FieldExpr& psi : directions) {
    if (psi.n != n)
      throw validation_error(
          "criticality_check: direction dimension does not match the grid");
    double scale = 0.0;
    for (long i = 0; i < grid.points.rows(); ++i) {
      const Eigen::VectorXd x = grid.points.row(i).transpose();
      const double ps = eval_value(psi, x);
      if (ps == 0.0) continue;
      scale = std::max(scale, std::abs(ps) / eval_value(v0, x));
    }
    if (scale == 0.0)
      throw validation_error(
          "criticality_check: a direction vanishes at every grid node");
    const double jp = J_of(shifted_field(v0, psi, step));
    const double jm = J_of(shifted_field(v0, psi, -step));
    const double jph = J_of(shifted_field(v0, psi, step / 2.0));
    const double jmh = J_of(shifted_field(v0, psi, -step / 2.0));
    const double d1 = (jp - jm) / (2.0 * step);
    const double d2 = (jph - jmh) / step;
    const double dr = (4.0 * d2 - d1) / 3.0;
    rep.derivative.push_back(dr);
    rep.normalized.push_back(std::abs(dr) / (std::abs(rep.J_base) * scale));
    rep.max_normalized = std::max(rep.max_normalized, rep.normalized.back());
  }
  return rep;
}

double pseudo_einstein_sigma(int n, int k, double R) {
  if (n < 1)
    throw validation_error("pseudo_einstein_sigma: n must be at least 1");
  require_k_range(k, n, "pseudo_einstein_sigma");
  return binom(n, k) * std::pow(R / (2.0 * n * (n + 1)), k);
}

}  // namespace kcurv
