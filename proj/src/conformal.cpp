#include "kcurv/conformal.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace kcurv {

namespace {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;

std::string point_str(const HPoint& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.flat().size(); ++i) {
    if (i) os << ", ";
    os << p.flat()(i);
  }
  os << ")";
  return os.str();
}

void require_k(int k, int n) {
  if (k < 1 || k > n) {
    std::ostringstream os;
    os << "k = " << k << " is outside 1.." << n;
    throw validation_error(os.str());
  }
}

/// power-form value with the positivity check
double power_value(const ConformalStructure& cs, const HPoint& p) {
  const double v = eval_value(cs.factor, p.flat());
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << "power-form factor must be positive; got " << v << " at point "
       << point_str(p);
    throw evaluation_error(os.str());
  }
  return v;
}

/// hermiticity defect guard for matrices hermitian by construction
HermitianMatrix herm_checked(const MatC& m, const char* what,
                             const HPoint& p) {
  const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (defect > 1e-10 * scale) {
    std::ostringstream os;
    os << what << " hermiticity defect " << defect << " at point "
       << point_str(p);
    throw check_error(os.str());
  }
  return HermitianMatrix::assembled(m);
}

/// lower deformed Schouten block from the u-jet:
/// A = -(u_{ab~} + u_{b~a}) - |du|^2 h
MatC schouten_lower(const CovariantJet& cj, const ModelConvention& conv) {
  const int n = cj.n;
  const double gn = grad_norm_sq(cj, conv);
  MatC A = -(cj.u_albe_bar + cj.u_bebar_al);
  A -= gn * conv.levi_scale * MatC::Identity(n, n);
  return A;
}

/// hermitized V[v] from the v-jet
MatC v_lower(const CovariantJet& vj, const ModelConvention& conv) {
  const int n = vj.n;
  const double v = vj.u;
  const double gnv = grad_norm_sq(vj, conv);
  MatC V = -0.5 * (vj.u_albe_bar + vj.u_bebar_al);
  V += (vj.u_alpha * vj.u_alpha.adjoint()) / v;
  V -= (gnv / (2.0 * n * v)) * conv.levi_scale * MatC::Identity(n, n);
  return V;
}

/// raw admissibility bilinear u_a u_{b~s} - u_s u_{b~a} (no -2 factor)
std::vector<MatC> bilinear(const CovariantJet& cj) {
  const int n = cj.n;
  std::vector<MatC> B(static_cast<std::size_t>(n), MatC::Zero(n, n));
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        B[static_cast<std::size_t>(s)](a, b) =
            cj.u_alpha(a) * cj.u_bebar_al(s, b) -
            cj.u_alpha(s) * cj.u_bebar_al(a, b);
  return B;
}

}  // namespace

FieldExpr ConformalStructure::log_factor() const {
  if (form == factor_form::log_u) return factor;
  return FieldExpr{factor.n,
                   e_mul(e_const(1.0 / conv.n),
                         e_call(fun_kind::log_f, factor.root))};
}

FieldExpr ConformalStructure::power_factor() const {
  if (form == factor_form::power_v) return factor;
  return FieldExpr{factor.n,
                   e_call(fun_kind::exp_f,
                          e_mul(e_const(static_cast<double>(conv.n)),
                                factor.root))};
}

double ConformalStructure::u_at(const HPoint& p) const {
  if (form == factor_form::log_u) return eval_value(factor, p.flat());
  return std::log(power_value(*this, p)) / conv.n;
}

double ConformalStructure::weight_at(const HPoint& p) const {
  return std::exp(2.0 * u_at(p));
}

ConformalStructure log_structure(const ModelConvention& conv, FieldExpr u) {
  conv.validate();
  if (u.n != conv.n)
    throw validation_error("conformal factor dimension does not match the convention");
  return ConformalStructure{conv, factor_form::log_u, std::move(u)};
}

ConformalStructure power_structure(const ModelConvention& conv, FieldExpr v) {
  conv.validate();
  if (v.n != conv.n)
    throw validation_error("conformal factor dimension does not match the convention");
  return ConformalStructure{conv, factor_form::power_v, std::move(v)};
}

SchoutenAtPoint schouten(const ConformalStructure& cs, const HPoint& p) {
  const ModelConvention& conv = cs.conv;
  if (cs.form == factor_form::power_v) (void)power_value(cs, p);

  SchoutenAtPoint rep;
  rep.jet = frame_derivatives(cs.log_factor(), p, conv);
  rep.u = rep.jet.u;
  rep.weight = std::exp(2.0 * rep.u);

  const MatC A = schouten_lower(rep.jet, conv);
  rep.S_lower = herm_checked(A, "deformed Schouten", p);

  const MatC h_def = rep.weight * conv.levi_scale *
                     MatC::Identity(conv.n, conv.n);
  rep.S_mixed = raise_index(rep.S_lower, HermitianMatrix::assembled(h_def));

  if (cs.form == factor_form::power_v) {
    // independent route through V[v]: S_lower = (2/(nv)) V identically
    const CovariantJet vj = frame_derivatives(cs.factor, p, conv);
    const MatC S2 = (2.0 / (conv.n * vj.u)) * v_lower(vj, conv);
    const double scale =
        std::max({1.0, A.cwiseAbs().maxCoeff(), S2.cwiseAbs().maxCoeff()});
    rep.route_gap = (A - S2).cwiseAbs().maxCoeff() / scale;
    if (rep.route_gap > 1e-8) {
      std::ostringstream os;
      os << "power-form Schouten routes disagree by " << rep.route_gap
         << " (relative) at point " << point_str(p);
      throw check_error(os.str());
    }
  }
  return rep;
}

HermitianMatrix V_tensor(const ConformalStructure& cs, const HPoint& p) {
  if (cs.form != factor_form::power_v)
    throw validation_error("V_tensor requires a power-form structure");
  (void)power_value(cs, p);
  const CovariantJet vj = frame_derivatives(cs.factor, p, cs.conv);
  return herm_checked(v_lower(vj, cs.conv), "V tensor", p);
}

double sigma_k_curvature(const ConformalStructure& cs, const HPoint& p,
                         int k) {
  require_k(k, cs.conv.n);
  return sigma_k(schouten(cs, p).S_mixed, k);
}

YamabeResidual yamabe_residual(const ConformalStructure& cs, int k,
                               double lambda, const HPoint& p) {
  const int n = cs.conv.n;
  require_k(k, n);
  const double c = cs.conv.levi_scale;

  YamabeResidual r;
  r.lambda = lambda;
  r.lambda_hat = std::pow(0.5 * n, k) * lambda;
  r.lambda_hat_alt = k * r.lambda_hat;

  const SchoutenAtPoint rep = schouten(cs, p);
  const HermitianMatrix A_mixed =
      HermitianMatrix::assembled(schouten_lower(rep.jet, cs.conv) / c);
  r.u_form = sigma_k(A_mixed, k) - lambda * std::pow(rep.weight, k);

  // v-form through its own jet, even for log-form input
  const ConformalStructure pcs =
      cs.form == factor_form::power_v
          ? cs
          : power_structure(cs.conv, cs.power_factor());
  const double v = power_value(pcs, p);
  const CovariantJet vj = frame_derivatives(pcs.factor, p, cs.conv);
  const HermitianMatrix V_mixed =
      HermitianMatrix::assembled(v_lower(vj, cs.conv) / c);
  const double q = (n + 2.0) / n;
  r.v_form = std::pow(v, (1.0 - k) * q) * sigma_k(V_mixed, k) -
             r.lambda_hat * std::pow(v, q);
  return r;
}

double CottonAtPoint::max_abs() const {
  double m = 0.0;
  for (const auto& mat : C)
    if (mat.size() > 0) m = std::max(m, mat.cwiseAbs().maxCoeff());
  return m;
}

CottonAtPoint cotton(const ConformalStructure& cs, const HPoint& p) {
  const CovariantJet cj = frame_derivatives(cs.log_factor(), p, cs.conv);
  CottonAtPoint out;
  out.n = cj.n;
  out.C = bilinear(cj);
  for (auto& mat : out.C) mat *= -2.0;
  return out;
}

CottonAtPoint cotton_direct(const ConformalStructure& cs, const HPoint& p) {
  const CovariantJet cj = frame_derivatives(cs.log_factor(), p, cs.conv);
  const int n = cj.n;

  // A carries -|du|^2 h = -2 sum_g |u_g|^2 delta (the c's cancel), so its
  // T_s derivative is -2 P_s delta with
  // P_s = sum_g (u_{gs} conj(u_g) + u_g u_{g~s})
  Eigen::VectorXcd P = Eigen::VectorXcd::Zero(n);
  for (int s = 0; s < n; ++s)
    for (int g = 0; g < n; ++g)
      P(s) += cj.u_alpha_beta(g, s) * std::conj(cj.u_alpha(g)) +
              cj.u_alpha(g) * cj.u_bebar_al(s, g);

  CottonAtPoint out;
  out.n = n;
  out.C.assign(static_cast<std::size_t>(n), MatC::Zero(n, n));
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const cxd ts_A = -cj.third[static_cast<std::size_t>(s)](a, b) -
                         cj.third_ba[static_cast<std::size_t>(s)](a, b) -
                         (a == b ? 2.0 * P(s) : cxd{0.0, 0.0});
        const cxd ta_A = -cj.third[static_cast<std::size_t>(a)](s, b) -
                         cj.third_ba[static_cast<std::size_t>(a)](s, b) -
                         (s == b ? 2.0 * P(a) : cxd{0.0, 0.0});
        out.C[static_cast<std::size_t>(s)](a, b) = ts_A - ta_A;
      }
  return out;
}

AdmissibilityReport cotton_admissible(const FieldExpr& u,
                                      const std::vector<HPoint>& points,
                                      const ModelConvention& conv,
                                      double tol) {
  if (points.empty())
    throw validation_error("cotton_admissible needs a nonempty sample set");
  AdmissibilityReport rep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CovariantJet cj = frame_derivatives(u, points[i], conv);
    double m = 0.0;
    for (const MatC& mat : bilinear(cj))
      m = std::max(m, mat.cwiseAbs().maxCoeff());
    if (m > rep.max_violation) {
      rep.max_violation = m;
      rep.worst_point = i;
    }
  }
  rep.admissible = rep.max_violation <= tol;
  return rep;
}

std::vector<ConeReport> k_positive(const ConformalStructure& cs,
                                   const std::vector<HPoint>& points,
                                   int k) {
  require_k(k, cs.conv.n);
  std::vector<ConeReport> out;
  out.reserve(points.size());
  for (const HPoint& p : points)
    out.push_back(cone_membership(schouten(cs, p).S_mixed, k));
  return out;
}

EllipticityReport ellipticity_certificate(const ConformalStructure& cs,
                                          int k,
                                          const std::vector<HPoint>& points,
                                          const FieldExpr& direction,
                                          double fd_step) {
  const ModelConvention& conv = cs.conv;
  require_k(k, conv.n);
  if (points.empty())
    throw validation_error("ellipticity_certificate needs a nonempty sample set");
  if (direction.n != conv.n)
    throw validation_error("direction field dimension does not match the convention");
  if (!(fd_step > 0.0)) throw validation_error("fd_step must be positive");

  const FieldExpr u_expr = cs.log_factor();
  const ConformalStructure cs_plus = log_structure(
      conv, FieldExpr{u_expr.n,
                      e_add(u_expr.root,
                            e_mul(e_const(fd_step), direction.root))});
  const ConformalStructure cs_minus = log_structure(
      conv, FieldExpr{u_expr.n,
                      e_sub(u_expr.root,
                            e_mul(e_const(fd_step), direction.root))});

  EllipticityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < points.size(); ++i) {
    const HPoint& p = points[i];
    const SchoutenAtPoint sp = schouten(cs, p);
    const double sk = sigma_k(sp.S_mixed, k);
    if (!(sk > 0.0)) {
      std::ostringstream os;
      os << "sigma_" << k << "(S~) = " << sk << " is not positive at point "
         << point_str(p) << "; the ellipticity hypothesis fails";
      throw hypothesis_error(os.str());
    }

    const HermitianMatrix T = newton_transform(sp.S_mixed, k - 1);
    const double emin = eigenvalues(T)(0);
    if (emin < rep.min_eigenvalue) {
      rep.min_eigenvalue = emin;
      rep.worst_point = i;
    }

    // linearization: Sdot = e^{-2u} (Adot - 2 phi A)/c with
    // Adot = -(phi_{ab~} + phi_{b~a}) - 2<du,dphi> h
    const CovariantJet pj = frame_derivatives(direction, p, conv);
    // 2<du,dphi> h contributes 4 Re sum conj(u_g) phi_g on the diagonal
    double ip = 0.0;
    for (int g = 0; g < conv.n; ++g)
      ip += 4.0 * std::real(std::conj(sp.jet.u_alpha(g)) * pj.u_alpha(g));
    MatC Adot = -(pj.u_albe_bar + pj.u_bebar_al);
    Adot -= ip * MatC::Identity(conv.n, conv.n);
    const MatC A = schouten_lower(sp.jet, conv);
    const MatC Sdot =
        (Adot - 2.0 * pj.u * A) / (conv.levi_scale * sp.weight);
    const double df = (T.a * Sdot).trace().real();

    const double fd = (sigma_k_curvature(cs_plus, p, k) -
                       sigma_k_curvature(cs_minus, p, k)) /
                      (2.0 * fd_step);
    const double gap =
        std::abs(df - fd) / std::max({1.0, std::abs(df), std::abs(fd)});
    rep.max_linearization_gap = std::max(rep.max_linearization_gap, gap);
  }
  return rep;
}

}  // namespace kcurv
