#include <cmath>
#include <sstream>

#include "kcurv/field.hpp"

namespace kcurv {

namespace {
// sharpening of the bump1 mollifier profile e^{b - b/(1-s)}
constexpr double kBumpSharp = 3.0;
}  // namespace

Jet3 Jet3::zero(int d) {
  Jet3 j;
  j.d = d;
  j.v = 0.0;
  j.g = Eigen::VectorXd::Zero(d);
  j.h = Eigen::MatrixXd::Zero(d, d);
  j.t.assign(static_cast<std::size_t>(d) * d * d, 0.0);
  return j;
}

Jet3 Jet3::constant(int d, double c) {
  Jet3 j = zero(d);
  j.v = c;
  return j;
}

Jet3 Jet3::variable(int d, int slot, double x) {
  Jet3 j = zero(d);
  j.v = x;
  j.g(slot) = 1.0;
  return j;
}

Jet3 jet_add(const Jet3& a, const Jet3& b) {
  Jet3 r = a;
  r.v += b.v;
  r.g += b.g;
  r.h += b.h;
  for (std::size_t i = 0; i < r.t.size(); ++i) r.t[i] += b.t[i];
  return r;
}

Jet3 jet_sub(const Jet3& a, const Jet3& b) {
  Jet3 r = a;
  r.v -= b.v;
  r.g -= b.g;
  r.h -= b.h;
  for (std::size_t i = 0; i < r.t.size(); ++i) r.t[i] -= b.t[i];
  return r;
}

Jet3 jet_scale(const Jet3& a, double c) {
  Jet3 r = a;
  r.v *= c;
  r.g *= c;
  r.h *= c;
  for (double& x : r.t) x *= c;
  return r;
}

namespace {

/// one value into all six index orders; keeps the rank-3 block bitwise
/// symmetric regardless of the per-permutation summation order
void set_sym3(Jet3& r, int i, int j, int k, double v) {
  r.t3(i, j, k) = v;
  r.t3(i, k, j) = v;
  r.t3(j, i, k) = v;
  r.t3(j, k, i) = v;
  r.t3(k, i, j) = v;
  r.t3(k, j, i) = v;
}

}  // namespace

Jet3 jet_mul(const Jet3& a, const Jet3& b) {
  const int d = a.d;
  Jet3 r = Jet3::zero(d);
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  // grouping the outer products first keeps h bitwise symmetric (IEEE
  // addition commutes; mixing the four summands per entry would not)
  const Eigen::MatrixXd s = a.g * b.g.transpose();
  r.h = a.v * b.h + b.v * a.h + (s + s.transpose());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      for (int k = j; k < d; ++k) {
        const double v = a.t3(i, j, k) * b.v + b.t3(i, j, k) * a.v +
                         a.h(i, j) * b.g(k) + a.h(i, k) * b.g(j) +
                         a.h(j, k) * b.g(i) + b.h(i, j) * a.g(k) +
                         b.h(i, k) * a.g(j) + b.h(j, k) * a.g(i);
        set_sym3(r, i, j, k, v);
      }
    }
  }
  return r;
}

Jet3 jet_compose(double c0, double c1, double c2, double c3, const Jet3& f) {
  const int d = f.d;
  Jet3 r = Jet3::zero(d);
  r.v = c0;
  r.g = c1 * f.g;
  r.h = c1 * f.h + c2 * (f.g * f.g.transpose());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      for (int k = j; k < d; ++k) {
        const double v = c3 * f.g(i) * f.g(j) * f.g(k) +
                         c2 * (f.g(i) * f.h(j, k) + f.g(j) * f.h(i, k) +
                               f.g(k) * f.h(i, j)) +
                         c1 * f.t3(i, j, k);
        set_sym3(r, i, j, k, v);
      }
    }
  }
  return r;
}

namespace {

[[noreturn]] void domain_fail(const Expr& e, int n, const Eigen::VectorXd& x,
                              const std::string& what) {
  std::ostringstream os;
  os << what << " in '" << print_subexpr(e, n) << "' at point (";
  for (int i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x(i);
  }
  os << ")";
  throw evaluation_error(os.str());
}

double eval_rec(const Expr& e, int n, const Eigen::VectorXd& x) {
  switch (e.k) {
    case Expr::kind::constant: return e.cval;
    case Expr::kind::variable: return x(e.slot);
    case Expr::kind::add: return eval_rec(*e.a, n, x) + eval_rec(*e.b, n, x);
    case Expr::kind::sub: return eval_rec(*e.a, n, x) - eval_rec(*e.b, n, x);
    case Expr::kind::mul: return eval_rec(*e.a, n, x) * eval_rec(*e.b, n, x);
    case Expr::kind::div: {
      const double den = eval_rec(*e.b, n, x);
      if (den == 0.0) domain_fail(e, n, x, "division by zero");
      return eval_rec(*e.a, n, x) / den;
    }
    case Expr::kind::neg: return -eval_rec(*e.a, n, x);
    case Expr::kind::pow_int: {
      const double base = eval_rec(*e.a, n, x);
      if (e.ip < 0 && base == 0.0) {
        domain_fail(e, n, x, "negative power of zero");
      }
      double r = 1.0;
      const long m = e.ip < 0 ? -e.ip : e.ip;
      for (long i = 0; i < m; ++i) r *= base;
      return e.ip < 0 ? 1.0 / r : r;
    }
    case Expr::kind::pow_real: {
      const double base = eval_rec(*e.a, n, x);
      if (base <= 0.0) {
        domain_fail(e, n, x, "non-integer power of a nonpositive base");
      }
      return std::pow(base, e.rp);
    }
    case Expr::kind::call: {
      const double s = eval_rec(*e.a, n, x);
      switch (e.f) {
        case fun_kind::exp_f: return std::exp(s);
        case fun_kind::log_f:
          if (s <= 0.0) domain_fail(e, n, x, "log of a nonpositive value");
          return std::log(s);
        case fun_kind::sin_f: return std::sin(s);
        case fun_kind::cos_f: return std::cos(s);
        case fun_kind::sqrt_f:
          if (s <= 0.0) domain_fail(e, n, x, "sqrt of a nonpositive value");
          return std::sqrt(s);
        case fun_kind::bump1_f:
          if (s >= 1.0 - 1e-12) return 0.0;
          return std::exp(kBumpSharp - kBumpSharp / (1.0 - s));
      }
      return 0.0;
    }
  }
  return 0.0;
}

Jet3 jet_rec(const Expr& e, int n, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  switch (e.k) {
    case Expr::kind::constant: return Jet3::constant(d, e.cval);
    case Expr::kind::variable: return Jet3::variable(d, e.slot, x(e.slot));
    case Expr::kind::add: return jet_add(jet_rec(*e.a, n, x), jet_rec(*e.b, n, x));
    case Expr::kind::sub: return jet_sub(jet_rec(*e.a, n, x), jet_rec(*e.b, n, x));
    case Expr::kind::mul: return jet_mul(jet_rec(*e.a, n, x), jet_rec(*e.b, n, x));
    case Expr::kind::div: {
      const Jet3 den = jet_rec(*e.b, n, x);
      if (den.v == 0.0) domain_fail(e, n, x, "division by zero");
      const double s = den.v;
      const Jet3 inv = jet_compose(1.0 / s, -1.0 / (s * s), 2.0 / (s * s * s),
                                   -6.0 / (s * s * s * s), den);
      return jet_mul(jet_rec(*e.a, n, x), inv);
    }
    case Expr::kind::neg: return jet_scale(jet_rec(*e.a, n, x), -1.0);
    case Expr::kind::pow_int: {
      const Jet3 base = jet_rec(*e.a, n, x);
      const long m = e.ip < 0 ? -e.ip : e.ip;
      Jet3 r = Jet3::constant(d, 1.0);
      for (long i = 0; i < m; ++i) r = jet_mul(r, base);
      if (e.ip >= 0) return r;
      if (r.v == 0.0) domain_fail(e, n, x, "negative power of zero");
      const double s = r.v;
      return jet_compose(1.0 / s, -1.0 / (s * s), 2.0 / (s * s * s),
                         -6.0 / (s * s * s * s), r);
    }
    case Expr::kind::pow_real: {
      const Jet3 base = jet_rec(*e.a, n, x);
      const double s = base.v;
      if (s <= 0.0) {
        domain_fail(e, n, x, "non-integer power of a nonpositive base");
      }
      const double r = e.rp;
      const double p0 = std::pow(s, r);
      return jet_compose(p0, r * p0 / s, r * (r - 1.0) * p0 / (s * s),
                         r * (r - 1.0) * (r - 2.0) * p0 / (s * s * s), base);
    }
    case Expr::kind::call: {
      const Jet3 a = jet_rec(*e.a, n, x);
      const double s = a.v;
      switch (e.f) {
        case fun_kind::exp_f: {
          const double v = std::exp(s);
          return jet_compose(v, v, v, v, a);
        }
        case fun_kind::log_f: {
          if (s <= 0.0) domain_fail(e, n, x, "log of a nonpositive value");
          return jet_compose(std::log(s), 1.0 / s, -1.0 / (s * s),
                             2.0 / (s * s * s), a);
        }
        case fun_kind::sin_f: {
          const double sn = std::sin(s), cs = std::cos(s);
          return jet_compose(sn, cs, -sn, -cs, a);
        }
        case fun_kind::cos_f: {
          const double sn = std::sin(s), cs = std::cos(s);
          return jet_compose(cs, -sn, -cs, sn, a);
        }
        case fun_kind::sqrt_f: {
          if (s <= 0.0) domain_fail(e, n, x, "sqrt of a nonpositive value");
          const double v = std::sqrt(s);
          return jet_compose(v, 0.5 / v, -0.25 / (v * s),
                             0.375 / (v * s * s), a);
        }
        case fun_kind::bump1_f: {
          // e^{b - b/(1-s)} for s < 1, identically 0 for s >= 1; the jet is
          // clamped to zero once the C-infinity tail is below double
          // precision. The sharpening b > 1 keeps the boundary layer tame
          // enough for mapped Gauss quadrature at moderate levels.
          if (s >= 1.0 - 1e-12) return Jet3::zero(d);
          const double b = kBumpSharp;
          const double g1 = 1.0 / (1.0 - s);
          const double g2 = g1 * g1;
          const double g3 = g2 * g1;
          const double g4 = g2 * g2;
          const double g5 = g4 * g1;
          const double g6 = g4 * g2;
          const double phi = std::exp(b - b * g1);
          return jet_compose(phi, -b * g2 * phi,
                             (b * b * g4 - 2.0 * b * g3) * phi,
                             (-b * b * b * g6 + 6.0 * b * b * g5 -
                              6.0 * b * g4) *
                                 phi,
                             a);
        }
      }
      return Jet3::zero(d);
    }
  }
  return Jet3::zero(d);
}

}  // namespace

double eval_value(const FieldExpr& f, const Eigen::VectorXd& x) {
  if (x.size() != f.dim()) {
    throw validation_error("point dimension mismatch: expected " +
                           std::to_string(f.dim()));
  }
  return eval_rec(*f.root, f.n, x);
}

Jet3 eval_jet3(const FieldExpr& f, const Eigen::VectorXd& x) {
  if (x.size() != f.dim()) {
    throw validation_error("point dimension mismatch: expected " +
                           std::to_string(f.dim()));
  }
  return jet_rec(*f.root, f.n, x);
}

Jet3 fd_jet3(const FieldExpr& f, const Eigen::VectorXd& x, double h) {
  const int d = static_cast<int>(x.size());
  if (x.size() != f.dim()) {
    throw validation_error("point dimension mismatch: expected " +
                           std::to_string(f.dim()));
  }
  auto at = [&](const Eigen::VectorXd& p) { return eval_value(f, p); };
  auto shift = [&](std::initializer_list<std::pair<int, double>> moves) {
    Eigen::VectorXd p = x;
    for (auto [slot, mult] : moves) p(slot) += mult * h;
    return at(p);
  };

  Jet3 r = Jet3::zero(d);
  const double f0 = at(x);
  r.v = f0;
  for (int i = 0; i < d; ++i) {
    const double fp = shift({{i, 1.0}});
    const double fm = shift({{i, -1.0}});
    r.g(i) = (fp - fm) / (2.0 * h);
    r.h(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    const double fp2 = shift({{i, 2.0}});
    const double fm2 = shift({{i, -2.0}});
    r.t3(i, i, i) = (fp2 - 2.0 * fp + 2.0 * fm - fm2) / (2.0 * h * h * h);
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double fpp = shift({{i, 1.0}, {j, 1.0}});
      const double fpm = shift({{i, 1.0}, {j, -1.0}});
      const double fmp = shift({{i, -1.0}, {j, 1.0}});
      const double fmm = shift({{i, -1.0}, {j, -1.0}});
      const double hij = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      r.h(i, j) = hij;
      r.h(j, i) = hij;
      // d^2/di^2 d/dj: central in j of the second-difference in i
      const double fj_p = shift({{j, 1.0}});
      const double fj_m = shift({{j, -1.0}});
      const double tiij =
          ((fpp - 2.0 * fj_p + fmp) - (fpm - 2.0 * fj_m + fmm)) /
          (2.0 * h * h * h);
      const double fi_p = shift({{i, 1.0}});
      const double fi_m = shift({{i, -1.0}});
      const double tjji =
          ((fpp - 2.0 * fi_p + fpm) - (fmp - 2.0 * fi_m + fmm)) /
          (2.0 * h * h * h);
      for (auto [a, b, c, val] :
           {std::tuple{i, i, j, tiij}, std::tuple{j, j, i, tjji}}) {
        r.t3(a, b, c) = val;
        r.t3(a, c, b) = val;
        r.t3(c, a, b) = val;
      }
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        double sum = 0.0;
        for (int si = -1; si <= 1; si += 2) {
          for (int sj = -1; sj <= 1; sj += 2) {
            for (int sk = -1; sk <= 1; sk += 2) {
              sum += si * sj * sk *
                     shift({{i, double(si)}, {j, double(sj)}, {k, double(sk)}});
            }
          }
        }
        const double v = sum / (8.0 * h * h * h);
        r.t3(i, j, k) = v;
        r.t3(i, k, j) = v;
        r.t3(j, i, k) = v;
        r.t3(j, k, i) = v;
        r.t3(k, i, j) = v;
        r.t3(k, j, i) = v;
      }
    }
  }
  return r;
}

}  // namespace kcurv
