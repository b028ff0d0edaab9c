// Acceptance gate. Runs the eight headline checks end to end, prints one
// [PASS]/[FAIL] line per criterion with the measured numbers, and exits
// with the number of failures. Detail lines are indented under their
// criterion.

#include <chrono>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kcurv/conformal.hpp"
#include "kcurv/errors.hpp"
#include "kcurv/field.hpp"
#include "kcurv/functional.hpp"
#include "kcurv/heisenberg.hpp"
#include "kcurv/quadrature.hpp"
#include "kcurv/rng.hpp"
#include "kcurv/symfun.hpp"

namespace {

using namespace kcurv;
constexpr double kPi = std::numbers::pi;

double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

ModelConvention conv_n(int n) {
  ModelConvention conv;
  conv.n = n;
  return conv;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  }
};

int g_failures = 0;

void criterion(const std::string& name, bool pass, double secs,
               const std::string& metric) {
  if (!pass) ++g_failures;
  std::ostringstream os;
  os << (pass ? "[PASS] " : "[FAIL] ") << name << " (" << metric << "; "
     << std::fixed;
  os.precision(1);
  os << secs << " s)";
  std::cout << os.str() << "\n";
}

void detail(const std::string& line) { std::cout << "    " << line << "\n"; }

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

// eigenvalue vector with sigma_1..sigma_k positive; reaches outside the
// positive-definite cone whenever k < d
VecR cone_spectrum(int d, int k, Rng& rng) {
  for (int tries = 0; tries < 4000; ++tries) {
    VecR lam(d);
    for (int i = 0; i < d; ++i) lam(i) = rng.uniform(-0.4, 2.0);
    const VecR e = elementary_symmetric(lam);
    bool ok = true;
    for (int j = 1; j <= k; ++j) ok = ok && e(j) > 0.0;
    if (ok) return lam;
  }
  throw check_error("cone spectrum sampler exhausted its retry budget");
}

MatC random_unitary(int d, Rng& rng) {
  MatC g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = cxd(rng.normal(), rng.normal());
  const Eigen::HouseholderQR<MatC> qr(g);
  return qr.householderQ() * MatC::Identity(d, d);
}

HermitianMatrix random_hermitian(int d, Rng& rng) {
  MatC g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = cxd(rng.normal(), rng.normal());
  return HermitianMatrix::assembled(0.5 * (g + g.adjoint()).eval());
}

HermitianMatrix cone_member(int d, int k, Rng& rng) {
  const VecR lam = cone_spectrum(d, k, rng);
  const MatC u = random_unitary(d, rng);
  return HermitianMatrix::assembled(u * lam.asDiagonal() * u.adjoint());
}

HPoint rand_hpoint(int n, Rng& rng, double box) {
  Eigen::VectorXd x(2 * n + 1);
  for (int i = 0; i < x.size(); ++i) x(i) = rng.uniform(-box, box);
  return HPoint(std::move(x));
}

// ---- criterion 1: sphere constants ------------------------------------------

void run_sphere_constants() {
  Timer t;
  struct Pair {
    int n, k;
    double target;
  };
  const std::vector<Pair> pairs = {{1, 1, kPi},          {2, 1, 2 * kPi},
                                   {2, 2, kPi * kPi},    {3, 1, 3 * kPi},
                                   {3, 2, 3 * kPi * kPi}, {3, 3, std::pow(kPi, 3)}};
  bool pass = true;
  double worst = 0.0;
  for (const auto& p : pairs) {
    Timer tp;
    const SphereLambdaReport r =
        sphere_lambda(p.n, p.k, QuadratureGrid::radial(conv_n(p.n), 2));
    const double secs = tp.seconds();
    const double tol = p.n <= 2 ? 1e-3 : 1e-2;
    const bool ok = r.deviation <= tol && secs <= 120.0;
    pass = pass && ok;
    worst = std::max(worst, r.deviation);
    std::ostringstream os;
    os << "(n=" << p.n << ", k=" << p.k << "): estimate " << r.estimate
       << " vs " << p.target << ", relative deviation " << sci(r.deviation)
       << " (tol " << sci(tol) << ", " << sci(secs) << " s)";
    detail(os.str());
  }
  criterion("sphere constants lambda_k = C(n,k) pi^k over six (n,k) pairs",
            pass, t.seconds(), "max relative deviation " + sci(worst));
}

// ---- criterion 2: pointwise constancy ----------------------------------------

void run_pointwise_constancy() {
  Timer t;
  Rng rng(20240816);
  bool pass = true;
  double worst_spread = 0.0, worst_cross = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const ConformalStructure cs =
        power_structure(conv_n(n), catalog_v0(n));
    for (int k = 1; k <= n; ++k) {
      const double closed = pseudo_einstein_sigma(n, k, 2.0 * n * (n + 1));
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      double sum = 0.0, cross = 0.0;
      for (int i = 0; i < 50; ++i) {
        const double s =
            sigma_k_curvature(cs, rand_hpoint(n, rng, 0.8), k);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        sum += s;
        cross = std::max(cross, std::abs(s - closed) /
                                    std::max(1.0, std::abs(closed)));
      }
      const double spread = (hi - lo) / std::abs(sum / 50.0);
      worst_spread = std::max(worst_spread, spread);
      worst_cross = std::max(worst_cross, cross);
      pass = pass && spread <= 1e-6 && cross <= 1e-7;
    }
  }
  criterion(
      "sphere pointwise sigma_k constancy at 50 random points per (n,k)",
      pass, t.seconds(),
      "max spread " + sci(worst_spread) + " (tol 1e-6), max closed-form gap " +
          sci(worst_cross) + " (tol 1e-7)");
}

// ---- criterion 3: symmetric-function identities --------------------------------

void run_symfun_identities() {
  Timer t;
  Rng rng(31415);
  bool pass = true;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int d = 2 + i % 5;  // dimensions 2..6
    const HermitianMatrix a = random_hermitian(d, rng);
    for (int k = 1; k <= d; ++k) {
      worst = std::max(worst, rel_gap(sigma_k(a, k), sigma_k_minors(a, k)));
      const HermitianMatrix t_rec = newton_transform(a, k);
      const HermitianMatrix t_dir = newton_transform_direct(a, k);
      worst = std::max(
          worst, (t_rec.a - t_dir.a).cwiseAbs().maxCoeff() /
                     std::max(1.0, t_dir.a.cwiseAbs().maxCoeff()));
      const double lhs = (newton_transform(a, k - 1).a * a.a).trace().real();
      worst = std::max(worst, rel_gap(lhs, k * sigma_k(a, k)));
    }
  }
  const double secs = t.seconds();
  pass = worst <= 1e-9 && secs <= 30.0;
  criterion(
      "symmetric-function identities on 500 random hermitian matrices "
      "(dims 2..6)",
      pass, secs, "max relative defect " + sci(worst) + " (tol 1e-9)");
}

// ---- criterion 4: cone inequalities --------------------------------------------

void run_cone_inequalities() {
  Timer t;
  Rng rng(271828);
  bool pass = true;
  double min_slack = std::numeric_limits<double>::infinity();
  double min_conc = min_slack, min_eig = min_slack;
  int false_equalities = 0, missed_equalities = 0;
  for (int n = 1; n <= 6; ++n) {
    for (int k = 1; k <= n; ++k) {
      for (int i = 0; i < 500; ++i) {
        const HermitianMatrix a = cone_member(n, k, rng);
        const InequalityReport ineq = inequality_suite(a, k);
        if (ineq.slack_ratio) {
          min_slack = std::min(min_slack, *ineq.slack_ratio);
          // equality must fire exactly on multiples of the identity;
          // a generic sample is not one
          if (ineq.equality) ++false_equalities;
        }
        min_slack = std::min(min_slack, ineq.slack_power);
        min_eig = std::min(min_eig,
                           eigenvalues(newton_transform(a, k - 1))(0));
        if (i % 10 == 0) {
          const HermitianMatrix b = cone_member(n, k, rng);
          min_conc = std::min(
              min_conc, concavity_check(a, b, k, {0.25, 0.5, 0.75}).min_gap);
        }
      }
      if (k <= n - 1) {
        const HermitianMatrix id =
            HermitianMatrix::assembled(1.3 * MatC::Identity(n, n));
        if (!inequality_suite(id, k).equality) ++missed_equalities;
      }
    }
  }
  pass = min_slack >= -1e-10 && min_conc >= -1e-10 && min_eig > 0.0 &&
         false_equalities == 0 && missed_equalities == 0;
  criterion(
      "cone inequality suite: 500 samples per (n,k) up to n = 6", pass,
      t.seconds(),
      "min slack " + sci(min_slack) + ", min concavity gap " + sci(min_conc) +
          " (floors -1e-10), min T_{k-1} eigenvalue " + sci(min_eig) +
          ", equality mistakes " +
          std::to_string(false_equalities + missed_equalities));
}

// ---- criterion 5: frame calculus AD vs FD ---------------------------------------

struct JetGaps {
  double g12 = 0.0;
  double g3 = 0.0;
};

void ad_fd_gaps(const FieldExpr& f, const Eigen::VectorXd& p, JetGaps& out) {
  const Jet3 ad = eval_jet3(f, p);
  // Richardson across two stencil widths removes the h^2 truncation term;
  // the wide base step keeps the second-derivative roundoff eps/h^2 near
  // 1e-9, so the order 1-2 oracle is reliable for any tree in the grammar
  const Jet3 f1 = fd_jet3(f, p, 1e-3);
  const Jet3 f2 = fd_jet3(f, p, 2e-3);
  const Jet3 hi = fd_jet3(f, p, 1e-3);
  for (int i = 0; i < ad.d; ++i) {
    out.g12 = std::max(out.g12,
                       rel_gap(ad.g(i), (4.0 * f1.g(i) - f2.g(i)) / 3.0));
    for (int j = 0; j < ad.d; ++j) {
      out.g12 = std::max(
          out.g12,
          rel_gap(ad.h(i, j), (4.0 * f1.h(i, j) - f2.h(i, j)) / 3.0));
      for (int k = 0; k < ad.d; ++k)
        out.g3 = std::max(out.g3, rel_gap(ad.t3(i, j, k), hi.t3(i, j, k)));
    }
  }
}

void run_calculus_oracle() {
  Timer t;
  Rng rng(66260700);
  JetGaps gaps;
  double comm = 0.0;
  for (int n = 1; n <= 3; ++n) {
    for (const auto& [name, f] : field_catalog(n)) {
      const double box = name == "bump" ? 0.3 : 0.6;
      for (int q = 0; q < 20; ++q) {
        Eigen::VectorXd p(2 * n + 1);
        for (int i = 0; i < p.size(); ++i) p(i) = rng.uniform(-box, box);
        ad_fd_gaps(f, p, gaps);
      }
    }
  }
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + rep % 3;
    const ModelConvention conv = conv_n(n);
    const FieldExpr f = random_field(n, rng);
    for (int q = 0; q < 20; ++q) {
      Eigen::VectorXd p(2 * n + 1);
      for (int i = 0; i < p.size(); ++i) p(i) = rng.uniform(-0.6, 0.6);
      ad_fd_gaps(f, p, gaps);
      const CovariantJet cj = frame_derivatives(f, HPoint(p), conv);
      const double scale = 1.0 + cj.u_albe_bar.cwiseAbs().maxCoeff();
      const Eigen::MatrixXcd defect =
          cj.u_albe_bar - cj.u_bebar_al -
          cxd(0.0, 1.0) * cj.u0 * conv.levi_scale *
              Eigen::MatrixXcd::Identity(n, n);
      comm = std::max(comm, defect.cwiseAbs().maxCoeff() / scale);
    }
  }
  const bool pass = gaps.g12 <= 1e-6 && gaps.g3 <= 1e-4 && comm <= 1e-8;
  criterion(
      "frame calculus: AD vs FD on the catalog and 50 random trees, 20 "
      "points each",
      pass, t.seconds(),
      "orders 1-2 " + sci(gaps.g12) + " (tol 1e-6), order 3 " + sci(gaps.g3) +
          " (tol 1e-4), commutation " + sci(comm) + " (tol 1e-8)");
}

// ---- criterion 6: k = 1 reduction ------------------------------------------------

void run_k1_reduction() {
  Timer t;
  Rng rng(1729);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + i % 3;
    const ModelConvention conv = conv_n(n);
    const ConformalStructure cs = log_structure(conv, random_field(n, rng));
    const HPoint p = rand_hpoint(n, rng, 0.7);
    const CovariantJet cj = frame_derivatives(cs.factor, p, conv);
    const double direct =
        std::exp(-2.0 * cj.u) *
        (sublaplacian(cj, conv) - n * grad_norm_sq(cj, conv));
    worst = std::max(worst, rel_gap(sigma_k_curvature(cs, p, 1), direct));
  }
  criterion(
      "k = 1 reduction: sigma_1 against the sublaplacian expression at 100 "
      "random pairs",
      worst <= 1e-9, t.seconds(),
      "max relative gap " + sci(worst) + " (tol 1e-9)");
}

// ---- criterion 7: variational identity ---------------------------------------------

void run_variational_identity() {
  Timer t;
  bool pass = true;
  double worst_gap = 0.0;
  struct Case {
    int n, k, level;
  };
  const std::vector<Case> cases = {{1, 1, 3}, {2, 1, 2}, {2, 2, 2}};
  for (const auto& c : cases) {
    const ModelConvention conv = conv_n(c.n);
    const QuadratureGrid grid =
        QuadratureGrid::radial(conv, c.level, 1.5, 2.0);
    const VariationReport vr = variational_derivative(
        catalog_sphere_log(c.n), catalog_bump(c.n, 0.8, 0.0), c.k, grid);
    worst_gap = std::max(worst_gap, vr.gap_derived);
    pass = pass && vr.gap_derived <= 1e-3;
    std::ostringstream os;
    os << "(n=" << c.n << ", k=" << c.k << "): fd " << vr.fd_derivative
       << "; coefficient " << vr.coeff_derived << " predicts "
       << vr.predicted_derived << " (gap " << sci(vr.gap_derived)
       << ", gate); coefficient " << vr.coeff_transcribed << " predicts "
       << vr.predicted_transcribed << " (gap " << sci(vr.gap_transcribed)
       << ", reported)";
    detail(os.str());
  }
  double worst_crit = 0.0;
  for (const auto& [n, k] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}}) {
    const ModelConvention conv = conv_n(n);
    const QuadratureGrid grid = QuadratureGrid::radial(conv, 2, 1.5, 2.0);
    const std::vector<FieldExpr> dirs = {catalog_bump(n, 0.8, 0.0),
                                         catalog_bump(n, 0.6, 0.5),
                                         catalog_bump(n, 0.5, -0.4)};
    const CriticalityReport cr = criticality_check(k, grid, dirs);
    worst_crit = std::max(worst_crit, cr.max_normalized);
    detail("criticality (n=" + std::to_string(n) + ", k=" +
           std::to_string(k) + "): normalized defect " +
           sci(cr.max_normalized));
  }
  pass = pass && worst_crit <= 5e-3;
  criterion(
      "variational identity on the sphere base plus criticality of the "
      "model extremal",
      pass, t.seconds(),
      "max derived-coefficient gap " + sci(worst_gap) +
          " (tol 1e-3), criticality defect " + sci(worst_crit) +
          " (tol 5e-3)");
}

// ---- criterion 8: ellipticity --------------------------------------------------------

void run_ellipticity() {
  Timer t;
  Rng rng(8128);
  bool pass = true;
  double min_eig = std::numeric_limits<double>::infinity();
  double worst_lin = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const ModelConvention conv = conv_n(n);
    const std::vector<ConformalStructure> structures = {
        power_structure(conv, catalog_v0(n)),
        power_structure(
            conv, FieldExpr{n, e_mul(e_const(1.7), catalog_v0(n).root)})};
    for (int k = 1; k <= n; ++k) {
      for (const auto& cs : structures) {
        std::vector<HPoint> pts;
        for (int i = 0; i < 30; ++i)
          pts.push_back(rand_hpoint(n, rng, 0.8));
        const EllipticityReport er =
            ellipticity_certificate(cs, k, pts, catalog_gaussian(n));
        min_eig = std::min(min_eig, er.min_eigenvalue);
        worst_lin = std::max(worst_lin, er.max_linearization_gap);
        pass = pass && er.elliptic() && er.max_linearization_gap <= 1e-4;
      }
    }
  }
  criterion(
      "ellipticity: T_{k-1} positive definite where sigma_k > 0, "
      "linearization vs FD",
      pass, t.seconds(),
      "min eigenvalue " + sci(min_eig) + " (> 0), max linearization gap " +
          sci(worst_lin) + " (tol 1e-4)");
}

}  // namespace

int main() {
  std::cout << "acceptance gate: eight criteria, exit code counts the "
               "failures\n\n";
  try {
    run_sphere_constants();
    run_pointwise_constancy();
    run_symfun_identities();
    run_cone_inequalities();
    run_calculus_oracle();
    run_k1_reduction();
    run_variational_identity();
    run_ellipticity();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] suite aborted: " << e.what() << "\n";
    ++g_failures;
  }
  std::cout << "\n" << (8 - g_failures) << "/8 criteria passed\n";
  return g_failures;
}
