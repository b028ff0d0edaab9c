#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "kcurv/quadrature.hpp"

#ifdef KCURV_HAVE_OPENMP
#include <omp.h>
#endif

namespace kcurv {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// |S^{2n-1}| = 2 pi^n / (n-1)!
double sphere_area(int n) {
  double fact = 1.0;
  for (int i = 1; i < n; ++i) fact *= i;
  return 2.0 * std::pow(kPi, n) / fact;
}

/// fixed-order pairwise reduction; deterministic for any worker count
double tree_sum(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  for (std::size_t stride = 1; stride < v.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < v.size(); i += 2 * stride) {
      v[i] += v[i + stride];
    }
  }
  return v[0];
}

int axis_points(int level) { return 24 << level; }

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int m) {
  static std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  if (m < 1 || m > 4096) throw validation_error("gauss_legendre size");

  Eigen::VectorXd x(m), w(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    // Chebyshev initial guess, Newton on the Legendre recurrence
    double xi = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 64; ++it2) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (xi * p1 - p0) / (xi * xi - 1.0);
      const double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) {
        // one more sweep at the converged point to refresh dp
        double q0 = 1.0, q1 = xi;
        for (int k = 2; k <= m; ++k) {
          const double q2 = ((2.0 * k - 1.0) * xi * q1 - (k - 1.0) * q0) / k;
          q0 = q1;
          q1 = q2;
        }
        dp = m * (xi * q1 - q0) / (xi * xi - 1.0);
        break;
      }
    }
    x(i) = -xi;
    x(m - 1 - i) = xi;
    const double wi = 2.0 / ((1.0 - xi * xi) * dp * dp);
    w(i) = wi;
    w(m - 1 - i) = wi;
  }
  cache[m] = {x, w};
  return cache[m];
}

QuadratureGrid QuadratureGrid::radial(const ModelConvention& conv, int level,
                                      double z_len, double t_len) {
  conv.validate();
  if (level < 0 || level > 8) throw validation_error("grid level");
  const int n = conv.n;
  const int mr = axis_points(level);
  const int mt = 2 * axis_points(level);
  auto [xr, wr] = gauss_legendre(mr);
  auto [xt, wt] = gauss_legendre(mt);

  QuadratureGrid g;
  g.k = kind::radial_tan;
  g.n = n;
  g.level = level;
  g.z_len = z_len;
  g.t_len = t_len;
  const long K = static_cast<long>(mr) * mt;
  g.points.setZero(K, 2 * n + 1);
  g.weights.resize(K);
  g.outer.assign(K, false);
  const double pref = conv.kappa() * sphere_area(n);
  long idx = 0;
  for (int i = 0; i < mr; ++i) {
    // rho = L tan(pi (xi+1)/4) maps (-1,1) onto (0, inf)
    const double a = kPi * (xr(i) + 1.0) / 4.0;
    const double rho = z_len * std::tan(a);
    const double jr = z_len * (kPi / 4.0) / (std::cos(a) * std::cos(a));
    for (int j = 0; j < mt; ++j) {
      const double b = kPi * xt(j) / 2.0;
      const double t = t_len * std::tan(b);
      const double jt = t_len * (kPi / 2.0) / (std::cos(b) * std::cos(b));
      g.points(idx, 0) = rho;
      g.points(idx, 2 * n) = t;
      g.weights(idx) =
          pref * std::pow(rho, 2 * n - 1) * wr(i) * jr * wt(j) * jt;
      // rho's lower end is the origin, not a tail; only the far bands count
      g.outer[idx] = xr(i) > 0.9 || std::abs(xt(j)) > 0.9;
      ++idx;
    }
  }
  return g;
}

QuadratureGrid QuadratureGrid::radial_box(const ModelConvention& conv,
                                          int level, double rho_max,
                                          double t_min, double t_max) {
  conv.validate();
  if (level < 0 || level > 8) throw validation_error("grid level");
  if (!(rho_max > 0.0) || !(t_max > t_min)) {
    throw validation_error("radial_box bounds");
  }
  const int n = conv.n;
  const int mr = axis_points(level);
  const int mt = axis_points(level);
  auto [xr, wr] = gauss_legendre(mr);
  auto [xt, wt] = gauss_legendre(mt);

  QuadratureGrid g;
  g.k = kind::radial_box;
  g.n = n;
  g.level = level;
  g.rho_max = rho_max;
  g.t_min = t_min;
  g.t_max = t_max;
  const long K = static_cast<long>(mr) * mt;
  g.points.setZero(K, 2 * n + 1);
  g.weights.resize(K);
  g.outer.assign(K, false);
  const double pref = conv.kappa() * sphere_area(n);
  long idx = 0;
  for (int i = 0; i < mr; ++i) {
    const double rho = 0.5 * rho_max * (xr(i) + 1.0);
    const double jr = 0.5 * rho_max;
    for (int j = 0; j < mt; ++j) {
      const double t = 0.5 * (t_max + t_min) + 0.5 * (t_max - t_min) * xt(j);
      const double jt = 0.5 * (t_max - t_min);
      g.points(idx, 0) = rho;
      g.points(idx, 2 * n) = t;
      g.weights(idx) =
          pref * std::pow(rho, 2 * n - 1) * wr(i) * jr * wt(j) * jt;
      g.outer[idx] = xr(i) > 0.9 || std::abs(xt(j)) > 0.9;
      ++idx;
    }
  }
  return g;
}

QuadratureGrid QuadratureGrid::full(const ModelConvention& conv, int level,
                                    double z_len, double t_len) {
  conv.validate();
  if (level < 0 || level > 8) throw validation_error("grid level");
  const int n = conv.n;
  const int d = 2 * n + 1;
  const int m = axis_points(level);
  if (std::pow(double(m), d) > 4e7) {
    throw validation_error(
        "full grid too large for this n/level; use a radial grid");
  }
  auto [xg, wg] = gauss_legendre(m);

  QuadratureGrid g;
  g.k = kind::full_tan;
  g.n = n;
  g.level = level;
  g.z_len = z_len;
  g.t_len = t_len;
  long K = 1;
  for (int i = 0; i < d; ++i) K *= m;
  g.points.resize(K, d);
  g.weights.resize(K);
  g.outer.assign(K, false);

  std::vector<double> coord(m), jac(m), coord_t(m), jac_t(m);
  for (int i = 0; i < m; ++i) {
    const double a = kPi * xg(i) / 2.0;
    coord[i] = z_len * std::tan(a);
    jac[i] = z_len * (kPi / 2.0) / (std::cos(a) * std::cos(a));
    coord_t[i] = t_len * std::tan(a);
    jac_t[i] = t_len * (kPi / 2.0) / (std::cos(a) * std::cos(a));
  }
  for (long idx = 0; idx < K; ++idx) {
    long rem = idx;
    double w = conv.kappa();
    bool out = false;
    for (int ax = 0; ax < d; ++ax) {
      const int i = static_cast<int>(rem % m);
      rem /= m;
      const bool is_t = (ax == d - 1);
      g.points(idx, ax) = is_t ? coord_t[i] : coord[i];
      w *= wg(i) * (is_t ? jac_t[i] : jac[i]);
      out = out || std::abs(xg(i)) > 0.9;
    }
    g.weights(idx) = w;
    g.outer[idx] = out;
  }
  return g;
}

QuadratureGrid QuadratureGrid::box(const ModelConvention& conv, int level,
                                   double half_width) {
  conv.validate();
  if (level < 0 || level > 8) throw validation_error("grid level");
  if (!(half_width > 0.0)) throw validation_error("box half_width");
  const int n = conv.n;
  const int d = 2 * n + 1;
  const int m = axis_points(level);
  if (std::pow(double(m), d) > 4e7) {
    throw validation_error(
        "box grid too large for this n/level; use a radial grid");
  }
  auto [xg, wg] = gauss_legendre(m);

  QuadratureGrid g;
  g.k = kind::full_box;
  g.n = n;
  g.level = level;
  g.half_width = half_width;
  long K = 1;
  for (int i = 0; i < d; ++i) K *= m;
  g.points.resize(K, d);
  g.weights.resize(K);
  g.outer.assign(K, false);
  for (long idx = 0; idx < K; ++idx) {
    long rem = idx;
    double w = conv.kappa();
    bool out = false;
    for (int ax = 0; ax < d; ++ax) {
      const int i = static_cast<int>(rem % m);
      rem /= m;
      g.points(idx, ax) = half_width * xg(i);
      w *= wg(i) * half_width;
      out = out || std::abs(xg(i)) > 0.9;
    }
    g.weights(idx) = w;
    g.outer[idx] = out;
  }
  return g;
}

QuadratureGrid QuadratureGrid::refined() const {
  ModelConvention conv;
  conv.n = n;
  switch (k) {
    case kind::radial_tan: return radial(conv, level + 1, z_len, t_len);
    case kind::radial_box:
      return radial_box(conv, level + 1, rho_max, t_min, t_max);
    case kind::full_tan: return full(conv, level + 1, z_len, t_len);
    case kind::full_box: return box(conv, level + 1, half_width);
  }
  throw validation_error("unknown grid kind");
}

IntegrateResult integrate(const QuadratureGrid& grid, const Integrand& f,
                          const FieldExpr* conformal_weight, int workers) {
  const long K = grid.node_count();
  std::vector<double> vals(static_cast<std::size_t>(K), 0.0);
  const double vol_exp = conformal_weight ? 2.0 * (grid.n + 1) : 0.0;

  std::atomic<long> bad_node{-1};
  std::string err_msg;
  std::mutex err_mu;

#ifdef KCURV_HAVE_OPENMP
  const int nw = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nw)
#else
  (void)workers;
#endif
  for (long i = 0; i < K; ++i) {
    if (bad_node.load(std::memory_order_relaxed) >= 0) continue;
    try {
      const Eigen::VectorXd p = grid.points.row(i);
      double v = f(p);
      if (conformal_weight) {
        v *= std::exp(vol_exp * eval_value(*conformal_weight, p));
      }
      if (!std::isfinite(v)) {
        long expect = -1;
        if (bad_node.compare_exchange_strong(expect, i)) {
          std::lock_guard<std::mutex> lk(err_mu);
          err_msg = "non-finite integrand sample";
        }
        continue;
      }
      vals[static_cast<std::size_t>(i)] = v * grid.weights(i);
    } catch (const std::exception& e) {
      long expect = -1;
      if (bad_node.compare_exchange_strong(expect, i)) {
        std::lock_guard<std::mutex> lk(err_mu);
        err_msg = e.what();
      }
    }
  }

  if (bad_node.load() >= 0) {
    const long i = bad_node.load();
    std::ostringstream os;
    os << err_msg << " at node " << i << " (";
    for (int c = 0; c < grid.points.cols(); ++c) {
      if (c) os << ", ";
      os << grid.points(i, c);
    }
    os << ")";
    throw quadrature_error(os.str());
  }

  IntegrateResult r;
  r.nodes = K;
  double abs_total = 0.0, abs_outer = 0.0;
  for (long i = 0; i < K; ++i) {
    const double a = std::abs(vals[static_cast<std::size_t>(i)]);
    abs_total += a;
    if (grid.outer[static_cast<std::size_t>(i)]) abs_outer += a;
  }
  r.tail_fraction = abs_total > 0.0 ? abs_outer / abs_total : 0.0;
  r.value = tree_sum(vals);
  return r;
}

std::pair<double, double> refinement_error(const QuadratureGrid& grid,
                                           const Integrand& f,
                                           const FieldExpr* conformal_weight,
                                           int workers) {
  const double coarse = integrate(grid, f, conformal_weight, workers).value;
  const double fine =
      integrate(grid.refined(), f, conformal_weight, workers).value;
  return {fine, std::abs(fine - coarse)};
}

}  // namespace kcurv
