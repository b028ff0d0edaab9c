// Timing comparison of the quadrature kernels: serial reference (one
// worker) against the OpenMP path (all available workers) on the same
// grids. The node reduction is a fixed-order pairwise tree, so the two
// paths must agree bitwise; the benchmark enforces that and exits nonzero
// on any mismatch.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kcurv/conformal.hpp"
#include "kcurv/field.hpp"
#include "kcurv/heisenberg.hpp"
#include "kcurv/quadrature.hpp"
#include "kcurv/symfun.hpp"

#ifdef KCURV_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

using namespace kcurv;

double time_ms(const QuadratureGrid& grid, const Integrand& f, int workers,
               int reps, double& value) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const IntegrateResult res = integrate(grid, f, nullptr, workers);
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0)
                        .count());
    value = res.value;
  }
  return best;
}

bool bitwise_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

struct Case {
  std::string name;
  QuadratureGrid grid;
  Integrand f;
};

}  // namespace

int main() {
#ifdef KCURV_HAVE_OPENMP
  const int max_workers = omp_get_max_threads();
#else
  const int max_workers = 1;
#endif
  std::cout << "quadrature kernel benchmark: serial reference vs OpenMP ("
            << max_workers << " workers available)\n\n";

  std::vector<Case> cases;

  {
    ModelConvention conv;
    conv.n = 1;
    const ConformalStructure cs = power_structure(conv, catalog_v0(1));
    const double p = 2.0 + 2.0 / 1;
    const Integrand vol = [cs, p](const Eigen::VectorXd& x) {
      return std::pow(eval_value(cs.factor, x), p);
    };
    const Integrand sig = [cs](const Eigen::VectorXd& x) {
      const SchoutenAtPoint sp = schouten(cs, HPoint(x));
      return std::pow(sp.weight, 2) * sigma_k(sp.S_mixed, 1);
    };
    cases.push_back({"n=1 volume, level 2",
                     QuadratureGrid::radial(conv, 2), vol});
    cases.push_back({"n=1 volume, level 3",
                     QuadratureGrid::radial(conv, 3), vol});
    cases.push_back({"n=1 sigma_1 density, level 3",
                     QuadratureGrid::radial(conv, 3), sig});
  }
  {
    ModelConvention conv;
    conv.n = 2;
    const ConformalStructure cs = power_structure(conv, catalog_v0(2));
    const Integrand sig = [cs](const Eigen::VectorXd& x) {
      const SchoutenAtPoint sp = schouten(cs, HPoint(x));
      return std::pow(sp.weight, 3) * sigma_k(sp.S_mixed, 2);
    };
    cases.push_back({"n=2 sigma_2 density, level 2",
                     QuadratureGrid::radial(conv, 2), sig});
    cases.push_back({"n=2 sigma_2 density, level 3",
                     QuadratureGrid::radial(conv, 3), sig});
  }

  std::cout << std::left << std::setw(30) << "case" << std::right
            << std::setw(9) << "nodes" << std::setw(12) << "serial ms"
            << std::setw(12) << "openmp ms" << std::setw(10) << "speedup"
            << std::setw(10) << "bitwise\n";

  int mismatches = 0;
  for (const auto& c : cases) {
    double v_serial = 0.0, v_parallel = 0.0;
    (void)time_ms(c.grid, c.f, 1, 1, v_serial);  // warm up
    const double ser = time_ms(c.grid, c.f, 1, 3, v_serial);
    const double par = time_ms(c.grid, c.f, 0, 3, v_parallel);
    const bool same = bitwise_equal(v_serial, v_parallel);
    if (!same) ++mismatches;
    std::cout << std::left << std::setw(30) << c.name << std::right
              << std::setw(9) << c.grid.node_count() << std::setw(12)
              << std::fixed << std::setprecision(2) << ser << std::setw(12)
              << par << std::setw(10) << std::setprecision(2) << (ser / par)
              << std::setw(9) << (same ? "yes" : "NO") << "\n";
  }

  std::cout << "\n"
            << (mismatches == 0
                    ? "serial and OpenMP results are bitwise identical"
                    : "BITWISE MISMATCH between serial and OpenMP results")
            << "\n";
  return mismatches == 0 ? 0 : 1;
}
