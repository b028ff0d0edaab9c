#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "kcurv/errors.hpp"
#include "kcurv/field.hpp"
#include "kcurv/functional.hpp"
#include "kcurv/symfun.hpp"

using namespace kcurv;

namespace {

ModelConvention conv_n(int n) {
  ModelConvention c;
  c.n = n;
  return c;
}

const double pi = std::numbers::pi;

FieldExpr const_field(int n, double v) { return FieldExpr{n, e_const(v)}; }

}  // namespace

TEST_CASE("pseudo-Einstein sigma_k closed form") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(pseudo_einstein_sigma(n, 1, 0.0) == 0.0);
    for (double R : {1.0, 7.5, -3.0})
      CHECK(pseudo_einstein_sigma(n, 1, R) ==
            doctest::Approx(R / (2.0 * (n + 1))).epsilon(1e-14));
  }
  CHECK(pseudo_einstein_sigma(2, 2, 12.0) == doctest::Approx(1.0));
  // negative scalar, even k: positive value
  CHECK(pseudo_einstein_sigma(3, 2, -24.0) ==
        doctest::Approx(3.0 * std::pow(24.0 / 24.0, 2)));
  CHECK_THROWS_AS((void)pseudo_einstein_sigma(0, 1, 1.0), validation_error);
  CHECK_THROWS_AS((void)pseudo_einstein_sigma(2, 0, 1.0), validation_error);
  CHECK_THROWS_AS((void)pseudo_einstein_sigma(2, 3, 1.0), validation_error);
}

TEST_CASE("sphere lambda matches the closed-form constants") {
  SUBCASE("n = 1, k = 1") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 2);
    const SphereLambdaReport rep = sphere_lambda(1, 1, grid);
    CHECK(rep.target == doctest::Approx(pi).epsilon(1e-15));
    CHECK(rep.deviation <= 1e-8);
    CHECK(rep.detail.volume == doctest::Approx(std::pow(pi, 2)).epsilon(1e-8));
    CHECK(rep.detail.error_estimate <= 1e-8);
    CHECK(rep.detail.nodes == grid.node_count());
    CHECK(rep.detail.grid_level == 2);
  }
  SUBCASE("n = 2, k = 1 and k = 2") {
    const auto grid = QuadratureGrid::radial(conv_n(2), 2);
    const SphereLambdaReport r1 = sphere_lambda(2, 1, grid);
    CHECK(r1.target == doctest::Approx(2.0 * pi).epsilon(1e-15));
    CHECK(r1.deviation <= 1e-6);
    const SphereLambdaReport r2 = sphere_lambda(2, 2, grid);
    CHECK(r2.target == doctest::Approx(pi * pi).epsilon(1e-15));
    CHECK(r2.deviation <= 1e-6);
    CHECK(r2.detail.volume ==
          doctest::Approx(std::pow(pi, 3)).epsilon(1e-6));
  }
  SUBCASE("n = 3, k = 3 at a coarse level") {
    const auto grid = QuadratureGrid::radial(conv_n(3), 1);
    const SphereLambdaReport rep = sphere_lambda(3, 3, grid);
    CHECK(rep.target == doctest::Approx(std::pow(pi, 3)).epsilon(1e-15));
    CHECK(rep.deviation <= 1e-4);
  }
  SUBCASE("grid and structure dimensions must agree") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 1);
    CHECK_THROWS_AS((void)sphere_lambda(2, 1, grid), validation_error);
  }
}

TEST_CASE("J_k scale invariance and input rejection") {
  SUBCASE("J_k(c v) = J_k(v)") {
    for (int n : {1, 2}) {
      const auto grid = QuadratureGrid::radial(conv_n(n), 1);
      const FieldExpr v0 = catalog_v0(n);
      const FieldExpr scaled{
          n, e_mul(e_const(2.5), v0.root)};
      for (int k = 1; k <= n; ++k) {
        const double a =
            evaluate_Jk(power_structure(conv_n(n), v0), k, grid, false).J_k;
        const double b =
            evaluate_Jk(power_structure(conv_n(n), scaled), k, grid, false)
                .J_k;
        CHECK(std::abs(a - b) <= 1e-9 * std::abs(a));
      }
    }
  }
  SUBCASE("report fields are mutually consistent") {
    const auto grid = QuadratureGrid::radial(conv_n(2), 1);
    const FunctionalReport rep =
        evaluate_Jk(power_structure(conv_n(2), catalog_v0(2)), 2, grid, false);
    const double p = 2.0 + 2.0 / rep.n;
    const double expect =
        rep.Y_k / std::pow(rep.volume, 1.0 - 2.0 * rep.k / (rep.n * p));
    CHECK(rep.J_k == doctest::Approx(expect).epsilon(1e-14));
    CHECK(rep.lambda_estimate ==
          doctest::Approx(std::pow(2.0 / rep.n, rep.k) * rep.J_k)
              .epsilon(1e-14));
    CHECK(rep.error_estimate == 0.0);
  }
  SUBCASE("degenerate and out-of-range k") {
    const auto g1 = QuadratureGrid::radial(conv_n(1), 0);
    const auto g2 = QuadratureGrid::radial(conv_n(2), 0);
    const ConformalStructure c1 = power_structure(conv_n(1), catalog_v0(1));
    const ConformalStructure c2 = power_structure(conv_n(2), catalog_v0(2));
    CHECK_THROWS_AS((void)evaluate_Jk(c1, 2, g1, false), validation_error);
    CHECK_THROWS_AS((void)evaluate_Jk(c2, 3, g2, false), validation_error);
    CHECK_THROWS_AS((void)evaluate_Jk(c1, 0, g1, false), validation_error);
    try {
      (void)evaluate_Jk(c1, 2, g1, false);
      CHECK(false);
    } catch (const validation_error& e) {
      CHECK(std::string(e.what()).find("1 - 2k/(np)") != std::string::npos);
    }
  }
  SUBCASE("log-form structures are rejected") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 0);
    const ConformalStructure cs =
        log_structure(conv_n(1), const_field(1, 0.0));
    CHECK_THROWS_AS((void)evaluate_Jk(cs, 1, grid, false), validation_error);
  }
  SUBCASE("non-decaying factors are flagged as divergent") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 0);
    const ConformalStructure cs =
        power_structure(conv_n(1), const_field(1, 1.0));
    CHECK_THROWS_AS((void)evaluate_Jk(cs, 1, grid, false), quadrature_error);
  }
}

TEST_CASE("variational derivative: flat base is critical") {
  const FieldExpr phi1 = catalog_bump(1, 0.8, 0.0);
  // map scales matched to the direction support: the linear term of the
  // difference is a pure divergence whose quadrature residue sets the floor
  const auto g1 = QuadratureGrid::radial(conv_n(1), 3, 1.5, 2.0);
  const VariationReport r1 =
      variational_derivative(const_field(1, 0.0), phi1, 1, g1);
  CHECK(r1.hypothesis_route == "bilinear");
  CHECK(r1.cotton_violation <= 1e-12);
  CHECK(r1.I_phi == 0.0);
  CHECK(std::abs(r1.fd_derivative) <= 1e-6);
  CHECK(r1.gap_derived <= 1e-6);
  CHECK(r1.gap_transcribed <= 1e-6);
  CHECK(r1.coeff_derived == doctest::Approx(2.0));
  CHECK(r1.coeff_transcribed == doctest::Approx(-6.0));

  const FieldExpr phi2 = catalog_bump(2, 0.8, 0.0);
  const auto g2 = QuadratureGrid::radial(conv_n(2), 1);
  const VariationReport r2 =
      variational_derivative(const_field(2, 0.0), phi2, 2, g2);
  CHECK(r2.I_phi == 0.0);
  CHECK(std::abs(r2.fd_derivative) <= 1e-7);
  CHECK(r2.coeff_derived == doctest::Approx(2.0));
  CHECK(r2.coeff_transcribed == doctest::Approx(-10.0));
}

TEST_CASE("variational derivative: sphere base separates the two constants") {
  SUBCASE("n = 1, k = 1 goes through the bilinear route") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 3, 1.5, 2.0);
    const VariationReport rep = variational_derivative(
        catalog_sphere_log(1), catalog_bump(1, 0.8, 0.0), 1, grid);
    CHECK(rep.hypothesis_route == "bilinear");
    CHECK(rep.cotton_violation <= 1e-10);
    CHECK(rep.I_phi > 0.0);
    CHECK(rep.gap_derived <= 1e-3);
    CHECK(rep.gap_derived <= 1e-5);
    CHECK(rep.gap_transcribed > 1.0);
    // step halving shrinks the pre-extrapolation error by about 4
    const double e1 = std::abs(rep.fd_coarse - rep.fd_derivative);
    const double e2 = std::abs(rep.fd_half - rep.fd_derivative);
    CHECK(e2 <= e1 / 2.5 + 1e-12);
    // strict mode is fine here: no waiver was needed
    const VariationReport srep = variational_derivative(
        catalog_sphere_log(1), catalog_bump(1, 0.8, 0.0), 1, grid, 1e-4, true);
    CHECK(srep.hypothesis_route == "bilinear");
  }
  SUBCASE("n = 2 needs the parallel-Schouten waiver") {
    const auto grid = QuadratureGrid::radial(conv_n(2), 2, 1.5, 2.0);
    for (int k : {1, 2}) {
      const VariationReport rep = variational_derivative(
          catalog_sphere_log(2), catalog_bump(2, 0.8, 0.0), k, grid);
      CHECK(rep.hypothesis_route == "parallel-schouten");
      CHECK(rep.cotton_violation > 1e-3);
      CHECK(rep.I_phi > 0.0);
      CHECK(rep.gap_derived <= 1e-3);
      CHECK(rep.gap_transcribed > 0.5);
    }
    CHECK_THROWS_AS(
        (void)variational_derivative(catalog_sphere_log(2),
                                     catalog_bump(2, 0.8, 0.0), 1, grid, 1e-4,
                                     true),
        hypothesis_error);
  }
  SUBCASE("no waiver for structures that are not parallel-Schouten") {
    const auto grid = QuadratureGrid::radial(conv_n(2), 1);
    const FieldExpr u = parse_field("t", 2);
    try {
      (void)variational_derivative(u, catalog_bump(2, 0.8, 0.0), 1, grid);
      CHECK(false);
    } catch (const hypothesis_error& e) {
      CHECK(std::string(e.what()).find("constant multiple") !=
            std::string::npos);
    }
  }
  SUBCASE("validation") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 0);
    CHECK_THROWS_AS(
        (void)variational_derivative(const_field(1, 0.0), const_field(1, 0.0),
                                     1, grid),
        validation_error);
    CHECK_THROWS_AS(
        (void)variational_derivative(const_field(1, 0.0),
                                     catalog_bump(1, 0.8, 0.0), 1, grid, 0.0),
        validation_error);
    CHECK_THROWS_AS(
        (void)variational_derivative(const_field(2, 0.0),
                                     catalog_bump(1, 0.8, 0.0), 1, grid),
        validation_error);
  }
}

TEST_CASE("criticality of the sphere factor") {
  SUBCASE("n = 1, k = 1") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 2, 1.5, 2.0);
    const std::vector<FieldExpr> dirs = {catalog_bump(1, 0.8, 0.0),
                                         catalog_bump(1, 0.6, 0.5),
                                         catalog_bump(1, 0.5, -0.4)};
    const CriticalityReport rep = criticality_check(1, grid, dirs);
    CHECK(rep.J_base == doctest::Approx(pi / 2.0).epsilon(1e-6));
    CHECK(rep.derivative.size() == 3);
    CHECK(rep.max_normalized <= 1e-3);

    // a direction proportional to v0 differentiates to zero by scale
    // invariance
    const CriticalityReport srep =
        criticality_check(1, grid, {catalog_v0(1)});
    CHECK(srep.max_normalized <= 1e-9);
  }
  SUBCASE("n = 2, k = 2") {
    const auto grid = QuadratureGrid::radial(conv_n(2), 2, 1.5, 2.0);
    const std::vector<FieldExpr> dirs = {catalog_bump(2, 0.8, 0.0),
                                         catalog_bump(2, 0.6, 0.5),
                                         catalog_bump(2, 0.5, -0.4)};
    const CriticalityReport rep = criticality_check(2, grid, dirs);
    CHECK(rep.max_normalized <= 5e-3);
  }
  SUBCASE("validation") {
    const auto grid = QuadratureGrid::radial(conv_n(1), 0);
    CHECK_THROWS_AS((void)criticality_check(1, grid, {}), validation_error);
    CHECK_THROWS_AS(
        (void)criticality_check(2, grid, {catalog_bump(1, 0.8, 0.0)}),
        validation_error);
  }
}

TEST_CASE("sphere constancy ties lambda to pointwise sigma_k") {
  // lambda_estimate should equal sigma_k(theta~) at any point times
  // volume^{2k/(np)} when sigma_k is constant, as it is for the sphere
  for (int n : {1, 2}) {
    const auto grid = QuadratureGrid::radial(conv_n(n), 1);
    const ConformalStructure cs = power_structure(conv_n(n), catalog_v0(n));
    for (int k = 1; k <= n; ++k) {
      const FunctionalReport rep = evaluate_Jk(cs, k, grid, false);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n + 1);
      x(0) = 0.3;
      x(2 * n) = -0.2;
      const double sig = sigma_k_curvature(cs, HPoint(x), k);
      const double p = 2.0 + 2.0 / n;
      CHECK(rep.lambda_estimate ==
            doctest::Approx(sig * std::pow(rep.volume, 2.0 * k / (n * p)))
                .epsilon(1e-6));
    }
  }
  // k = 1, n = 1: the lambda estimate is (2/n) J_1
  const auto grid = QuadratureGrid::radial(conv_n(1), 1);
  const FunctionalReport rep =
      evaluate_Jk(power_structure(conv_n(1), catalog_v0(1)), 1, grid, false);
  CHECK(2.0 * rep.J_k == doctest::Approx(rep.lambda_estimate).epsilon(1e-14));
  CHECK(rep.lambda_estimate == doctest::Approx(pi).epsilon(1e-5));
}
