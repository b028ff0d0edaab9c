#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kcurv/errors.hpp"
#include "kcurv/rng.hpp"

namespace kcurv {

/// Coordinate layout for dimension parameter n: slots 0..n-1 are x1..xn,
/// slots n..2n-1 are y1..yn, slot 2n is t. Total d = 2n+1 real variables.

enum class fun_kind { exp_f, log_f, sin_f, cos_f, sqrt_f, bump1_f };

/// Expression node. Constant nodes always hold nonnegative values; negation
/// is an explicit neg node (keeps printing/reparsing structurally exact).
struct Expr {
  enum class kind {
    constant,
    variable,
    add,
    sub,
    mul,
    div,
    neg,
    pow_int,
    pow_real,
    call
  };
  kind k;
  double cval = 0.0;          // constant
  int slot = -1;              // variable
  long ip = 0;                // pow_int exponent
  double rp = 0.0;            // pow_real exponent
  fun_kind f = fun_kind::exp_f;
  std::shared_ptr<const Expr> a, b;
};
using ExprP = std::shared_ptr<const Expr>;

/// A parsed field over H^n: expression tree plus the dimension it was
/// validated against.
struct FieldExpr {
  int n = 0;
  ExprP root;
  [[nodiscard]] int dim() const { return 2 * n + 1; }
};

/// node constructors (used by the catalog and tests)
[[nodiscard]] ExprP e_const(double c);
[[nodiscard]] ExprP e_var(int slot);
[[nodiscard]] ExprP e_add(ExprP a, ExprP b);
[[nodiscard]] ExprP e_sub(ExprP a, ExprP b);
[[nodiscard]] ExprP e_mul(ExprP a, ExprP b);
[[nodiscard]] ExprP e_div(ExprP a, ExprP b);
[[nodiscard]] ExprP e_neg(ExprP a);
[[nodiscard]] ExprP e_pow(ExprP a, long p);
[[nodiscard]] ExprP e_pow(ExprP a, double p);
[[nodiscard]] ExprP e_call(fun_kind f, ExprP a);

/// Parses the expression grammar (+, -, *, /, unary -, ^ with literal
/// integer or real exponent, exp/log/sin/cos/sqrt/bump1, variables x1..xn,
/// y1..yn, t). Precedence: ^ > unary - > *,/ > +,-. Throws validation_error
/// with the offending position.
[[nodiscard]] FieldExpr parse_field(std::string_view text, int n);

/// Printer; parse_field(print_field(f), n) is structurally equal to f.
[[nodiscard]] std::string print_field(const FieldExpr& f);
/// prints a subtree with the variable names of dimension n (error messages)
[[nodiscard]] std::string print_subexpr(const Expr& e, int n);

[[nodiscard]] bool structurally_equal(const FieldExpr& a, const FieldExpr& b);

/// Degree-3 truncated Taylor jet in d real variables: value, gradient,
/// hessian, and the full symmetric third-order tensor (d^3 storage).
struct Jet3 {
  int d = 0;
  double v = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  std::vector<double> t;

  static Jet3 zero(int d);
  static Jet3 constant(int d, double c);
  static Jet3 variable(int d, int slot, double x);

  [[nodiscard]] double t3(int i, int j, int k) const {
    return t[static_cast<std::size_t>((i * d + j) * d + k)];
  }
  double& t3(int i, int j, int k) {
    return t[static_cast<std::size_t>((i * d + j) * d + k)];
  }
};

[[nodiscard]] Jet3 jet_add(const Jet3& a, const Jet3& b);
[[nodiscard]] Jet3 jet_sub(const Jet3& a, const Jet3& b);
[[nodiscard]] Jet3 jet_scale(const Jet3& a, double c);
[[nodiscard]] Jet3 jet_mul(const Jet3& a, const Jet3& b);
/// chain rule with derivative ladder (c0 = phi(s), c1 = phi'(s), ...)
[[nodiscard]] Jet3 jet_compose(double c0, double c1, double c2, double c3,
                               const Jet3& f);

/// Evaluates value only (no derivatives); same domain checks as eval_jet3.
[[nodiscard]] double eval_value(const FieldExpr& f, const Eigen::VectorXd& x);

/// Evaluates the full degree-3 jet at x (size 2n+1). Domain violations throw
/// evaluation_error naming the offending subexpression and point.
[[nodiscard]] Jet3 eval_jet3(const FieldExpr& f, const Eigen::VectorXd& x);

/// Central finite-difference jet of order O(h^2) per derivative order;
/// the oracle against eval_jet3.
[[nodiscard]] Jet3 fd_jet3(const FieldExpr& f, const Eigen::VectorXd& x,
                           double h = 1e-4);

/// ---- catalog -------------------------------------------------------------

/// v0(z,t) = (t^2 + (1+|z|^2)^2)^{-n/2}
[[nodiscard]] FieldExpr catalog_v0(int n);
/// smooth bump: bump1((|z|^2 + (t - t_center)^2) / radius^2); support is the
/// ball |z|^2 + (t-t_center)^2 < radius^2
[[nodiscard]] FieldExpr catalog_bump(int n, double radius, double t_center);
/// exp(-(|z|^2 + t^2))
[[nodiscard]] FieldExpr catalog_gaussian(int n);
/// -1/2 log(t^2 + (1+|z|^2)^2): the log-form factor with e^{2u} = v0^{2/n}
[[nodiscard]] FieldExpr catalog_sphere_log(int n);
/// named catalog used by the AD-vs-FD and round-trip suites
[[nodiscard]] std::vector<std::pair<std::string, FieldExpr>> field_catalog(
    int n);
/// catalog lookup by name ("v0", "bump", "gaussian", "sphere_log", ...);
/// validation_error for unknown names
[[nodiscard]] FieldExpr catalog_field(const std::string& name, int n);

/// Random expression tree from a safe grammar subset (denominators and
/// log/sqrt/fractional-power arguments bounded away from their domain
/// boundaries by construction; no bump1). Depth-bounded; deterministic in
/// the rng stream.
[[nodiscard]] FieldExpr random_field(int n, Rng& rng, int max_depth = 6);

}  // namespace kcurv
