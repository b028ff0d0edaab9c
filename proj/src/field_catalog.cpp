#include <utility>

#include "kcurv/field.hpp"

namespace kcurv {

namespace {

ExprP x_var(int i) { return e_var(i); }            // x_{i+1}
ExprP y_var(int n, int i) { return e_var(n + i); } // y_{i+1}
ExprP t_var(int n) { return e_var(2 * n); }

/// |z|^2 = sum x_i^2 + y_i^2
ExprP radius_sq(int n) {
  ExprP s = e_pow(x_var(0), 2L);
  s = e_add(std::move(s), e_pow(y_var(n, 0), 2L));
  for (int i = 1; i < n; ++i) {
    s = e_add(std::move(s), e_pow(x_var(i), 2L));
    s = e_add(std::move(s), e_pow(y_var(n, i), 2L));
  }
  return s;
}

/// t^2 + (1 + |z|^2)^2
ExprP sphere_q(int n) {
  return e_add(e_pow(t_var(n), 2L),
               e_pow(e_add(e_const(1.0), radius_sq(n)), 2L));
}

}  // namespace

FieldExpr catalog_v0(int n) {
  ExprP q = sphere_q(n);
  ExprP root = (n % 2 == 0) ? e_pow(std::move(q), -static_cast<long>(n / 2))
                            : e_pow(std::move(q), -0.5 * n);
  return FieldExpr{n, std::move(root)};
}

FieldExpr catalog_bump(int n, double radius, double t_center) {
  if (!(radius > 0.0)) throw validation_error("bump radius must be positive");
  ExprP tt = e_pow(t_var(n), 2L);
  if (t_center > 0.0)
    tt = e_pow(e_sub(t_var(n), e_const(t_center)), 2L);
  else if (t_center < 0.0)
    tt = e_pow(e_add(t_var(n), e_const(-t_center)), 2L);
  ExprP arg = e_div(e_add(radius_sq(n), std::move(tt)),
                    e_const(radius * radius));
  return FieldExpr{n, e_call(fun_kind::bump1_f, std::move(arg))};
}

FieldExpr catalog_gaussian(int n) {
  ExprP s = e_add(radius_sq(n), e_pow(t_var(n), 2L));
  return FieldExpr{n, e_call(fun_kind::exp_f, e_neg(std::move(s)))};
}

FieldExpr catalog_sphere_log(int n) {
  ExprP half_log = e_mul(e_const(0.5), e_call(fun_kind::log_f, sphere_q(n)));
  return FieldExpr{n, e_neg(std::move(half_log))};
}

std::vector<std::pair<std::string, FieldExpr>> field_catalog(int n) {
  std::vector<std::pair<std::string, FieldExpr>> out;
  out.emplace_back("v0", catalog_v0(n));
  out.emplace_back("sphere_log", catalog_sphere_log(n));
  out.emplace_back("gaussian", catalog_gaussian(n));
  out.emplace_back("bump", catalog_bump(n, 1.0, 0.0));
  out.emplace_back("monomial",
                   FieldExpr{n, e_mul(e_pow(x_var(0), 2L), t_var(n))});
  out.emplace_back("poly_mixed",
                   FieldExpr{n, e_add(e_sub(e_pow(x_var(0), 2L),
                                            e_pow(y_var(n, 0), 2L)),
                                      e_mul(x_var(0), t_var(n)))});
  out.emplace_back(
      "log_smooth",
      FieldExpr{n, e_call(fun_kind::log_f,
                          e_add(e_const(1.0),
                                e_add(e_pow(x_var(0), 2L),
                                      e_pow(t_var(n), 2L))))});
  out.emplace_back("trig",
                   FieldExpr{n, e_mul(e_call(fun_kind::sin_f, x_var(0)),
                                      e_call(fun_kind::cos_f, t_var(n)))});
  out.emplace_back("rational",
                   FieldExpr{n, e_div(t_var(n),
                                      e_add(e_const(1.0), radius_sq(n)))});
  out.emplace_back(
      "sqrt_shift",
      FieldExpr{n, e_call(fun_kind::sqrt_f,
                          e_add(e_const(1.0),
                                e_add(radius_sq(n), e_pow(t_var(n), 2L))))});
  return out;
}

FieldExpr catalog_field(const std::string& name, int n) {
  auto entries = field_catalog(n);
  for (auto& [k, f] : entries) {
    if (k == name) return std::move(f);
  }
  std::string known;
  for (const auto& [k, f] : entries) {
    if (!known.empty()) known += ", ";
    known += k;
  }
  throw validation_error("unknown catalog field '" + name +
                         "' (known: " + known + ")");
}

namespace {

ExprP random_rec(int n, Rng& rng, int depth) {
  if (depth <= 0 || rng.uniform() < 0.25) {
    if (rng.uniform() < 0.6) {
      const int slot = static_cast<int>(rng.uniform() * (2 * n + 1));
      return e_var(slot < 2 * n + 1 ? slot : 2 * n);
    }
    static const double pool[] = {1.0, 2.0, 3.0, 0.5, 1.5, 0.25};
    return e_const(pool[static_cast<int>(rng.uniform() * 6) % 6]);
  }
  const int pick = static_cast<int>(rng.uniform() * 12) % 12;
  switch (pick) {
    case 0:
      return e_add(random_rec(n, rng, depth - 1), random_rec(n, rng, depth - 1));
    case 1:
      return e_sub(random_rec(n, rng, depth - 1), random_rec(n, rng, depth - 1));
    case 2:
      return e_mul(random_rec(n, rng, depth - 1), random_rec(n, rng, depth - 1));
    case 3:
      return e_neg(random_rec(n, rng, depth - 1));
    case 4:
      return e_pow(random_rec(n, rng, depth - 1),
                   rng.uniform() < 0.5 ? 2L : 3L);
    case 5:
      return e_call(fun_kind::sin_f, random_rec(n, rng, depth - 1));
    case 6:
      return e_call(fun_kind::cos_f, random_rec(n, rng, depth - 1));
    case 7:
      // bounded exponent keeps exp() and its third derivative tame
      return e_call(fun_kind::exp_f,
                    e_mul(e_const(0.25),
                          e_call(fun_kind::sin_f, random_rec(n, rng, depth - 1))));
    case 8:
      return e_call(fun_kind::log_f,
                    e_add(e_const(1.0),
                          e_pow(random_rec(n, rng, depth - 1), 2L)));
    case 9:
      return e_call(fun_kind::sqrt_f,
                    e_add(e_const(1.0),
                          e_pow(random_rec(n, rng, depth - 1), 2L)));
    case 10:
      return e_div(random_rec(n, rng, depth - 1),
                   e_add(e_const(2.0),
                         e_pow(random_rec(n, rng, depth - 1), 2L)));
    default: {
      static const double exps[] = {0.5, -0.5, 1.5};
      return e_pow(e_add(e_const(1.0),
                         e_pow(random_rec(n, rng, depth - 1), 2L)),
                   exps[static_cast<int>(rng.uniform() * 3) % 3]);
    }
  }
}

}  // namespace

FieldExpr random_field(int n, Rng& rng, int max_depth) {
  if (n < 1 || n > 16) throw validation_error("n out of range [1,16]");
  return FieldExpr{n, random_rec(n, rng, max_depth)};
}

}  // namespace kcurv
