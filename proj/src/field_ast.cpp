#include <charconv>
#include <cmath>

#include "kcurv/field.hpp"

namespace kcurv {

namespace {
ExprP make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
}  // namespace

ExprP e_const(double c) {
  if (c < 0.0 || !std::isfinite(c)) {
    throw validation_error("constant nodes must be finite and nonnegative");
  }
  Expr e;
  e.k = Expr::kind::constant;
  e.cval = c;
  return make(std::move(e));
}
ExprP e_var(int slot) {
  Expr e;
  e.k = Expr::kind::variable;
  e.slot = slot;
  return make(std::move(e));
}
ExprP e_add(ExprP a, ExprP b) {
  Expr e;
  e.k = Expr::kind::add;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}
ExprP e_sub(ExprP a, ExprP b) {
  Expr e;
  e.k = Expr::kind::sub;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}
ExprP e_mul(ExprP a, ExprP b) {
  Expr e;
  e.k = Expr::kind::mul;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}
ExprP e_div(ExprP a, ExprP b) {
  Expr e;
  e.k = Expr::kind::div;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}
ExprP e_neg(ExprP a) {
  Expr e;
  e.k = Expr::kind::neg;
  e.a = std::move(a);
  return make(std::move(e));
}
ExprP e_pow(ExprP a, long p) {
  Expr e;
  e.k = Expr::kind::pow_int;
  e.ip = p;
  e.a = std::move(a);
  return make(std::move(e));
}
ExprP e_pow(ExprP a, double p) {
  Expr e;
  e.k = Expr::kind::pow_real;
  e.rp = p;
  e.a = std::move(a);
  return make(std::move(e));
}
ExprP e_call(fun_kind f, ExprP a) {
  Expr e;
  e.k = Expr::kind::call;
  e.f = f;
  e.a = std::move(a);
  return make(std::move(e));
}

namespace {

const char* fun_name(fun_kind f) {
  switch (f) {
    case fun_kind::exp_f: return "exp";
    case fun_kind::log_f: return "log";
    case fun_kind::sin_f: return "sin";
    case fun_kind::cos_f: return "cos";
    case fun_kind::sqrt_f: return "sqrt";
    case fun_kind::bump1_f: return "bump1";
  }
  return "?";
}

std::string num_to_string(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// real exponents must reparse as reals: force a '.' when the shortest
/// representation looks integral
std::string real_exponent_string(double v) {
  std::string s = num_to_string(std::abs(v));
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find('E') == std::string::npos) {
    s += ".0";
  }
  return v < 0 ? "(-" + s + ")" : s;
}

/// precedence: add/sub 1, mul/div 2, neg 3, pow 4, atoms 5
int prec_of(const Expr& e) {
  switch (e.k) {
    case Expr::kind::add:
    case Expr::kind::sub: return 1;
    case Expr::kind::mul:
    case Expr::kind::div: return 2;
    case Expr::kind::neg: return 3;
    case Expr::kind::pow_int:
    case Expr::kind::pow_real: return 4;
    default: return 5;
  }
}

}  // namespace

namespace {
void print_named(const Expr& e, int parent, int n, std::string& out) {
  const int p = prec_of(e);
  const bool wrap = p < parent;
  if (wrap) out += '(';
  switch (e.k) {
    case Expr::kind::constant:
      out += num_to_string(e.cval);
      break;
    case Expr::kind::variable: {
      const int s = e.slot;
      if (s == 2 * n) {
        out += 't';
      } else if (s < n) {
        out += 'x' + std::to_string(s + 1);
      } else {
        out += 'y' + std::to_string(s - n + 1);
      }
      break;
    }
    case Expr::kind::add:
      print_named(*e.a, 1, n, out);
      out += " + ";
      print_named(*e.b, 2, n, out);
      break;
    case Expr::kind::sub:
      print_named(*e.a, 1, n, out);
      out += " - ";
      print_named(*e.b, 2, n, out);
      break;
    case Expr::kind::mul:
      print_named(*e.a, 2, n, out);
      out += "*";
      print_named(*e.b, 3, n, out);
      break;
    case Expr::kind::div:
      print_named(*e.a, 2, n, out);
      out += "/";
      print_named(*e.b, 3, n, out);
      break;
    case Expr::kind::neg:
      out += '-';
      print_named(*e.a, 3, n, out);
      break;
    case Expr::kind::pow_int:
      print_named(*e.a, 5, n, out);
      out += '^';
      if (e.ip < 0) {
        out += "(-" + std::to_string(-e.ip) + ")";
      } else {
        out += std::to_string(e.ip);
      }
      break;
    case Expr::kind::pow_real:
      print_named(*e.a, 5, n, out);
      out += '^';
      out += real_exponent_string(e.rp);
      break;
    case Expr::kind::call:
      out += fun_name(e.f);
      out += '(';
      print_named(*e.a, 1, n, out);
      out += ')';
      break;
  }
  if (wrap) out += ')';
}
}  // namespace

std::string print_field(const FieldExpr& f) {
  std::string out;
  print_named(*f.root, 1, f.n, out);
  return out;
}

std::string print_subexpr(const Expr& e, int n) {
  std::string out;
  print_named(e, 1, n, out);
  return out;
}

bool structurally_equal(const FieldExpr& a, const FieldExpr& b) {
  if (a.n != b.n) return false;
  struct Cmp {
    static bool eq(const Expr& x, const Expr& y) {
      if (x.k != y.k) return false;
      switch (x.k) {
        case Expr::kind::constant: return x.cval == y.cval;
        case Expr::kind::variable: return x.slot == y.slot;
        case Expr::kind::pow_int:
          return x.ip == y.ip && eq(*x.a, *y.a);
        case Expr::kind::pow_real:
          return x.rp == y.rp && eq(*x.a, *y.a);
        case Expr::kind::neg: return eq(*x.a, *y.a);
        case Expr::kind::call: return x.f == y.f && eq(*x.a, *y.a);
        default: return eq(*x.a, *y.a) && eq(*x.b, *y.b);
      }
    }
  };
  return Cmp::eq(*a.root, *b.root);
}

}  // namespace kcurv
