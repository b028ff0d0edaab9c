#include <cctype>
#include <charconv>
#include <cstdlib>

#include "kcurv/field.hpp"

namespace kcurv {

namespace {

struct Token {
  enum class kind { num, ident, plus, minus, star, slash, caret, lpar, rpar, end };
  kind k;
  std::string text;
  double num = 0.0;
  bool num_is_int = false;
  std::size_t pos = 0;
};

struct Lexer {
  std::string_view s;
  std::size_t i = 0;

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    throw validation_error("parse error at position " + std::to_string(at) +
                           ": " + msg);
  }

  Token next() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    Token t;
    t.pos = i;
    if (i >= s.size()) {
      t.k = Token::kind::end;
      return t;
    }
    const char c = s[i];
    switch (c) {
      case '+': t.k = Token::kind::plus; ++i; return t;
      case '-': t.k = Token::kind::minus; ++i; return t;
      case '*': t.k = Token::kind::star; ++i; return t;
      case '/': t.k = Token::kind::slash; ++i; return t;
      case '^': t.k = Token::kind::caret; ++i; return t;
      case '(': t.k = Token::kind::lpar; ++i; return t;
      case ')': t.k = Token::kind::rpar; ++i; return t;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = i;
      bool is_int = true;
      while (i < s.size() &&
             std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        is_int = false;
        ++i;
        while (i < s.size() &&
               std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        is_int = false;
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) {
          fail(i, "malformed exponent in numeric literal");
        }
        while (i < s.size() &&
               std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      t.k = Token::kind::num;
      t.text = std::string(s.substr(start, i - start));
      if (t.text == ".") fail(start, "malformed numeric literal");
      t.num = std::strtod(t.text.c_str(), nullptr);
      t.num_is_int = is_int;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = i;
      while (i < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[i])))) ++i;
      t.k = Token::kind::ident;
      t.text = std::string(s.substr(start, i - start));
      return t;
    }
    fail(i, std::string("unexpected character '") + c + "'");
  }
};

struct Parser {
  Lexer lex;
  Token cur;
  int n;

  explicit Parser(std::string_view text, int n_) : lex{text}, n(n_) {
    cur = lex.next();
  }

  [[noreturn]] void fail(const std::string& msg) const { lex.fail(cur.pos, msg); }

  void advance() { cur = lex.next(); }

  bool accept(Token::kind k) {
    if (cur.k == k) {
      advance();
      return true;
    }
    return false;
  }

  void expect(Token::kind k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }

  ExprP expression() {
    ExprP e = term();
    while (true) {
      if (accept(Token::kind::plus)) {
        e = e_add(e, term());
      } else if (accept(Token::kind::minus)) {
        e = e_sub(e, term());
      } else {
        return e;
      }
    }
  }

  ExprP term() {
    ExprP e = unary();
    while (true) {
      if (accept(Token::kind::star)) {
        e = e_mul(e, unary());
      } else if (accept(Token::kind::slash)) {
        e = e_div(e, unary());
      } else {
        return e;
      }
    }
  }

  ExprP unary() {
    if (accept(Token::kind::minus)) return e_neg(unary());
    return postfix();
  }

  ExprP postfix() {
    ExprP base = primary();
    if (cur.k != Token::kind::caret) return base;
    advance();
    // exponent: literal number, optionally negated, optionally parenthesized
    bool par = accept(Token::kind::lpar);
    bool negated = accept(Token::kind::minus);
    if (cur.k != Token::kind::num) {
      fail("exponent must be a numeric literal");
    }
    const Token ex = cur;
    advance();
    if (par) expect(Token::kind::rpar, "')' after exponent");
    if (cur.k == Token::kind::caret) {
      fail("chained '^' requires parentheses");
    }
    if (ex.num_is_int) {
      const long p = negated ? -static_cast<long>(ex.num + 0.5)
                             : static_cast<long>(ex.num + 0.5);
      if (p > 64 || p < -64) fail("integer exponent magnitude limited to 64");
      return e_pow(base, p);
    }
    return e_pow(base, negated ? -ex.num : ex.num);
  }

  ExprP variable_or_call(const Token& id) {
    const std::string& name = id.text;
    // function?
    if (cur.k == Token::kind::lpar) {
      fun_kind f;
      if (name == "exp") f = fun_kind::exp_f;
      else if (name == "log") f = fun_kind::log_f;
      else if (name == "sin") f = fun_kind::sin_f;
      else if (name == "cos") f = fun_kind::cos_f;
      else if (name == "sqrt") f = fun_kind::sqrt_f;
      else if (name == "bump1") f = fun_kind::bump1_f;
      else lex.fail(id.pos, "unknown function '" + name + "'");
      advance();
      ExprP arg = expression();
      expect(Token::kind::rpar, "')' closing function argument");
      return e_call(f, arg);
    }
    // variable
    if (name == "t") return e_var(2 * n);
    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
      int idx = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
        if (idx < 1 || idx > n) {
          lex.fail(id.pos, "variable " + name + " out of range for n = " +
                               std::to_string(n));
        }
        return e_var(name[0] == 'x' ? idx - 1 : n + idx - 1);
      }
    }
    lex.fail(id.pos, "unknown identifier '" + name + "'");
  }

  ExprP primary() {
    if (cur.k == Token::kind::num) {
      const double v = cur.num;
      advance();
      return e_const(v);
    }
    if (cur.k == Token::kind::ident) {
      const Token id = cur;
      advance();
      return variable_or_call(id);
    }
    if (accept(Token::kind::lpar)) {
      ExprP e = expression();
      expect(Token::kind::rpar, "')'");
      return e;
    }
    fail("expected a number, variable, function call, or '('");
  }
};

}  // namespace

FieldExpr parse_field(std::string_view text, int n) {
  if (n < 1 || n > 16) {
    throw validation_error("dimension n must lie in [1, 16]");
  }
  Parser p(text, n);
  ExprP root = p.expression();
  if (p.cur.k != Token::kind::end) {
    p.fail("trailing input after expression");
  }
  return FieldExpr{n, std::move(root)};
}

}  // namespace kcurv
