#include "nsasd/jets.hpp"

#include <cctype>
#include <cstdlib>

namespace nsasd {

namespace {

// grammar:  expr   := term (('+'|'-') term)*
//           term   := factor (('*'|'/') factor)*
//           factor := unary ('^' factor)?          (right-assoc)
//           unary  := '-' unary | primary
//           primary:= number | ident '(' expr ')' | ident | '(' expr ')'
struct Parser {
  const std::string& s;
  const std::vector<std::string>& vars;
  size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw EvalError("expression parse error at position " + std::to_string(pos) + ": " + msg);
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      skip();
      if (eat('+')) e = e + term();
      else if (eat('-')) e = e - term();
      else return e;
    }
  }
  Expr term() {
    Expr e = factor();
    for (;;) {
      skip();
      if (eat('*')) e = e * factor();
      else if (eat('/')) e = e / factor();
      else return e;
    }
  }
  // '^' binds tighter than unary minus: -x^2 == -(x^2)
  Expr factor() {
    skip();
    if (eat('-')) return -factor();
    return powered();
  }
  Expr powered() {
    Expr base = primary();
    skip();
    if (eat('^')) {
      Expr ex = factor();
      if (!ex.valid() || ex.node()->op != Op::Const)
        fail("exponent must be a constant");
      return expr_pow(base, ex.node()->cval);
    }
    return base;
  }
  Expr primary() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(s.c_str() + pos, &end);
      pos = static_cast<size_t>(end - s.c_str());
      return Expr::constant(v);
    }
    if (eat('(')) {
      Expr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      const std::string name = s.substr(start, pos - start);
      skip();
      if (pos < s.size() && s[pos] == '(') {
        ++pos;
        Expr arg = expr();
        if (!eat(')')) fail("expected ')' after function argument");
        if (name == "exp") return expr_exp(arg);
        if (name == "log") return expr_log(arg);
        if (name == "sin") return expr_sin(arg);
        if (name == "cos") return expr_cos(arg);
        if (name == "sqrt") return expr_sqrt(arg);
        fail("unknown function '" + name + "'");
      }
      if (name == "pi") return Expr::constant(3.14159265358979323846);
      for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return Expr::var(static_cast<int>(i));
      fail("unknown variable '" + name + "'");
    }
    fail("unexpected character");
  }
};

}  // namespace

Expr parse_expr(const std::string& text, const std::vector<std::string>& vars) {
  Parser p{text, vars};
  Expr e = p.expr();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return e;
}

ScalarField parse_field(const std::string& text, const std::vector<std::string>& vars) {
  return {static_cast<int>(vars.size()), parse_expr(text, vars)};
}

}  // namespace nsasd
