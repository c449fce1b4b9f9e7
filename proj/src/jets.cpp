#include "nsasd/jets.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace nsasd {

Jet2 Jet2::constant(int n, double c) {
  Jet2 j;
  j.n = n;
  j.v = c;
  return j;
}

Jet2 Jet2::variable(int n, int i, double x) {
  Jet2 j;
  j.n = n;
  j.v = x;
  j.g[i] = 1.0;
  return j;
}

static void check_finite(const Jet2& j) {
  if (!std::isfinite(j.v)) throw EvalError("non-finite intermediate value");
}

Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r = a;
  r.v += b.v;
  for (int i = 0; i < a.n; ++i) {
    r.g[i] += b.g[i];
    for (int j = 0; j < a.n; ++j) r.h[i][j] += b.h[i][j];
  }
  return r;
}

Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r = a;
  r.v -= b.v;
  for (int i = 0; i < a.n; ++i) {
    r.g[i] -= b.g[i];
    for (int j = 0; j < a.n; ++j) r.h[i][j] -= b.h[i][j];
  }
  return r;
}

Jet2 operator-(const Jet2& a) {
  Jet2 r = a;
  r.v = -r.v;
  for (int i = 0; i < a.n; ++i) {
    r.g[i] = -r.g[i];
    for (int j = 0; j < a.n; ++j) r.h[i][j] = -r.h[i][j];
  }
  return r;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.n = a.n;
  r.v = a.v * b.v;
  for (int i = 0; i < a.n; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      r.h[i][j] = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i][j];
  return r;
}

// Composition with a scalar function F: r = F(a), using F'(a.v), F''(a.v).
static Jet2 chain(const Jet2& a, double f, double f1, double f2) {
  Jet2 r;
  r.n = a.n;
  r.v = f;
  for (int i = 0; i < a.n; ++i) r.g[i] = f1 * a.g[i];
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      r.h[i][j] = f1 * a.h[i][j] + f2 * a.g[i] * a.g[j];
  check_finite(r);
  return r;
}

Jet2 operator/(const Jet2& a, const Jet2& b) {
  if (std::abs(b.v) < kSingularTol) throw EvalError("division by value below singular tolerance");
  const double iv = 1.0 / b.v;
  return a * chain(b, iv, -iv * iv, 2.0 * iv * iv * iv);
}

Jet2 jet_exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}

Jet2 jet_log(const Jet2& a) {
  if (a.v < kSingularTol) throw EvalError("log of non-positive argument");
  const double iv = 1.0 / a.v;
  return chain(a, std::log(a.v), iv, -iv * iv);
}

Jet2 jet_sin(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, s, c, -s);
}

Jet2 jet_cos(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, c, -s, -c);
}

Jet2 jet_sqrt(const Jet2& a) {
  if (a.v < kSingularTol) throw EvalError("sqrt of non-positive argument");
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

Jet2 jet_pow(const Jet2& a, double k) {
  const double ki = std::round(k);
  if (std::abs(k - ki) < 1e-14 && std::abs(ki) <= 16) {
    int m = static_cast<int>(ki);
    if (m == 0) return Jet2::constant(a.n, 1.0);
    bool inv = m < 0;
    if (inv) m = -m;
    Jet2 r = a;
    for (int i = 1; i < m; ++i) r = r * a;
    if (inv) return Jet2::constant(a.n, 1.0) / r;
    return r;
  }
  if (a.v < kSingularTol) throw EvalError("pow of non-positive base with non-integer exponent");
  const double f = std::pow(a.v, k);
  return chain(a, f, k * f / a.v, k * (k - 1.0) * f / (a.v * a.v));
}

// --- expression graph ----------------------------------------------------

static Expr make(Op op, ExprPtr a = nullptr, ExprPtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return Expr(ExprPtr(std::move(n)));
}

Expr Expr::constant(double c) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Const;
  n->cval = c;
  return Expr(ExprPtr(std::move(n)));
}

Expr Expr::var(int i) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Var;
  n->var = i;
  return Expr(ExprPtr(std::move(n)));
}

static bool is_const(const Expr& e, double c) {
  return e.valid() && e.node()->op == Op::Const && e.node()->cval == c;
}
static bool is_const(const Expr& e) { return e.valid() && e.node()->op == Op::Const; }

Expr operator+(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (is_const(a) && is_const(b)) return Expr::constant(a.node()->cval + b.node()->cval);
  return make(Op::Add, a.node(), b.node());
}

Expr operator-(const Expr& a, const Expr& b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a) && is_const(b)) return Expr::constant(a.node()->cval - b.node()->cval);
  if (is_const(a, 0.0)) return -b;
  return make(Op::Sub, a.node(), b.node());
}

Expr operator-(const Expr& a) {
  if (is_const(a)) return Expr::constant(-a.node()->cval);
  if (a.valid() && a.node()->op == Op::Neg) return Expr(a.node()->a);
  return make(Op::Neg, a.node());
}

Expr operator*(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr::constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return Expr::constant(a.node()->cval * b.node()->cval);
  return make(Op::Mul, a.node(), b.node());
}

Expr operator/(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0)) return Expr::constant(0.0);
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return Expr::constant(a.node()->cval / b.node()->cval);
  return make(Op::Div, a.node(), b.node());
}

Expr operator+(const Expr& a, double c) { return a + Expr::constant(c); }
Expr operator+(double c, const Expr& a) { return Expr::constant(c) + a; }
Expr operator-(const Expr& a, double c) { return a - Expr::constant(c); }
Expr operator-(double c, const Expr& a) { return Expr::constant(c) - a; }
Expr operator*(const Expr& a, double c) { return a * Expr::constant(c); }
Expr operator*(double c, const Expr& a) { return Expr::constant(c) * a; }
Expr operator/(const Expr& a, double c) { return a / Expr::constant(c); }
Expr operator/(double c, const Expr& a) { return Expr::constant(c) / a; }

Expr expr_pow(const Expr& a, double k) {
  if (k == 0.0) return Expr::constant(1.0);
  if (k == 1.0) return a;
  if (is_const(a)) return Expr::constant(std::pow(a.node()->cval, k));
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Pow;
  n->expo = k;
  n->a = a.node();
  return Expr(ExprPtr(std::move(n)));
}
Expr expr_exp(const Expr& a) { return make(Op::Exp, a.node()); }
Expr expr_log(const Expr& a) { return make(Op::Log, a.node()); }
Expr expr_sin(const Expr& a) {
  if (is_const(a)) return Expr::constant(std::sin(a.node()->cval));
  return make(Op::Sin, a.node());
}
Expr expr_cos(const Expr& a) {
  if (is_const(a)) return Expr::constant(std::cos(a.node()->cval));
  return make(Op::Cos, a.node());
}
Expr expr_sqrt(const Expr& a) { return make(Op::Sqrt, a.node()); }

namespace {

using DiffMemo = std::unordered_map<const ExprNode*, Expr>;

Expr diff_rec(const ExprPtr& n, int i, DiffMemo& memo) {
  if (!n) return Expr::constant(0.0);
  auto it = memo.find(n.get());
  if (it != memo.end()) return it->second;
  Expr A(n->a), B(n->b);
  Expr r;
  switch (n->op) {
    case Op::Const: r = Expr::constant(0.0); break;
    case Op::Var: r = Expr::constant(n->var == i ? 1.0 : 0.0); break;
    case Op::Add: r = diff_rec(n->a, i, memo) + diff_rec(n->b, i, memo); break;
    case Op::Sub: r = diff_rec(n->a, i, memo) - diff_rec(n->b, i, memo); break;
    case Op::Neg: r = -diff_rec(n->a, i, memo); break;
    case Op::Mul:
      r = diff_rec(n->a, i, memo) * B + A * diff_rec(n->b, i, memo);
      break;
    case Op::Div:
      r = (diff_rec(n->a, i, memo) * B - A * diff_rec(n->b, i, memo)) / (B * B);
      break;
    case Op::Pow:
      r = Expr::constant(n->expo) * expr_pow(A, n->expo - 1.0) * diff_rec(n->a, i, memo);
      break;
    case Op::Exp: r = Expr(ExprPtr(n)) * diff_rec(n->a, i, memo); break;
    case Op::Log: r = diff_rec(n->a, i, memo) / A; break;
    case Op::Sin: r = expr_cos(A) * diff_rec(n->a, i, memo); break;
    case Op::Cos: r = -expr_sin(A) * diff_rec(n->a, i, memo); break;
    case Op::Sqrt:
      r = diff_rec(n->a, i, memo) / (Expr::constant(2.0) * Expr(ExprPtr(n)));
      break;
  }
  memo.emplace(n.get(), r);
  return r;
}

using JetMemo = std::unordered_map<const ExprNode*, Jet2>;

Jet2 jet_rec(const ExprPtr& n, std::span<const double> x, int nv, JetMemo& memo) {
  auto it = memo.find(n.get());
  if (it != memo.end()) return it->second;
  Jet2 r;
  switch (n->op) {
    case Op::Const: r = Jet2::constant(nv, n->cval); break;
    case Op::Var: r = Jet2::variable(nv, n->var, x[n->var]); break;
    case Op::Add: r = jet_rec(n->a, x, nv, memo) + jet_rec(n->b, x, nv, memo); break;
    case Op::Sub: r = jet_rec(n->a, x, nv, memo) - jet_rec(n->b, x, nv, memo); break;
    case Op::Neg: r = -jet_rec(n->a, x, nv, memo); break;
    case Op::Mul: r = jet_rec(n->a, x, nv, memo) * jet_rec(n->b, x, nv, memo); break;
    case Op::Div: r = jet_rec(n->a, x, nv, memo) / jet_rec(n->b, x, nv, memo); break;
    case Op::Pow: r = jet_pow(jet_rec(n->a, x, nv, memo), n->expo); break;
    case Op::Exp: r = jet_exp(jet_rec(n->a, x, nv, memo)); break;
    case Op::Log: r = jet_log(jet_rec(n->a, x, nv, memo)); break;
    case Op::Sin: r = jet_sin(jet_rec(n->a, x, nv, memo)); break;
    case Op::Cos: r = jet_cos(jet_rec(n->a, x, nv, memo)); break;
    case Op::Sqrt: r = jet_sqrt(jet_rec(n->a, x, nv, memo)); break;
  }
  check_finite(r);
  memo.emplace(n.get(), r);
  return r;
}

double val_rec(const ExprPtr& n, std::span<const double> x,
               std::unordered_map<const ExprNode*, double>& memo) {
  auto it = memo.find(n.get());
  if (it != memo.end()) return it->second;
  double r = 0;
  switch (n->op) {
    case Op::Const: r = n->cval; break;
    case Op::Var: r = x[n->var]; break;
    case Op::Add: r = val_rec(n->a, x, memo) + val_rec(n->b, x, memo); break;
    case Op::Sub: r = val_rec(n->a, x, memo) - val_rec(n->b, x, memo); break;
    case Op::Neg: r = -val_rec(n->a, x, memo); break;
    case Op::Mul: r = val_rec(n->a, x, memo) * val_rec(n->b, x, memo); break;
    case Op::Div: {
      const double d = val_rec(n->b, x, memo);
      if (std::abs(d) < kSingularTol) throw EvalError("division by value below singular tolerance");
      r = val_rec(n->a, x, memo) / d;
      break;
    }
    case Op::Pow: r = std::pow(val_rec(n->a, x, memo), n->expo); break;
    case Op::Exp: r = std::exp(val_rec(n->a, x, memo)); break;
    case Op::Log: {
      const double a = val_rec(n->a, x, memo);
      if (a < kSingularTol) throw EvalError("log of non-positive argument");
      r = std::log(a);
      break;
    }
    case Op::Sin: r = std::sin(val_rec(n->a, x, memo)); break;
    case Op::Cos: r = std::cos(val_rec(n->a, x, memo)); break;
    case Op::Sqrt: {
      const double a = val_rec(n->a, x, memo);
      if (a < kSingularTol) throw EvalError("sqrt of non-positive argument");
      r = std::sqrt(a);
      break;
    }
  }
  if (!std::isfinite(r)) throw EvalError("non-finite intermediate value");
  memo.emplace(n.get(), r);
  return r;
}

void str_rec(const ExprPtr& n, std::ostringstream& os) {
  if (!n) {
    os << "0";
    return;
  }
  switch (n->op) {
    case Op::Const: os << n->cval; break;
    case Op::Var: os << "x" << n->var; break;
    case Op::Add: os << "("; str_rec(n->a, os); os << "+"; str_rec(n->b, os); os << ")"; break;
    case Op::Sub: os << "("; str_rec(n->a, os); os << "-"; str_rec(n->b, os); os << ")"; break;
    case Op::Neg: os << "(-"; str_rec(n->a, os); os << ")"; break;
    case Op::Mul: os << "("; str_rec(n->a, os); os << "*"; str_rec(n->b, os); os << ")"; break;
    case Op::Div: os << "("; str_rec(n->a, os); os << "/"; str_rec(n->b, os); os << ")"; break;
    case Op::Pow: os << "("; str_rec(n->a, os); os << "^" << n->expo << ")"; break;
    case Op::Exp: os << "exp("; str_rec(n->a, os); os << ")"; break;
    case Op::Log: os << "log("; str_rec(n->a, os); os << ")"; break;
    case Op::Sin: os << "sin("; str_rec(n->a, os); os << ")"; break;
    case Op::Cos: os << "cos("; str_rec(n->a, os); os << ")"; break;
    case Op::Sqrt: os << "sqrt("; str_rec(n->a, os); os << ")"; break;
  }
}

}  // namespace

Expr Expr::diff(int i) const {
  if (!node_) return Expr::constant(0.0);
  DiffMemo memo;
  return diff_rec(node_, i, memo);
}

double Expr::value(std::span<const double> x) const {
  if (!node_) return 0.0;
  std::unordered_map<const ExprNode*, double> memo;
  return val_rec(node_, x, memo);
}

Jet2 Expr::jet(std::span<const double> x, int nvars) const {
  if (!node_) return Jet2::constant(nvars, 0.0);
  JetMemo memo;
  return jet_rec(node_, x, nvars, memo);
}

std::string Expr::str() const {
  std::ostringstream os;
  str_rec(node_, os);
  return os.str();
}

bool Box::contains(std::span<const double> p) const {
  for (size_t i = 0; i < lo.size(); ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

Jet2 jet_eval(const ScalarField& f, std::span<const double> p) {
  if (static_cast<int>(p.size()) < f.arity)
    throw EvalError("point dimension below field arity");
  if (f.domain && !f.domain->contains(p.subspan(0, f.arity)))
    throw EvalError("point outside declared domain box");
  return f.expr.jet(p, f.arity);
}

double field_value(const ScalarField& f, std::span<const double> p) {
  if (f.domain && !f.domain->contains(p.subspan(0, f.arity)))
    throw EvalError("point outside declared domain box");
  return f.expr.value(p);
}

FdReport fd_crosscheck(const ScalarField& f, std::span<const double> p, double h) {
  if (h <= 0.0) throw EvalError("fd_crosscheck requires h > 0");
  const int n = f.arity;
  const Jet2 j = jet_eval(f, p);
  std::vector<double> q(p.begin(), p.end());

  auto val = [&](const std::vector<double>& x) { return f.expr.value(x); };
  auto grad_fd = [&](int i, double step) {
    q.assign(p.begin(), p.end());
    q[i] += step;
    const double fp = val(q);
    q[i] -= 2 * step;
    const double fm = val(q);
    q[i] += step;
    return (fp - fm) / (2 * step);
  };
  auto hess_fd = [&](int i, int k, double step) {
    if (i == k) {
      q.assign(p.begin(), p.end());
      const double f0 = val(q);
      q[i] += step;
      const double fp = val(q);
      q[i] -= 2 * step;
      const double fm = val(q);
      return (fp - 2 * f0 + fm) / (step * step);
    }
    q.assign(p.begin(), p.end());
    q[i] += step; q[k] += step;
    const double fpp = val(q);
    q[k] -= 2 * step;
    const double fpm = val(q);
    q[i] -= 2 * step;
    const double fmm = val(q);
    q[k] += 2 * step;
    const double fmp = val(q);
    return (fpp - fpm - fmp + fmm) / (4 * step * step);
  };
  // Richardson: central differences have error c*h^2 + O(h^4).
  auto rich = [](double dh, double dh2) { return (4.0 * dh2 - dh) / 3.0; };

  FdReport r;
  for (int i = 0; i < n; ++i) {
    const double d = rich(grad_fd(i, h), grad_fd(i, h / 2));
    const double e = std::abs(d - j.g[i]);
    if (e > r.maxGradErr) r.maxGradErr = e;
  }
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) {
      const double d = rich(hess_fd(i, k, h), hess_fd(i, k, h / 2));
      const double e = std::abs(d - j.h[i][k]);
      if (e > r.maxHessErr) r.maxHessErr = e;
    }
  return r;
}

}  // namespace nsasd
