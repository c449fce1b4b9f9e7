#pragma once

// Exact forward-mode differentiation of scalar fields to second order.
//
// Scalar fields are closed expression trees over the primitives
// {+, -, *, /, pow, exp, log, sin, cos, sqrt} plus variables and constants.
// Evaluation produces a Jet2 (value, gradient, Hessian) with no truncation
// error, and the tree can be differentiated symbolically, so derived fields
// (Hessians of potentials, PDE residuals, ...) are again exact fields.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsasd {

inline constexpr int kMaxVars = 5;
inline constexpr double kSingularTol = 1e-12;

// Thrown when evaluation hits a singular locus (division by ~0, log/sqrt of a
// non-positive argument) or a point outside a field's declared domain.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Value, gradient and Hessian of a scalar at a point of an n-dim chart, n<=5.
struct Jet2 {
  int n = 0;
  double v = 0.0;
  std::array<double, kMaxVars> g{};
  std::array<std::array<double, kMaxVars>, kMaxVars> h{};

  static Jet2 constant(int n, double c);
  static Jet2 variable(int n, int i, double x);
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator/(const Jet2& a, const Jet2& b);
Jet2 jet_exp(const Jet2& a);
Jet2 jet_log(const Jet2& a);
Jet2 jet_sin(const Jet2& a);
Jet2 jet_cos(const Jet2& a);
Jet2 jet_sqrt(const Jet2& a);
Jet2 jet_pow(const Jet2& a, double k);

enum class Op : std::uint8_t {
  Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Log, Sin, Cos, Sqrt
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Op op;
  double cval = 0.0;   // Const
  int var = -1;        // Var
  double expo = 0.0;   // Pow exponent
  ExprPtr a, b;
};

// Immutable expression handle with value semantics.
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr n) : node_(std::move(n)) {}

  static Expr constant(double c);
  static Expr var(int i);

  const ExprPtr& node() const { return node_; }
  bool valid() const { return node_ != nullptr; }

  // Symbolic partial derivative with respect to variable i.
  Expr diff(int i) const;

  double value(std::span<const double> x) const;
  Jet2 jet(std::span<const double> x, int nvars) const;

  std::string str() const;

 private:
  ExprPtr node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator+(const Expr& a, double c);
Expr operator+(double c, const Expr& a);
Expr operator-(const Expr& a, double c);
Expr operator-(double c, const Expr& a);
Expr operator*(const Expr& a, double c);
Expr operator*(double c, const Expr& a);
Expr operator/(const Expr& a, double c);
Expr operator/(double c, const Expr& a);
Expr expr_pow(const Expr& a, double k);
Expr expr_exp(const Expr& a);
Expr expr_log(const Expr& a);
Expr expr_sin(const Expr& a);
Expr expr_cos(const Expr& a);
Expr expr_sqrt(const Expr& a);

// Axis-aligned chart box.
struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> p) const;
};

// A deterministic scalar field on an n-dim chart, n in {3,4,5}.
struct ScalarField {
  int arity = 0;
  Expr expr;
  std::optional<Box> domain;

  ScalarField() = default;
  ScalarField(int n, Expr e) : arity(n), expr(std::move(e)) {}
  ScalarField(int n, Expr e, Box box)
      : arity(n), expr(std::move(e)), domain(std::move(box)) {}

  ScalarField diff(int i) const { return {arity, expr.diff(i)}; }
  bool is_zero() const { return !expr.valid(); }
};

// Exact jet of f at p. Errors on domain violation or singular evaluation.
Jet2 jet_eval(const ScalarField& f, std::span<const double> p);

// Value-only evaluation (same error contract).
double field_value(const ScalarField& f, std::span<const double> p);

// Central finite differences of f's values against the jet's grad/hess,
// Richardson-extrapolated with steps {h, h/2}. Report-only.
struct FdReport {
  double maxGradErr = 0.0;
  double maxHessErr = 0.0;
  double maxAbs() const { return maxGradErr > maxHessErr ? maxGradErr : maxHessErr; }
};
FdReport fd_crosscheck(const ScalarField& f, std::span<const double> p, double h);

// Parses the CLI expression grammar: numbers, named variables, + - * / ^,
// parentheses, unary minus, and exp/log/sin/cos/sqrt. Whitespace-insensitive.
Expr parse_expr(const std::string& text, const std::vector<std::string>& vars);
ScalarField parse_field(const std::string& text, const std::vector<std::string>& vars);

}  // namespace nsasd
