#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nsasd/jets.hpp"
#include "nsasd/report.hpp"

using namespace nsasd;

namespace {

Jet2 random_jet(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Jet2 j;
  j.n = n;
  j.v = u(rng);
  for (int i = 0; i < n; ++i) j.g[i] = u(rng);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) j.h[i][k] = j.h[k][i] = u(rng);
  return j;
}

}  // namespace

TEST_CASE("bilinear field jet") {
  // f(x) = x0*x1 at (2,3,0,0)
  ScalarField f{4, Expr::var(0) * Expr::var(1)};
  const double p[] = {2, 3, 0, 0};
  Jet2 j = jet_eval(f, p);
  CHECK(j.v == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(j.g[0] == doctest::Approx(3.0));
  CHECK(j.g[1] == doctest::Approx(2.0));
  CHECK(j.g[2] == 0.0);
  CHECK(j.h[0][1] == doctest::Approx(1.0));
  CHECK(j.h[1][0] == doctest::Approx(1.0));
  CHECK(j.h[0][0] == 0.0);
}

TEST_CASE("exp jet at origin") {
  ScalarField f{4, expr_exp(Expr::var(0))};
  const double p[] = {0, 0, 0, 0};
  Jet2 j = jet_eval(f, p);
  CHECK(j.v == doctest::Approx(1.0));
  CHECK(j.g[0] == doctest::Approx(1.0));
  CHECK(j.h[0][0] == doctest::Approx(1.0));
  CHECK(j.g[1] == 0.0);
}

TEST_CASE("Tod e^u field jet") {
  // e^u = 4(1-t^2)/(1+x^2+y^2)^2 on (x,y,t); value 4 and d2/dt2 = -8 at 0.
  const Expr x = Expr::var(0), y = Expr::var(1), t = Expr::var(2);
  ScalarField f{3, 4.0 * (1.0 - t * t) / expr_pow(1.0 + x * x + y * y, 2)};
  const double p[] = {0, 0, 0};
  Jet2 j = jet_eval(f, p);
  CHECK(j.v == doctest::Approx(4.0));
  CHECK(j.h[2][2] == doctest::Approx(-8.0));
  // hand-computed symbolic oracle for the x-part at origin: d2/dx2 = -16
  CHECK(j.h[0][0] == doctest::Approx(-16.0));
}

TEST_CASE("fd_crosscheck examples") {
  const Expr x = Expr::var(0), y = Expr::var(1), t = Expr::var(2);
  SUBCASE("quadratic polynomial: FD exact up to roundoff") {
    ScalarField f{4, Expr::var(0) * Expr::var(1) + 3.0 * Expr::var(2) * Expr::var(2)};
    const double p[] = {0.3, -0.7, 0.2, 0.9};
    CHECK(fd_crosscheck(f, p, 1e-3).maxAbs() < 1e-8);
  }
  SUBCASE("exp field") {
    ScalarField f{4, expr_exp(Expr::var(0))};
    const double p[] = {0.5, 0, 0, 0};
    CHECK(fd_crosscheck(f, p, 1e-3).maxAbs() < 1e-5);
  }
  SUBCASE("Tod e^u field") {
    ScalarField f{3, 4.0 * (1.0 - t * t) / expr_pow(1.0 + x * x + y * y, 2)};
    const double p[] = {0.1, 0.2, 0.3};
    CHECK(fd_crosscheck(f, p, 1e-3).maxAbs() < 1e-5);
  }
}

TEST_CASE("jet product and chain rule identities on random operands") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    Jet2 a = random_jet(rng, 4), b = random_jet(rng, 4);
    Jet2 p = a * b;
    CHECK(p.v == doctest::Approx(a.v * b.v));
    for (int i = 0; i < 4; ++i) {
      CHECK(p.g[i] == doctest::Approx(a.g[i] * b.v + a.v * b.g[i]));
      for (int j = 0; j < 4; ++j)
        CHECK(p.h[i][j] == doctest::Approx(a.h[i][j] * b.v + a.g[i] * b.g[j] +
                                           a.g[j] * b.g[i] + a.v * b.h[i][j]));
    }
    // chain rule for exp: hess(exp a) = exp(a)(h + g g^T)
    Jet2 e = jet_exp(a);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(e.h[i][j] ==
              doctest::Approx(std::exp(a.v) * (a.h[i][j] + a.g[i] * a.g[j])));
    // Hessian symmetry is preserved by arithmetic
    Jet2 q = (a * b) / jet_exp(b);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(q.h[i][j] == doctest::Approx(q.h[j][i]));
  }
}

TEST_CASE("affine reparametrization transforms jets covariantly") {
  // f(y) with y = A x + b as expression composition; grad -> A^T grad, hess -> A^T H A
  const double A[2][2] = {{1.5, -0.4}, {0.7, 2.0}};
  const double bb[2] = {0.3, -0.1};
  Expr y0 = A[0][0] * Expr::var(0) + A[0][1] * Expr::var(1) + bb[0];
  Expr y1 = A[1][0] * Expr::var(0) + A[1][1] * Expr::var(1) + bb[1];
  auto F = [](const Expr& u, const Expr& v) { return expr_sin(u) * v + u * u * v; };
  ScalarField comp{3, F(y0, y1)};
  ScalarField direct{3, F(Expr::var(0), Expr::var(1))};

  const double x[] = {0.2, -0.5, 0.0};
  const double y[] = {A[0][0] * x[0] + A[0][1] * x[1] + bb[0],
                      A[1][0] * x[0] + A[1][1] * x[1] + bb[1], 0.0};
  Jet2 jc = jet_eval(comp, x);
  Jet2 jd = jet_eval(direct, y);
  for (int i = 0; i < 2; ++i) {
    double gi = 0;
    for (int k = 0; k < 2; ++k) gi += A[k][i] * jd.g[k];
    CHECK(jc.g[i] == doctest::Approx(gi).epsilon(1e-12));
    for (int j = 0; j < 2; ++j) {
      double hij = 0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) hij += A[k][i] * jd.h[k][l] * A[l][j];
      CHECK(jc.h[i][j] == doctest::Approx(hij).epsilon(1e-12));
    }
  }
}

TEST_CASE("jets agree with FD at 100 quasi-random points") {
  const Expr x = Expr::var(0), y = Expr::var(1), w = Expr::var(2), z = Expr::var(3);
  std::vector<ScalarField> fields;
  fields.push_back({4, w * x + z * y + 0.4 * expr_sin(x + y) * expr_sin(w - z)});
  fields.push_back({4, expr_log(2.0 + x * x) + expr_sqrt(4.0 + w)});
  fields.push_back({4, expr_cos(x * y) / (2.0 + z * z)});
  Box box{{-1, -1, -1, -1}, {1, 1, 1, 1}};
  auto pts = sample_box(box, 100, 5);
  for (const auto& f : fields)
    for (const auto& p : pts) CHECK(fd_crosscheck(f, p, 1e-3).maxAbs() < 2e-5);
}

TEST_CASE("symbolic derivative matches jet gradient") {
  const Expr x = Expr::var(0), y = Expr::var(1);
  ScalarField f{2, expr_exp(x * y) * expr_cos(x) + expr_pow(1.0 + y * y, 2.5)};
  ScalarField fx = f.diff(0), fy = f.diff(1);
  Box box{{-1, -1}, {1, 1}};
  for (const auto& p : sample_box(box, 25, 3)) {
    Jet2 j = jet_eval(f, p);
    CHECK(field_value(fx, p) == doctest::Approx(j.g[0]).epsilon(1e-12));
    CHECK(field_value(fy, p) == doctest::Approx(j.g[1]).epsilon(1e-12));
    // second symbolic derivative matches the jet Hessian
    CHECK(field_value(fx.diff(1), p) == doctest::Approx(j.h[0][1]).epsilon(1e-11));
  }
}

TEST_CASE("singular locus raises instead of propagating NaN") {
  ScalarField f{4, 1.0 / Expr::var(0)};
  const double p[] = {1e-14, 0, 0, 0};
  CHECK_THROWS_AS(jet_eval(f, p), EvalError);
  ScalarField g{4, expr_log(Expr::var(0))};
  const double q[] = {-1.0, 0, 0, 0};
  CHECK_THROWS_AS(jet_eval(g, q), EvalError);
  ScalarField h{4, Expr::var(0), Box{{0, 0, 0, 0}, {1, 1, 1, 1}}};
  const double r[] = {2.0, 0, 0, 0};
  CHECK_THROWS_AS(jet_eval(h, r), EvalError);
}

TEST_CASE("expression parser") {
  auto f = parse_field("w*x + z*y + x^3", {"x", "y", "w", "z"});
  const double p[] = {2, 0.5, 3, -1};
  CHECK(field_value(f, p) == doctest::Approx(3 * 2 + (-1) * 0.5 + 8));
  auto g = parse_field("sin(x)*exp(-y) + 2/(1+x^2)", {"x", "y"});
  const double q[] = {0.3, 0.7};
  CHECK(field_value(g, q) ==
        doctest::Approx(std::sin(0.3) * std::exp(-0.7) + 2.0 / (1 + 0.09)));
  CHECK_THROWS_AS(parse_field("bogus(x)", {"x"}), EvalError);
  CHECK_THROWS_AS(parse_field("x + ", {"x"}), EvalError);
}

TEST_CASE("deterministic evaluation") {
  auto f = parse_field("sin(x)*cos(y)/(1+x^2+y^2)", {"x", "y"});
  const double p[] = {0.37, -0.82};
  Jet2 a = jet_eval(f, p), b = jet_eval(f, p);
  CHECK(a.v == b.v);
  for (int i = 0; i < 2; ++i) {
    CHECK(a.g[i] == b.g[i]);
    for (int j = 0; j < 2; ++j) CHECK(a.h[i][j] == b.h[i][j]);
  }
}
