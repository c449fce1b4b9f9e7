#include "nsasd/zoo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace nsasd {

namespace {

const Expr kOne = Expr::constant(1.0);

Box box4(double lo, double hi) { return Box{{lo, lo, lo, lo}, {hi, hi, hi, hi}}; }

std::vector<double> box_center(const Box& b) {
  std::vector<double> c(b.dim());
  for (int i = 0; i < b.dim(); ++i) c[i] = 0.5 * (b.lo[i] + b.hi[i]) + 0.01 * (i + 1);
  return c;
}

// Orientation in which the primed sigma-forms of the frame are self-dual.
double orient_from_frame(const MetricField& m, const TetradFrame& f) {
  const auto c = box_center(m.box);
  SigmaBasis sb = sigma_basis(f, c);
  MetricPoint mp = eval_metric_point(m, c);
  TwoForm s = hodge_star2(mp, 1.0, sb.primed[0][1]);
  double dot = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) dot += s[a][b] * sb.primed[0][1][a][b];
  return dot >= 0 ? 1.0 : -1.0;
}

ScalarField sf4(const Expr& e) { return {4, e}; }

}  // namespace

void ZooEntry::set_kahler(int a, int b, ScalarField f) {
  hasKahlerForm = true;
  kahlerForm[a][b] = f;
  kahlerForm[b][a] = {f.arity, -f.expr};
}

NamedResidual field_residual(std::string name, double tol, ScalarField f) {
  return {std::move(name), tol,
          [f](std::span<const double> p) { return field_value(f, p); }};
}

double laplace_beltrami(const MetricField& g, const ScalarField& f,
                        std::span<const double> p) {
  MetricJets mj = eval_metric_jets(g, p);
  MetricPoint mp = mj.pt();
  ChristoffelJets cj = christoffel_jets(mj);
  Jet2 fj = jet_eval(f, p);
  double s = 0;
  for (int a = 0; a < g.dim; ++a)
    for (int b = 0; b < g.dim; ++b) {
      double t = fj.h[a][b];
      for (int c = 0; c < g.dim; ++c) t -= cj.v[c][a][b] * fj.g[c];
      s += mp.Ginv[a][b] * t;
    }
  return s;
}

double conformal_killing_residual(const MetricField& g, const KillingData& k,
                                  std::span<const double> p) {
  MetricJets mj = eval_metric_jets(g, p);
  MetricPoint mp = mj.pt();
  const int n = g.dim;
  Jet2 K[4];
  for (int a = 0; a < n; ++a)
    K[a] = k.comp[a].is_zero() ? Jet2::constant(n, 0.0) : jet_eval(k.comp[a], p);
  double lie[4][4];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0;
      for (int c = 0; c < n; ++c)
        s += K[c].v * mj.comp[a][b].g[c] + mj.comp[c][b].v * K[c].g[a] +
             mj.comp[a][c].v * K[c].g[b];
      lie[a][b] = s;
    }
  double trace = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) trace += mp.Ginv[a][b] * lie[a][b];
  const double c = trace / n;
  double worst = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      worst = std::max(worst, std::abs(lie[a][b] - c * mp.G[a][b]));
  return worst;
}

double twist_magnitude(const MetricField& g, const KillingData& k,
                       std::span<const double> p) {
  MetricJets mj = eval_metric_jets(g, p);
  const int n = g.dim;
  Jet2 K[4];
  for (int a = 0; a < n; ++a)
    K[a] = k.comp[a].is_zero() ? Jet2::constant(n, 0.0) : jet_eval(k.comp[a], p);
  Jet1 KK[4];
  for (int a = 0; a < n; ++a) {
    Jet1 s = Jet1::constant(n, 0.0);
    for (int b = 0; b < n; ++b) {
      Jet1 gb{n, mj.comp[a][b].v, {}}, Kb{n, K[b].v, {}};
      for (int i = 0; i < n; ++i) {
        gb.g[i] = mj.comp[a][b].g[i];
        Kb.g[i] = K[b].g[i];
      }
      s = s + gb * Kb;
    }
    KK[a] = s;
  }
  double dK[4][4];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) dK[a][b] = KK[b].g[a] - KK[a].g[b];
  double worst = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double t = KK[a].v * dK[b][c] + KK[b].v * dK[c][a] + KK[c].v * dK[a][b];
        worst = std::max(worst, std::abs(t));
      }
  return worst;
}

// --- builders ---------------------------------------------------------------

ZooEntry build_flat() {
  ZooEntry e;
  e.name = "flat";
  e.metric.dim = 4;
  e.metric.box = box4(-1, 1);
  e.metric.add_ds2(0, 3, Expr::constant(2.0));
  e.metric.add_ds2(1, 2, Expr::constant(-2.0));
  TetradFrame f;
  for (int i = 0; i < 4; ++i) {
    const int A = i / 2, Ap = i % 2;
    f.e[A][Ap][i] = ScalarField(4, kOne);
  }
  e.frame = f;
  e.metric.orientation = orient_from_frame(e.metric, f);
  e.expected.asd = true;
  e.expected.ricciFlat = true;
  e.expected.petrov = PetrovType::O;
  return e;
}

ZooEntry build_g0() {
  ZooEntry e;
  e.name = "g0";
  e.metric.dim = 4;
  e.metric.box = box4(-1, 1);
  const Expr z1 = Expr::var(0), z2 = Expr::var(1), c1 = Expr::var(2), c2 = Expr::var(3);
  const Expr a2 = 4.0 / expr_pow(1.0 + z1 * z1 + z2 * z2, 2);
  const Expr b2 = 4.0 / expr_pow(1.0 + c1 * c1 + c2 * c2, 2);
  e.metric.add_ds2(0, 0, a2);
  e.metric.add_ds2(1, 1, a2);
  e.metric.add_ds2(2, 2, -1.0 * b2);
  e.metric.add_ds2(3, 3, -1.0 * b2);
  const Expr ia = (1.0 + z1 * z1 + z2 * z2) / 2.0;
  const Expr ib = (1.0 + c1 * c1 + c2 * c2) / 2.0;
  const double r = 1.0 / std::sqrt(2.0);
  TetradFrame f;
  f.e[0][0][0] = sf4(r * ia);
  f.e[0][0][2] = sf4(r * ib);
  f.e[1][1][0] = sf4(r * ia);
  f.e[1][1][2] = sf4(-1.0 * r * ib);
  f.e[0][1][1] = sf4(r * ia);
  f.e[0][1][3] = sf4(r * ib);
  f.e[1][0][1] = sf4(-1.0 * r * ia);
  f.e[1][0][3] = sf4(r * ib);
  e.frame = f;
  e.metric.orientation = orient_from_frame(e.metric, f);
  e.expected.asd = true;
  e.expected.scalarFlat = true;
  e.expected.kahlerClosed = true;
  e.expected.petrov = PetrovType::O;
  e.set_kahler(0, 1, sf4(a2));
  e.set_kahler(2, 3, sf4(-1.0 * b2));
  return e;
}

ZooEntry build_heavenly1(const ScalarField& omega) {
  // chart (w,z,x,y) = vars (0,1,2,3)
  ZooEntry e;
  e.name = "heavenly1";
  e.params["Omega"] = omega;
  const ScalarField oxw = omega.diff(2).diff(0), oyz = omega.diff(3).diff(1),
                    oyw = omega.diff(3).diff(0), oxz = omega.diff(2).diff(1);
  e.metric.dim = 4;
  e.metric.box = box4(-1, 1);
  e.metric.add_ds2(2, 0, oxw.expr);
  e.metric.add_ds2(3, 1, oyz.expr);
  e.metric.add_ds2(3, 0, oyw.expr);
  e.metric.add_ds2(2, 1, oxz.expr);

  const Expr DQ = oxw.expr * oyz.expr - oxz.expr * oyw.expr;
  TetradFrame f;
  f.e[0][0][0] = sf4(kOne);
  f.e[1][0][1] = sf4(kOne);
  f.e[0][1][2] = sf4(2.0 * oyw.expr / DQ);
  f.e[0][1][3] = sf4(-2.0 * oxw.expr / DQ);
  f.e[1][1][2] = sf4(2.0 * oyz.expr / DQ);
  f.e[1][1][3] = sf4(-2.0 * oxz.expr / DQ);
  e.frame = f;
  e.metric.orientation = orient_from_frame(e.metric, f);

  e.governing.push_back(field_residual("heavenly1-eq", 1e-8, sf4(DQ - 1.0)));
  e.expected.asd = true;
  e.expected.ricciFlat = true;
  return e;
}

ZooEntry build_heavenly2_nullkahler(const ScalarField& theta, bool einsteinBranch) {
  // chart (w,z,x,y) = vars (0,1,2,3)
  ZooEntry e;
  e.name = "heavenly2";
  e.params["Theta"] = theta;
  const ScalarField txx = theta.diff(2).diff(2), tyy = theta.diff(3).diff(3),
                    txy = theta.diff(2).diff(3);
  e.metric.dim = 4;
  e.metric.box = box4(-1, 1);
  e.metric.add_ds2(0, 2, kOne);
  e.metric.add_ds2(1, 3, kOne);
  e.metric.add_ds2(1, 1, -1.0 * txx.expr);
  e.metric.add_ds2(0, 0, -1.0 * tyy.expr);
  e.metric.add_ds2(0, 1, 2.0 * txy.expr);

  const double s = std::sqrt(2.0);
  TetradFrame f;
  f.e[0][0][0] = sf4(Expr::constant(s));
  f.e[0][0][2] = sf4(s * tyy.expr);
  f.e[0][0][3] = sf4(-s * txy.expr);
  f.e[0][1][3] = sf4(Expr::constant(-s));
  f.e[1][0][1] = sf4(Expr::constant(s));
  f.e[1][0][2] = sf4(-s * txy.expr);
  f.e[1][0][3] = sf4(s * txx.expr);
  f.e[1][1][2] = sf4(Expr::constant(s));
  f.volumeDensity = sf4(kOne);

  ScalarField fpot{4, theta.diff(0).diff(2).expr + theta.diff(1).diff(3).expr +
                          txx.expr * tyy.expr - txy.expr * txy.expr};
  e.params["f"] = fpot;
  f.laxPotentials = {fpot.diff(3), fpot.diff(2)};
  e.frame = f;
  e.metric.orientation = orient_from_frame(e.metric, f);

  const MetricField gcopy = e.metric;
  if (einsteinBranch) {
    e.name = "nullkahler-einstein";
    // least-squares fit f = x P + y Q + R with constant coefficients
    e.sampleResiduals.push_back(
        {"einstein-fit", [fpot](std::span<const std::vector<double>> pts) {
           Eigen::MatrixXd A(pts.size(), 3);
           Eigen::VectorXd b(pts.size());
           for (size_t i = 0; i < pts.size(); ++i) {
             A(i, 0) = pts[i][2];
             A(i, 1) = pts[i][3];
             A(i, 2) = 1.0;
             b(i) = field_value(fpot, pts[i]);
           }
           Eigen::Vector3d coef = A.colPivHouseholderQr().solve(b);
           ResidualReport rep;
           rep.name = "einstein-fit";
           rep.tolerance = 1e-8;
           for (size_t i = 0; i < pts.size(); ++i)
             rep.absorb(b(i) - A.row(i).dot(coef));
           return rep;
         }});
  } else {
    e.governing.push_back({"nullkahler-boxf", 1e-8, [gcopy, fpot](std::span<const double> p) {
                             return laplace_beltrami(gcopy, fpot, p);
                           }});
    e.expected.asd = true;
  }
  return e;
}

ZooEntry build_hyperhermitian(const ScalarField& theta0, const ScalarField& theta1) {
  // chart (p^0,p^1,w^0,w^1) = vars (0,1,2,3)
  ZooEntry e;
  e.name = "hyperhermitian";
  e.params["Theta0"] = theta0;
  e.params["Theta1"] = theta1;
  const ScalarField t0p0 = theta0.diff(0), t0p1 = theta0.diff(1);
  const ScalarField t1p0 = theta1.diff(0), t1p1 = theta1.diff(1);
  e.metric.dim = 4;
  e.metric.box = Box{{-0.6, -0.6, -0.6, -0.6}, {0.6, 0.6, 0.6, 0.6}};
  e.metric.add_ds2(0, 3, Expr::constant(2.0));
  e.metric.add_ds2(1, 2, Expr::constant(-2.0));
  e.metric.add_ds2(2, 3, 2.0 * t0p0.expr - 2.0 * t1p1.expr);
  e.metric.add_ds2(3, 3, 2.0 * t0p1.expr);
  e.metric.add_ds2(2, 2, -2.0 * t1p0.expr);

  TetradFrame f;
  f.e[0][0][0] = sf4(kOne);
  f.e[1][0][1] = sf4(kOne);
  f.e[0][1][0] = sf4(-1.0 * t0p0.expr);
  f.e[0][1][1] = sf4(-1.0 * t1p0.expr);
  f.e[0][1][2] = sf4(kOne);
  f.e[1][1][0] = sf4(-1.0 * t0p1.expr);
  f.e[1][1][1] = sf4(-1.0 * t1p1.expr);
  f.e[1][1][3] = sf4(kOne);
  e.frame = f;
  e.metric.orientation = orient_from_frame(e.metric, f);

  for (int C = 0; C < 2; ++C) {
    const ScalarField& tc = (C == 0) ? theta0 : theta1;
    Expr r = tc.diff(0).diff(3).expr - tc.diff(1).diff(2).expr;
    r = r + t0p0.expr * tc.diff(0).diff(1).expr + t1p0.expr * tc.diff(1).diff(1).expr;
    r = r - t0p1.expr * tc.diff(0).diff(0).expr - t1p1.expr * tc.diff(1).diff(0).expr;
    e.governing.push_back(
        field_residual("hyperhermitian-eq" + std::to_string(C), 1e-8, sf4(r)));
  }
  e.expected.asd = true;
  return e;
}

ZooEntry build_sfk(const ScalarField& omega, const ScalarField& fpot) {
  // chart (w^0,w^1,wt^0,wt^1) = vars (0,1,2,3)
  ZooEntry e;
  e.name = "sfk";
  e.params["Omega"] = omega;
  e.params["f"] = fpot;
  ScalarField M[2][2];
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) M[A][B] = omega.diff(A).diff(2 + B);
  const Expr G = M[0][0].expr * M[1][1].expr - M[0][1].expr * M[1][0].expr;

  e.metric.dim = 4;
  e.metric.box = Box{{-0.7, -0.7, -0.7, -0.7}, {0.7, 0.7, 0.7, 0.7}};
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) e.metric.add_ds2(A, 2 + B, M[A][B].expr);

  const auto cen = box_center(e.metric.box);
  const bool gpos = G.value(cen) > 0;
  const Expr scale = expr_sqrt(Expr::constant(gpos ? 2.0 : -2.0) / G);
  TetradFrame f;
  for (int A = 0; A < 2; ++A) {
    const int apBase = gpos ? 0 : 1, apTilde = gpos ? 1 : 0;
    f.e[A][apBase][A] = sf4(scale);
    f.e[A][apTilde][2] = sf4(scale * M[A][1].expr);
    f.e[A][apTilde][3] = sf4(-1.0 * scale * M[A][0].expr);
  }
  f.laxPotentials = {fpot.diff(0), fpot.diff(1)};
  e.frame = f;
  e.metric.orientation = orient_from_frame(e.metric, f);

  // (f_{w^A} - M_{AB} dlnG/dwt_B) with (dlnG/dwt_0, dlnG/dwt_1) = (-G_3, G_2)/G
  const Expr G2 = G.diff(2), G3 = G.diff(3);
  for (int A = 0; A < 2; ++A) {
    Expr r = fpot.diff(A).expr -
             (M[A][0].expr * (Expr::constant(-1.0) * G3 / G) + M[A][1].expr * (G2 / G));
    e.governing.push_back(field_residual("sfk-grad" + std::to_string(A), 1e-8, sf4(r)));
  }
  const MetricField gcopy = e.metric;
  e.governing.push_back({"sfk-boxf", 1e-8, [gcopy, fpot](std::span<const double> p) {
                           return laplace_beltrami(gcopy, fpot, p);
                         }});
  e.expected.asd = true;
  e.expected.scalarFlat = true;
  e.expected.kahlerClosed = true;
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) e.set_kahler(A, 2 + B, sf4(-0.5 * M[A][B].expr));
  return e;
}

std::array<double, 2> sfk_fgrad_oracle(const ScalarField& omega, std::span<const double> p) {
  Jet2 M[2][2];
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) M[A][B] = jet_eval(omega.diff(A).diff(2 + B), p);
  auto dG = [&](int c) {
    return M[0][0].g[c] * M[1][1].v + M[0][0].v * M[1][1].g[c] -
           M[0][1].g[c] * M[1][0].v - M[0][1].v * M[1][0].g[c];
  };
  // f_{w^0} M_{1C} - f_{w^1} M_{0C} = -dG/dwt^C, C = 0,1
  Eigen::Matrix2d A;
  Eigen::Vector2d b;
  for (int C = 0; C < 2; ++C) {
    A(C, 0) = M[1][C].v;
    A(C, 1) = -M[0][C].v;
    b(C) = -dG(2 + C);
  }
  Eigen::Vector2d x = A.colPivHouseholderQr().solve(b);
  return {x(0), x(1)};
}

ZooEntry build_ppwave(const ScalarField& Q) {
  // chart (x,y,z,phi) = vars (0,1,2,3)
  ZooEntry e;
  e.name = "ppwave";
  e.params["Q"] = Q;
  e.metric.dim = 4;
  e.metric.box = box4(-1, 1);
  e.metric.add_ds2(3, 1, kOne);
  e.metric.add_ds2(2, 0, Expr::constant(-1.0));
  e.metric.add_ds2(1, 1, -1.0 * Q.expr);

  TetradFrame f;
  f.e[0][0][1] = sf4(kOne);
  f.e[0][0][3] = sf4(Q.expr);
  f.e[1][0][2] = sf4(Expr::constant(2.0));
  f.e[0][1][0] = sf4(kOne);
  f.e[1][1][3] = sf4(Expr::constant(2.0));
  e.frame = f;
  e.metric.orientation = orient_from_frame(e.metric, f);

  e.expected.asd = true;
  e.expected.ricciFlat = true;
  KillingData k;
  k.comp[3] = sf4(kOne);
  k.isNull = true;
  e.killing = k;
  return e;
}

ZooEntry build_null_kv_nontwisting(const ScalarField& A1, const ScalarField& A2,
                                   const ScalarField& A3, const ScalarField& beta,
                                   const ScalarField& Q, const ScalarField& P) {
  // chart (x,y,z,phi) = vars (0,1,2,3); potentials are functions of (x,y)
  ZooEntry e;
  e.name = "nullkv-nontwisting";
  e.params = {{"A1", A1}, {"A2", A2}, {"A3", A3}, {"beta", beta}, {"Q", Q}, {"P", P}};
  const Expr z = Expr::var(2);
  const Expr a = z * A3.expr - Q.expr;
  const Expr M = z * (Expr::constant(-1.0) * beta.diff(1).expr + A1.expr +
                      beta.expr * A2.expr + beta.expr * beta.expr * A3.expr);
  const Expr N = z * (A2.expr + 2.0 * beta.expr * A3.expr) + P.expr;
  e.metric.dim = 4;
  e.metric.box = box4(-1, 1);
  e.metric.add_ds2(3, 1, kOne);
  e.metric.add_ds2(3, 0, -1.0 * beta.expr);
  e.metric.add_ds2(1, 1, a);
  e.metric.add_ds2(0, 1, N - a * beta.expr);
  e.metric.add_ds2(2, 0, Expr::constant(-1.0));
  e.metric.add_ds2(0, 0, M);
  e.metric.orientation = 1.0;  // chart orientation in which the family is ASD

  e.params["A0"] = ScalarField(
      2, beta.diff(0).expr + beta.expr * beta.diff(1).expr - beta.expr * A1.expr -
             beta.expr * beta.expr * A2.expr -
             beta.expr * beta.expr * beta.expr * A3.expr);

  KillingData k;
  k.comp[3] = sf4(kOne);
  k.isNull = true;
  e.killing = k;
  const MetricField gcopy = e.metric;
  const KillingData kcopy = k;
  e.governing.push_back({"twist-zero", 1e-9, [gcopy, kcopy](std::span<const double> p) {
                           return twist_magnitude(gcopy, kcopy, p);
                         }});
  e.expected.asd = true;
  return e;
}

ZooEntry build_null_kv_twisting(const ScalarField& A0, const ScalarField& A1,
                                const ScalarField& A2, const ScalarField& A3,
                                const ScalarField& G) {
  // chart (x,y,z,phi) = vars (0,1,2,3); G is a function of (x,y,z)
  ZooEntry e;
  e.name = "nullkv-twisting";
  e.params = {{"A0", A0}, {"A1", A1}, {"A2", A2}, {"A3", A3}, {"G", G}};
  const Expr z = Expr::var(2);
  const ScalarField Gz = G.diff(2), Gzz = G.diff(2).diff(2), Gzy = G.diff(2).diff(1);
  const Expr alpha = A3.expr * Gz.expr;
  const Expr betac =
      A2.expr * Gz.expr + 2.0 * A3.expr * (z * Gz.expr - G.expr) - Gzy.expr;
  const Expr F = A0.expr + z * A1.expr + z * z * A2.expr + z * z * z * A3.expr;
  e.metric.dim = 4;
  e.metric.box = box4(-0.8, 0.8);
  e.metric.add_ds2(3, 1, kOne);
  e.metric.add_ds2(3, 0, -1.0 * z);
  e.metric.add_ds2(1, 1, alpha);
  e.metric.add_ds2(0, 1, betac - z * alpha);
  e.metric.add_ds2(0, 0, -1.0 * z * betac + Gzz.expr * F);
  e.metric.add_ds2(0, 2, -1.0 * Gzz.expr);
  e.metric.orientation = 1.0;

  e.governing.push_back(field_residual(
      "g-equation", 1e-8,
      sf4(Gzz.diff(0).expr + z * Gzz.diff(1).expr + F * Gzz.diff(2).expr)));
  KillingData k;
  k.comp[3] = sf4(kOne);
  k.isNull = true;
  e.killing = k;
  e.expected.asd = true;
  return e;
}

ZooEntry build_tod_sfk(const ScalarField& W, const ScalarField& etaX,
                       const ScalarField& etaY) {
  // chart (x,y,t,phi) = vars (0,1,2,3); W, eta are functions of (x,y,t)
  ZooEntry e;
  e.name = "tod-sfk";
  e.params = {{"W", W}, {"etaX", etaX}, {"etaY", etaY}};
  const Expr x = Expr::var(0), y = Expr::var(1), t = Expr::var(2);
  const Expr rho = 4.0 / expr_pow(1.0 + x * x + y * y, 2);
  const Expr onemt2 = 1.0 - t * t;
  const Expr kap = onemt2 / W.expr;
  e.metric.dim = 4;
  e.metric.box = Box{{-1, -1, -0.8, -1}, {1, 1, -0.2, 1}};
  e.metric.add_ds2(0, 0, W.expr * rho - kap * etaX.expr * etaX.expr);
  e.metric.add_ds2(1, 1, W.expr * rho - kap * etaY.expr * etaY.expr);
  e.metric.add_ds2(0, 1, -2.0 * kap * etaX.expr * etaY.expr);
  e.metric.add_ds2(2, 2, -1.0 * W.expr / onemt2);
  e.metric.add_ds2(3, 3, -1.0 * kap);
  e.metric.add_ds2(3, 0, -2.0 * kap * etaX.expr);
  e.metric.add_ds2(3, 1, -2.0 * kap * etaY.expr);
  e.metric.orientation = -1.0;

  // ultrahyperbolic wave equation for q = dW/dt (axisymmetric second factor)
  const ScalarField q = W.diff(2);
  const Expr lap1 = expr_pow(1.0 + x * x + y * y, 2) / 4.0 *
                    (q.diff(0).diff(0).expr + q.diff(1).diff(1).expr);
  const Expr lap2 = -2.0 * t * q.diff(2).expr + onemt2 * q.diff(2).diff(2).expr;
  e.governing.push_back(field_residual("uhwave", 1e-8, sf4(lap1 - lap2)));

  e.expected.asd = true;
  e.expected.scalarFlat = true;
  e.expected.kahlerClosed = true;
  e.set_kahler(0, 1, sf4(W.expr * rho));
  e.set_kahler(3, 2, sf4(kOne));
  e.set_kahler(0, 2, sf4(etaX.expr));
  e.set_kahler(1, 2, sf4(etaY.expr));
  KillingData k;
  k.comp[3] = sf4(kOne);
  e.killing = k;
  return e;
}

ZooEntry build_ooguri_vafa(double A, double B) {
  // chart (z1,z2,p1,p2): zeta = z1 + i z2 (upper half plane), p = p1 + i p2
  ZooEntry e;
  e.name = "ooguri-vafa";
  const Expr z2 = Expr::var(1), p1 = Expr::var(2), p2 = Expr::var(3);
  const Expr X = 4.0 / B * z2 * z2 * (p1 * p1 + p2 * p2);
  const Expr S = expr_sqrt(A * A + B * X);
  const Expr Om = 2.0 * S + A * expr_log((S - A) / (S + A));
  ScalarField omega{4, Om};
  e.params["OmegaX"] = omega;

  ScalarField d2[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d2[i][j] = omega.diff(i).diff(j);
  // a_ij = (O_{u_i u_j} + O_{v_i v_j})/4, b_ij = (O_{u_i v_j} - O_{v_i u_j})/4
  // with (u_1,v_1,u_2,v_2) = vars (0,1,2,3)
  Expr av[2][2], bv[2][2];
  const int U[2] = {0, 2}, V[2] = {1, 3};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      av[i][j] = (d2[U[i]][U[j]].expr + d2[V[i]][V[j]].expr) / 4.0;
      bv[i][j] = (d2[U[i]][V[j]].expr - d2[V[i]][U[j]].expr) / 4.0;
    }
  Expr c[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) c[i][j] = Expr::constant(0.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      c[U[i]][U[j]] = c[U[i]][U[j]] + 2.0 * av[i][j];
      c[V[i]][V[j]] = c[V[i]][V[j]] + 2.0 * av[i][j];
      c[V[i]][U[j]] = c[V[i]][U[j]] - 2.0 * bv[i][j];
      c[U[i]][V[j]] = c[U[i]][V[j]] + 2.0 * bv[i][j];
    }
  e.metric.dim = 4;
  e.metric.box = Box{{-1, 0.6, 0.4, 0.4}, {1, 1.4, 1.0, 1.0}};
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) e.metric.set(i, j, sf4((c[i][j] + c[j][i]) / 2.0));
  e.metric.orientation = -1.0;

  const Expr detRe = av[0][0] * av[1][1] - bv[0][0] * bv[1][1] -
                     av[0][1] * av[1][0] + bv[0][1] * bv[1][0] + 1.0;
  const Expr detIm = av[0][0] * bv[1][1] + bv[0][0] * av[1][1] -
                     av[0][1] * bv[1][0] - bv[0][1] * av[1][0];
  e.governing.push_back(field_residual("det-re", 1e-8, sf4(detRe)));
  e.governing.push_back(field_residual("det-im", 1e-8, sf4(detIm)));
  e.expected.asd = true;
  e.expected.ricciFlat = true;
  return e;
}

ZooEntry build_twistor_example(const ScalarField& A, const ScalarField& B) {
  // chart (X,Y,W,Z) = vars (0,1,2,3); A,B functions of (X,Y)
  ZooEntry e;
  e.name = "twistor-example";
  e.params = {{"A", A}, {"B", B}};
  const Expr Wv = Expr::var(2), Zv = Expr::var(3);
  e.metric.dim = 4;
  e.metric.box = Box{{-1, -1, 0.5, 0.5}, {1, 1, 1.5, 1.5}};
  e.metric.add_ds2(0, 2, kOne);
  e.metric.add_ds2(1, 3, kOne);
  e.metric.add_ds2(0, 0, -1.0 * Wv * A.expr);
  e.metric.add_ds2(1, 1, -1.0 * Zv * B.expr);
  e.metric.add_ds2(0, 1, -1.0 * (Wv * B.expr + Zv * A.expr));
  e.metric.orientation = -1.0;

  KillingData k;
  k.comp[2] = sf4(Wv);
  k.comp[3] = sf4(Zv);
  k.isNull = true;
  e.killing = k;
  e.expected.asd = true;
  return e;
}

ZooEntry build_toda_lift() {
  // chart (x,y,t,phi); Tod's solution of the SU(infinity)-Toda equation
  ZooEntry e;
  e.name = "toda-lift";
  const Expr x = Expr::var(0), y = Expr::var(1), t = Expr::var(2);
  const Expr r2 = 1.0 + x * x + y * y;
  const Expr eu = 4.0 * (1.0 - t * t) / (r2 * r2);
  const Expr V = -2.0 * t / (1.0 - t * t);
  const Expr ex = -4.0 * y / r2;  // eta_x = u_y
  const Expr ey = 4.0 * x / r2;   // eta_y = -u_x
  e.metric.dim = 4;
  e.metric.box = Box{{-1, -1, -0.8, -1}, {1, 1, -0.2, 1}};
  e.metric.add_ds2(0, 0, V * eu - ex * ex / V);
  e.metric.add_ds2(1, 1, V * eu - ey * ey / V);
  e.metric.add_ds2(0, 1, -2.0 * ex * ey / V);
  e.metric.add_ds2(2, 2, -1.0 * V);
  e.metric.add_ds2(3, 3, -1.0 / V);
  e.metric.add_ds2(3, 0, -2.0 * ex / V);
  e.metric.add_ds2(3, 1, -2.0 * ey / V);
  e.metric.orientation = -1.0;

  const Expr u = expr_log(eu);
  ScalarField uf{3, u};
  e.params["u"] = uf;
  e.params["V"] = ScalarField{3, V};
  e.params["etaX"] = ScalarField{3, ex};
  e.params["etaY"] = ScalarField{3, ey};
  ScalarField euf{3, eu};
  e.governing.push_back(field_residual(
      "toda-eq", 1e-8,
      {4, euf.diff(2).diff(2).expr - uf.diff(0).diff(0).expr - uf.diff(1).diff(1).expr}));
  KillingData k;
  k.comp[3] = sf4(kOne);
  e.killing = k;
  e.expected.asd = true;
  e.expected.ricciFlat = true;
  return e;
}

ZooEntry build_dkp_lift(const ScalarField& H, const ScalarField& W) {
  // chart (x,y,t,phi); H,W functions of (x,y,t)
  ZooEntry e;
  e.name = "dkp-lift";
  e.params = {{"H", H}, {"W", W}};
  const Expr Wx = W.diff(0).expr, Wy = W.diff(1).expr, Hx = H.diff(0).expr;
  e.metric.dim = 4;
  e.metric.box = Box{{-0.5, -0.5, -1.6, -1}, {0.5, 0.5, -0.4, 1}};
  e.metric.add_ds2(0, 2, -4.0 * Wx);
  e.metric.add_ds2(2, 2, -4.0 * Wx * Hx - 4.0 * Wy * Wy / Wx);
  e.metric.add_ds2(3, 3, -1.0 / Wx);
  e.metric.add_ds2(3, 1, Expr::constant(2.0));
  e.metric.add_ds2(3, 2, 4.0 * Wy / Wx);
  e.metric.add_ds2(1, 2, -4.0 * Wy);
  e.metric.orientation = 1.0;

  e.governing.push_back(field_residual(
      "h-equation", 1e-8,
      {4, H.diff(1).diff(1).expr - H.diff(0).diff(2).expr +
              H.diff(0).expr * H.diff(0).diff(0).expr}));
  e.governing.push_back(field_residual(
      "lin-dkp", 1e-8,
      {4, W.diff(1).diff(1).expr - W.diff(0).diff(2).expr +
              H.diff(0).diff(0).expr * Wx + Hx * W.diff(0).diff(0).expr}));
  KillingData k;
  k.comp[3] = sf4(kOne);
  e.killing = k;
  e.expected.asd = true;
  e.expected.ricciFlat = true;
  return e;
}

// --- registry ---------------------------------------------------------------

namespace {

std::vector<EntrySpec> make_registry() {
  std::vector<EntrySpec> specs;
  const std::vector<std::string> wzxy = {"w", "z", "x", "y"};
  const std::vector<std::string> xy = {"x", "y"};
  const std::vector<std::string> xyz = {"x", "y", "z"};
  const std::vector<std::string> xyt = {"x", "y", "t"};
  const std::vector<std::string> pw = {"p0", "p1", "w0", "w1"};
  const std::vector<std::string> wwt = {"w0", "w1", "wt0", "wt1"};
  const std::vector<std::string> none = {};

  specs.push_back({"flat", {}, {}, [](const auto&) { return build_flat(); }, true});
  specs.push_back({"g0", {}, {}, [](const auto&) { return build_g0(); }, true});
  specs.push_back({"heavenly1",
                   {{"Omega", wzxy}},
                   {{"Omega", "w*x + z*y + 0.4*sin(x+y)*sin(w-z)"}},
                   [](const auto& ps) { return build_heavenly1(ps.at("Omega")); },
                   false});
  specs.push_back({"heavenly1-flat",
                   {{"Omega", wzxy}},
                   {{"Omega", "w*x + z*y"}},
                   [](const auto& ps) { return build_heavenly1(ps.at("Omega")); },
                   false});
  specs.push_back({"heavenly1-flat2",
                   {{"Omega", wzxy}},
                   {{"Omega", "w*x + z*y + w*y"}},
                   [](const auto& ps) { return build_heavenly1(ps.at("Omega")); },
                   false});
  specs.push_back(
      {"heavenly2",
       {{"Theta", wzxy}},
       {{"Theta", "x^4*z/12"}},
       [](const auto& ps) {
         ZooEntry e = build_heavenly2_nullkahler(ps.at("Theta"));
         e.governing.push_back(field_residual("secondh-f", 1e-8, e.params.at("f")));
         e.expected.ricciFlat = true;
         return e;
       },
       false});
  specs.push_back({"heavenly2-b",
                   {{"Theta", wzxy}},
                   {{"Theta", "y^4*w/12"}},
                   [](const auto& ps) {
                     ZooEntry e = build_heavenly2_nullkahler(ps.at("Theta"));
                     e.governing.push_back(field_residual("secondh-f", 1e-8, e.params.at("f")));
                     e.expected.ricciFlat = true;
                     return e;
                   },
                   false});
  specs.push_back({"nullkahler-asd",
                   {{"Theta", wzxy}},
                   {{"Theta", "w*x*y^2"}},
                   [](const auto& ps) { return build_heavenly2_nullkahler(ps.at("Theta")); },
                   false});
  specs.push_back(
      {"nullkahler-einstein",
       {{"Theta", wzxy}},
       {{"Theta", "w*x^2/2"}},
       [](const auto& ps) { return build_heavenly2_nullkahler(ps.at("Theta"), true); },
       false});
  specs.push_back({"hyperhermitian",
                   {{"Theta0", pw}, {"Theta1", pw}},
                   {{"Theta0", "w1^2*p1^3"}, {"Theta1", "0"}},
                   [](const auto& ps) {
                     return build_hyperhermitian(ps.at("Theta0"), ps.at("Theta1"));
                   },
                   false});
  specs.push_back({"sfk-flat",
                   {{"Omega", wwt}, {"f", wwt}},
                   {{"Omega", "w1*wt0 - w0*wt1"}, {"f", "0"}},
                   [](const auto& ps) { return build_sfk(ps.at("Omega"), ps.at("f")); },
                   false});
  specs.push_back({"sfk-product",
                   {{"Omega", wwt}, {"f", wwt}},
                   {{"Omega", "2*log(1 + 0.5*w0*wt0) - 2*log(1 + 0.5*w1*wt1)"},
                    {"f", "w0*w1/((1 + 0.5*w0*wt0)*(1 + 0.5*w1*wt1))"}},
                   [](const auto& ps) { return build_sfk(ps.at("Omega"), ps.at("f")); },
                   false});
  specs.push_back({"ppwave",
                   {{"Q", xy}},
                   {{"Q", "x^2 + y^2"}},
                   [](const auto& ps) {
                     ZooEntry e = build_ppwave(ps.at("Q"));
                     e.expected.petrov = PetrovType::N;
                     return e;
                   },
                   true});
  specs.push_back(
      {"nullkv-nontwisting",
       {{"A1", xy}, {"A2", xy}, {"A3", xy}, {"beta", xy}, {"Q", xy}, {"P", xy}},
       {{"A1", "0.1*y"},
        {"A2", "0.1*x"},
        {"A3", "0.05*(x+y)"},
        {"beta", "0"},
        {"Q", "0.2*x*y"},
        {"P", "0"}},
       [](const auto& ps) {
         return build_null_kv_nontwisting(ps.at("A1"), ps.at("A2"), ps.at("A3"),
                                          ps.at("beta"), ps.at("Q"), ps.at("P"));
       },
       true});
  specs.push_back({"nullkv-twisting",
                   {{"A0", xy}, {"A1", xy}, {"A2", xy}, {"A3", xy}, {"G", xyz}},
                   {{"A0", "0"}, {"A1", "0"}, {"A2", "0"}, {"A3", "0"},
                    {"G", "(2 + y)*z^2/2 - x*z^3/6"}},
                   [](const auto& ps) {
                     return build_null_kv_twisting(ps.at("A0"), ps.at("A1"), ps.at("A2"),
                                                   ps.at("A3"), ps.at("G"));
                   },
                   false});
  specs.push_back({"tod-sfk",
                   {{"W", xyt}, {"etaX", xyt}, {"etaY", xyt}},
                   {{"W", "1 + 0.3*t"},
                    {"etaX", "0.6*y/(1 + x^2 + y^2)"},
                    {"etaY", "-0.6*x/(1 + x^2 + y^2)"}},
                   [](const auto& ps) {
                     return build_tod_sfk(ps.at("W"), ps.at("etaX"), ps.at("etaY"));
                   },
                   false});
  specs.push_back({"ooguri-vafa",
                   {{"A", none}, {"B", none}},
                   {{"A", "1"}, {"B", "1"}},
                   [](const auto& ps) {
                     const std::vector<double> empty;
                     const double A = ps.at("A").expr.value(empty);
                     const double B = ps.at("B").expr.value(empty);
                     return build_ooguri_vafa(A, B);
                   },
                   true});
  specs.push_back(
      {"twistor-example",
       {{"A", xy}, {"B", xy}},
       {{"A", "0.3 + 0.2*y"}, {"B", "0.1*x"}},
       [](const auto& ps) { return build_twistor_example(ps.at("A"), ps.at("B")); },
       true});
  specs.push_back({"toda-lift", {}, {}, [](const auto&) { return build_toda_lift(); }, true});
  specs.push_back({"dkp-lift",
                   {{"H", xyt}, {"W", xyt}},
                   {{"H", "-x^2/(2*t)"}, {"W", "-x/t"}},
                   [](const auto& ps) { return build_dkp_lift(ps.at("H"), ps.at("W")); },
                   false});
  return specs;
}

}  // namespace

const std::vector<EntrySpec>& zoo_registry() {
  static const std::vector<EntrySpec> reg = make_registry();
  return reg;
}

const EntrySpec* find_entry_spec(const std::string& name) {
  for (const auto& s : zoo_registry())
    if (s.name == name) return &s;
  return nullptr;
}

ZooEntry make_entry(const EntrySpec& spec,
                    const std::map<std::string, std::string>& overrides) {
  std::map<std::string, ScalarField> params;
  for (const auto& [pname, vars] : spec.params) {
    auto it = overrides.find(pname);
    const std::string text = it != overrides.end() ? it->second : spec.defaults.at(pname);
    params[pname] = parse_field(text, vars);
  }
  return spec.make(params);
}

ZooEntry make_default_entry(const EntrySpec& spec) { return make_entry(spec, {}); }

ZooEntry corrupted_entry(const EntrySpec& spec, const std::string& param, double eps) {
  if (spec.corruptViaMetric || param.empty()) {
    ZooEntry e = make_default_entry(spec);
    // quadratic third-coordinate factor so the bump leaves the normal-form
    // families, which absorb anything linear in the fibre coordinate
    const Expr bump = eps * expr_sin(Expr::var(0) + 2.0 * Expr::var(1)) *
                      (0.5 + Expr::var(2) * Expr::var(2));
    e.metric.add_ds2(0, 1, bump);
    e.name += "+bump";
    return e;
  }
  std::map<std::string, std::string> over;
  const auto it = std::find_if(spec.params.begin(), spec.params.end(),
                               [&](const auto& pr) { return pr.first == param; });
  if (it == spec.params.end()) throw EvalError("unknown parameter: " + param);
  const auto& vars = it->second;
  std::string bump;
  char buf[96];
  if (vars.empty()) {
    std::snprintf(buf, sizeof(buf), " + %.6g", eps);
    bump = buf;
  } else if (vars.size() == 1) {
    std::snprintf(buf, sizeof(buf), " + %.6g*sin(3*%s)", eps, vars[0].c_str());
    bump = buf;
  } else if (vars.size() < 4) {
    const std::string& other = vars.size() >= 3 ? vars[2] : vars[1];
    std::snprintf(buf, sizeof(buf), " + %.6g*sin(%s + 2*%s)", eps, vars[0].c_str(),
                  other.c_str());
    bump = buf;
  } else {
    // pair coordinates across both conjugate blocks of the chart so the bump
    // feeds every mixed derivative the governing residuals depend on
    std::snprintf(buf, sizeof(buf), " + %.6g*(sin(%s + 2*%s) + sin(%s + 3*%s))", eps,
                  vars[0].c_str(), vars[2].c_str(), vars[0].c_str(), vars[3].c_str());
    bump = buf;
  }
  over[param] = spec.defaults.at(param) + bump;
  ZooEntry e = make_entry(spec, over);
  e.name += "+bump:" + param;
  return e;
}

// --- verification -----------------------------------------------------------

std::vector<ResidualReport> verify_entry(const ZooEntry& e, const VerifyOptions& opt) {
  auto samples = sample_box(e.metric.box, opt.samples, opt.seed, e.metric.excluded);
  std::vector<ResidualReport> reports;

  for (const auto& gov : e.governing) {
    ResidualReport rep;
    rep.name = e.name + "/" + gov.name;
    rep.tolerance = gov.tolerance;
    for (const auto& p : samples) rep.absorb(gov.eval(p));
    reports.push_back(rep);
  }
  for (const auto& sr : e.sampleResiduals) {
    ResidualReport rep = sr.run(samples);
    rep.name = e.name + "/" + rep.name;
    reports.push_back(rep);
  }
  if (e.expected.asd) {
    reports.push_back(asd_residual(e.metric, samples, opt.tolAsd, e.name + "/asd"));
  }
  if (e.expected.ricciFlat) {
    RicciVerdict rv = ricci_flatness(e.metric, samples);
    ResidualReport tf;
    tf.name = e.name + "/ricci-tracefree";
    tf.tolerance = opt.tolRicci;
    tf.samplePoints = static_cast<int>(samples.size());
    tf.maxAbs = rv.maxTracefree;
    reports.push_back(tf);
    ResidualReport sc;
    sc.name = e.name + "/ricci-scalar";
    sc.tolerance = opt.tolRicci;
    sc.samplePoints = static_cast<int>(samples.size());
    sc.maxAbs = rv.maxScalar;
    reports.push_back(sc);
  }
  if (e.expected.scalarFlat && !e.expected.ricciFlat) {
    ResidualReport sc;
    sc.name = e.name + "/scalar-flat";
    sc.tolerance = opt.tolScalar;
    sc.samplePoints = static_cast<int>(samples.size());
    sc.maxAbs = scalar_flatness(e.metric, samples);
    reports.push_back(sc);
  }
  if (e.expected.kahlerClosed && e.hasKahlerForm) {
    ResidualReport rep;
    rep.name = e.name + "/kahler-closed";
    rep.tolerance = opt.tolKahler;
    for (const auto& p : samples) {
      Jet2 om[4][4];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          om[a][b] = e.kahlerForm[a][b].is_zero() ? Jet2::constant(4, 0.0)
                                                  : jet_eval(e.kahlerForm[a][b], p);
      double worst = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          for (int c = b + 1; c < 4; ++c) {
            const double d = om[b][c].g[a] - om[a][c].g[b] + om[a][b].g[c];
            worst = std::max(worst, std::abs(d));
          }
      rep.absorb(worst);
    }
    reports.push_back(rep);
  }
  if (e.expected.petrov && e.frame) {
    ResidualReport rep;
    rep.name = e.name + "/petrov-" + petrov_name(*e.expected.petrov);
    rep.tolerance = 0.0;
    const int npts = std::min<int>(5, static_cast<int>(samples.size()));
    for (int i = 0; i < npts; ++i) {
      WeylQuartic q = petrov_classify(e.metric, *e.frame, samples[i]);
      rep.absorb(q.petrovType == *e.expected.petrov ? 0.0 : 1.0);
    }
    reports.push_back(rep);
  }
  if (e.killing) {
    ResidualReport rep;
    rep.name = e.name + "/killing-conformal";
    rep.tolerance = opt.tolKilling;
    for (const auto& p : samples)
      rep.absorb(conformal_killing_residual(e.metric, *e.killing, p));
    reports.push_back(rep);
    if (e.killing->isNull) {
      ResidualReport nrep;
      nrep.name = e.name + "/killing-null";
      nrep.tolerance = 1e-10;
      for (const auto& p : samples) {
        MetricPoint mp = eval_metric_point(e.metric, p);
        double K[4] = {};
        for (int a = 0; a < 4; ++a)
          if (!e.killing->comp[a].is_zero()) K[a] = field_value(e.killing->comp[a], p);
        double kk = 0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) kk += mp.G[a][b] * K[a] * K[b];
        nrep.absorb(kk);
      }
      reports.push_back(nrep);
    }
  }
  return reports;
}

bool all_pass(std::span<const ResidualReport> reports) {
  for (const auto& r : reports)
    if (!r.pass()) return false;
  return true;
}

}  // namespace nsasd
