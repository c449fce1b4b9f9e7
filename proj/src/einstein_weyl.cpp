#include "nsasd/einstein_weyl.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <ostream>

namespace nsasd {

namespace {

ScalarField sf3(const Expr& e) { return {3, e}; }

// sign of the permutation (a,b,c) of (0,1,2)
int perm3(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

}  // namespace

EWStructure ew_flat() {
  EWStructure ew;
  ew.h.dim = 3;
  ew.h.sigPlus = 2;
  ew.h.sigMinus = 1;
  ew.h.box = Box{{-1, -1, -1}, {1, 1, 1}};
  ew.h.set(0, 0, sf3(Expr::constant(1.0)));
  ew.h.set(1, 1, sf3(Expr::constant(1.0)));
  ew.h.set(2, 2, sf3(Expr::constant(-1.0)));
  return ew;
}

EWStructure ew_toda_tod() {
  EWStructure ew;
  const Expr x = Expr::var(0), y = Expr::var(1), t = Expr::var(2);
  const Expr eu = 4.0 * (1.0 - t * t) / expr_pow(1.0 + x * x + y * y, 2);
  ew.h.dim = 3;
  ew.h.sigPlus = 2;
  ew.h.sigMinus = 1;
  ew.h.box = Box{{-1, -1, -0.8}, {1, 1, -0.2}};
  ew.h.set(0, 0, sf3(eu));
  ew.h.set(1, 1, sf3(eu));
  ew.h.set(2, 2, sf3(Expr::constant(-1.0)));
  // omega = 2 u_t dt, u_t = -2t/(1-t^2)
  ew.omega[2] = sf3(-4.0 * t / (1.0 - t * t));
  return ew;
}

EWStructure ew_dkp() {
  EWStructure ew;
  const Expr x = Expr::var(0), t = Expr::var(2);
  const Expr u = -1.0 * x / t;
  ew.h.dim = 3;
  ew.h.sigPlus = 2;
  ew.h.sigMinus = 1;
  ew.h.box = Box{{-0.5, -0.5, -1.6}, {0.5, 0.5, -0.4}};
  // h = dy^2 - 4 dx dt - 4 u dt^2
  ew.h.add_ds2(1, 1, Expr::constant(1.0));
  ew.h.add_ds2(0, 2, Expr::constant(-4.0));
  ew.h.add_ds2(2, 2, -4.0 * u);
  ew.omega[2] = sf3(4.0 / t);  // -4 u_x dt with u_x = -1/t
  return ew;
}

EWStructure ew_hypercr() {
  EWStructure ew;
  const Expr x = Expr::var(0), y = Expr::var(1);
  const Expr u = x, w = expr_exp(y);
  ew.h.dim = 3;
  ew.h.sigPlus = 2;
  ew.h.sigMinus = 1;
  ew.h.box = Box{{-0.6, -0.6, -1}, {0.6, 0.6, 1}};
  // h = (dy + u dt)^2 - 4 (dx + w dt) dt
  ew.h.add_ds2(1, 1, Expr::constant(1.0));
  ew.h.add_ds2(1, 2, 2.0 * u);
  ew.h.add_ds2(2, 2, u * u - 4.0 * w);
  ew.h.add_ds2(0, 2, Expr::constant(-4.0));
  // omega = u_x dy + (u u_x + 2 u_y) dt
  ew.omega[1] = sf3(Expr::constant(1.0));
  ew.omega[2] = sf3(u);
  return ew;
}

const std::vector<std::pair<std::string, std::function<EWStructure()>>>& ew_registry() {
  static const std::vector<std::pair<std::string, std::function<EWStructure()>>> reg = {
      {"flat3", ew_flat},
      {"toda", ew_toda_tod},
      {"dkp", ew_dkp},
      {"hypercr", ew_hypercr},
  };
  return reg;
}

EWStructure gauge_transform(const EWStructure& ew, const Expr& phi) {
  EWStructure out = ew;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b)
      if (!ew.h.comp[a][b].is_zero())
        out.h.set(a, b, sf3(phi * phi * ew.h.comp[a][b].expr));
  for (int a = 0; a < 3; ++a) {
    Expr dlog = Expr(phi).diff(a) / phi;
    Expr base = ew.omega[a].is_zero() ? Expr::constant(0.0) : ew.omega[a].expr;
    out.omega[a] = sf3(base + 2.0 * dlog);
  }
  return out;
}

ChristoffelJets weyl_connection_jets(const EWStructure& ew, std::span<const double> p) {
  MetricJets mj = eval_metric_jets(ew.h, p);
  MetricPoint mp = mj.pt();
  ChristoffelJets cj = christoffel_jets(mj);
  const int n = 3;

  Jet2 om[3];
  for (int a = 0; a < n; ++a)
    om[a] = ew.omega[a].is_zero() ? Jet2::constant(n, 0.0) : jet_eval(ew.omega[a], p);

  // omega# = h^{ab} omega_b with first derivatives
  double dGinv[3][3][3];
  {
    double dG[3][3][3];
    for (int e = 0; e < n; ++e)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) dG[e][a][b] = mj.comp[a][b].g[e];
    for (int e = 0; e < n; ++e)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0;
          for (int m = 0; m < n; ++m)
            for (int k = 0; k < n; ++k) s += mp.Ginv[a][m] * dG[e][m][k] * mp.Ginv[k][b];
          dGinv[e][a][b] = -s;
        }
  }
  double omUp[3], domUp[3][3];
  for (int a = 0; a < n; ++a) {
    omUp[a] = 0;
    for (int b = 0; b < n; ++b) omUp[a] += mp.Ginv[a][b] * om[b].v;
    for (int e = 0; e < n; ++e) {
      domUp[e][a] = 0;
      for (int b = 0; b < n; ++b)
        domUp[e][a] += dGinv[e][a][b] * om[b].v + mp.Ginv[a][b] * om[b].g[e];
    }
  }

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double corr = -0.5 * ((a == b ? om[c].v : 0.0) + (a == c ? om[b].v : 0.0) -
                                    mp.G[b][c] * omUp[a]);
        cj.v[a][b][c] += corr;
        for (int e = 0; e < n; ++e) {
          double d = -0.5 * ((a == b ? om[c].g[e] : 0.0) + (a == c ? om[b].g[e] : 0.0) -
                             mj.comp[b][c].g[e] * omUp[a] - mp.G[b][c] * domUp[e][a]);
          cj.d[e][a][b][c] += d;
        }
      }
  return cj;
}

double weyl_compat_residual(const EWStructure& ew, std::span<const double> p) {
  MetricJets mj = eval_metric_jets(ew.h, p);
  ChristoffelJets cj = weyl_connection_jets(ew, p);
  const int n = 3;
  double om[3];
  for (int a = 0; a < n; ++a)
    om[a] = ew.omega[a].is_zero() ? 0.0 : field_value(ew.omega[a], p);
  double worst = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double Dh = mj.comp[b][c].g[a];
        for (int d = 0; d < n; ++d)
          Dh -= cj.v[d][a][b] * mj.comp[d][c].v + cj.v[d][a][c] * mj.comp[b][d].v;
        worst = std::max(worst, std::abs(Dh - om[a] * mj.comp[b][c].v));
      }
  return worst;
}

void weyl_ricci(const EWStructure& ew, std::span<const double> p, double W[3][3]) {
  ChristoffelJets cj = weyl_connection_jets(ew, p);
  double R[4][4][4][4];
  riemann_from_connection(cj, 3, R);
  for (int b = 0; b < 3; ++b)
    for (int d = 0; d < 3; ++d) {
      double s = 0;
      for (int a = 0; a < 3; ++a) s += R[a][b][a][d];
      W[b][d] = s;
    }
}

double ew_pointwise(const EWStructure& ew, std::span<const double> p) {
  double W[3][3];
  weyl_ricci(ew, p, W);
  MetricPoint mp = eval_metric_point(ew.h, p);
  double trace = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) trace += mp.Ginv[i][j] * W[i][j];
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double sym = 0.5 * (W[i][j] + W[j][i]);
      worst = std::max(worst, std::abs(sym - trace / 3.0 * mp.G[i][j]));
    }
  return worst;
}

double ew_skew_part(const EWStructure& ew, std::span<const double> p) {
  double W[3][3];
  weyl_ricci(ew, p, W);
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, 0.5 * std::abs(W[i][j] - W[j][i]));
  return worst;
}

ResidualReport ew_residual(const EWStructure& ew,
                           std::span<const std::vector<double>> samples,
                           double tolerance, const std::string& name) {
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (const auto& p : samples) rep.absorb(ew_pointwise(ew, p));
  return rep;
}

TwoForm3 monopole_flux(const EWStructure& ew, const ScalarField& V,
                       std::span<const double> p) {
  MetricPoint mp = eval_metric_point(ew.h, p);
  Jet2 vj = jet_eval(V, p);
  double om[3];
  for (int a = 0; a < 3; ++a)
    om[a] = ew.omega[a].is_zero() ? 0.0 : field_value(ew.omega[a], p);
  double F[3];
  for (int a = 0; a < 3; ++a) F[a] = vj.g[a] + 0.5 * om[a] * vj.v;
  TwoForm3 B{};
  const double s = ew.orientation3 * mp.sqrtAbsDet;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double acc = 0;
      for (int c = 0; c < 3; ++c) {
        const int sg = perm3(a, b, c);
        if (!sg) continue;
        for (int d = 0; d < 3; ++d) acc += sg * mp.Ginv[c][d] * F[d];
      }
      B[a][b] = s * acc;
    }
  return B;
}

double monopole_pointwise(const EWStructure& ew, const MonopoleData& m,
                          std::span<const double> p) {
  TwoForm3 B = monopole_flux(ew, m.V, p);
  Jet2 eta[3];
  for (int a = 0; a < 3; ++a)
    eta[a] = m.eta[a].is_zero() ? Jet2::constant(3, 0.0) : jet_eval(m.eta[a], p);
  double worst = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double deta = eta[b].g[a] - eta[a].g[b];
      worst = std::max(worst, std::abs(B[a][b] - deta));
    }
  return worst;
}

ResidualReport monopole_residual(const EWStructure& ew, const MonopoleData& m,
                                 std::span<const std::vector<double>> samples,
                                 double tolerance, const std::string& name) {
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (const auto& p : samples) rep.absorb(monopole_pointwise(ew, m, p));
  return rep;
}

double flux_closure_residual(const EWStructure& ew, const ScalarField& V,
                             std::span<const double> p) {
  // dB = div(sqrt|h| h^{ab} F_b) dx^dy^dt with F = dV + 1/2 omega V
  MetricJets mj = eval_metric_jets(ew.h, p);
  MetricPoint mp = mj.pt();
  Jet2 vj = jet_eval(V, p);
  Jet2 om[3];
  for (int a = 0; a < 3; ++a)
    om[a] = ew.omega[a].is_zero() ? Jet2::constant(3, 0.0) : jet_eval(ew.omega[a], p);

  double dG[3][3][3], dGinv[3][3][3];
  for (int e = 0; e < 3; ++e)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) dG[e][a][b] = mj.comp[a][b].g[e];
  for (int e = 0; e < 3; ++e)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double s = 0;
        for (int m2 = 0; m2 < 3; ++m2)
          for (int k = 0; k < 3; ++k) s += mp.Ginv[a][m2] * dG[e][m2][k] * mp.Ginv[k][b];
        dGinv[e][a][b] = -s;
      }
  // d_e sqrt|det| = sqrt|det| * tr(Ginv dG)/2
  double dsqrt[3];
  for (int e = 0; e < 3; ++e) {
    double tr = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) tr += mp.Ginv[a][b] * dG[e][a][b];
    dsqrt[e] = 0.5 * mp.sqrtAbsDet * tr;
  }
  double div = 0;
  for (int a = 0; a < 3; ++a) {
    // d_a [ sqrt * h^{ab} (V_b + om_b V / 2) ]
    for (int b = 0; b < 3; ++b) {
      const double Fb = vj.g[b] + 0.5 * om[b].v * vj.v;
      const double dFb = vj.h[a][b] + 0.5 * (om[b].g[a] * vj.v + om[b].v * vj.g[a]);
      div += dsqrt[a] * mp.Ginv[a][b] * Fb + mp.sqrtAbsDet * dGinv[a][a][b] * Fb +
             mp.sqrtAbsDet * mp.Ginv[a][b] * dFb;
    }
  }
  return std::abs(div);
}

std::array<double, 3> reconstruct_eta(const EWStructure& ew, const ScalarField& V,
                                      std::span<const double> p, double quadTol) {
  const double x0 = ew.h.box.lo[0], y0 = ew.h.box.lo[1];
  auto Bat = [&](double x, double y, double t) {
    const std::vector<double> q = {x, y, t};
    return monopole_flux(ew, V, q);
  };
  // adaptive Simpson
  std::function<double(const std::function<double(double)>&, double, double, double,
                       double, double, double, int)>
      simp = [&](const std::function<double(double)>& f, double a, double b, double fa,
                 double fb, double fm, double tol, int depth) -> double {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth > 24 || std::abs(left + right - whole) < 15 * tol)
      return left + right + (left + right - whole) / 15.0;
    return simp(f, a, m, fa, fm, flm, tol / 2, depth + 1) +
           simp(f, m, b, fm, fb, frm, tol / 2, depth + 1);
  };
  auto integrate = [&](const std::function<double(double)>& f, double a, double b) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simp(f, a, b, fa, fb, fm, quadTol, 0);
  };
  const double px = p[0], py = p[1], pt = p[2];
  std::array<double, 3> eta{};
  eta[1] = integrate([&](double s) { return Bat(s, py, pt)[0][1]; }, x0, px);
  eta[2] = integrate([&](double s) { return Bat(s, py, pt)[0][2]; }, x0, px) +
           integrate([&](double u) { return Bat(x0, u, pt)[1][2]; }, y0, py);
  return eta;
}

namespace {

// Orientation of the lifted chart in which the primed spinors built from the
// natural lift tetrad (V tau^1, V tau^2, V tau^3, dphi + eta) are self-dual;
// the triad tau of h is handed to match the monopole star's orientation.
double lift_orientation(const EWStructure& ew, const MonopoleData& m,
                        const MetricField& g4) {
  std::vector<double> c3(3), c4(4);
  for (int i = 0; i < 3; ++i)
    c3[i] = 0.5 * (ew.h.box.lo[i] + ew.h.box.hi[i]) + 0.01 * (i + 1);
  for (int i = 0; i < 3; ++i) c4[i] = c3[i];
  c4[3] = 0.0;

  MetricPoint hp = eval_metric_point(ew.h, c3);
  Eigen::Matrix3d H;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) H(i, j) = hp.G[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
  double tau[3][3];
  int row = 0;
  for (int i = 0; i < 3; ++i)
    if (es.eigenvalues()[i] > 0) {
      for (int a = 0; a < 3; ++a)
        tau[row][a] = std::sqrt(es.eigenvalues()[i]) * es.eigenvectors()(a, i);
      ++row;
    }
  for (int i = 0; i < 3; ++i)
    if (es.eigenvalues()[i] < 0)
      for (int a = 0; a < 3; ++a)
        tau[2][a] = std::sqrt(-es.eigenvalues()[i]) * es.eigenvectors()(a, i);
  const double det3 = tau[0][0] * (tau[1][1] * tau[2][2] - tau[1][2] * tau[2][1]) -
                      tau[0][1] * (tau[1][0] * tau[2][2] - tau[1][2] * tau[2][0]) +
                      tau[0][2] * (tau[1][0] * tau[2][1] - tau[1][1] * tau[2][0]);
  if (det3 * ew.orientation3 < 0)
    for (int a = 0; a < 3; ++a) tau[1][a] = -tau[1][a];

  const double V0 = field_value(m.V, c3);
  double eta0[3];
  for (int a = 0; a < 3; ++a)
    eta0[a] = m.eta[a].is_zero() ? 0.0 : field_value(m.eta[a], c3);

  double th[4][4] = {};
  for (int a = 0; a < 3; ++a) {
    th[0][a] = V0 * tau[0][a];
    th[1][a] = V0 * tau[1][a];
    th[2][a] = V0 * tau[2][a];
    th[3][a] = eta0[a];
  }
  th[3][3] = 1.0;
  const double r = 1.0 / std::sqrt(2.0);
  double co[2][2][4];
  for (int a = 0; a < 4; ++a) {
    co[0][0][a] = r * (th[0][a] + th[2][a]);
    co[1][1][a] = r * (th[0][a] - th[2][a]);
    co[0][1][a] = r * (th[1][a] + th[3][a]);
    co[1][0][a] = r * (th[3][a] - th[1][a]);
  }
  TwoForm sigma{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      sigma[a][b] = 0.5 * (co[0][0][a] * co[1][1][b] - co[0][0][b] * co[1][1][a] -
                           co[1][0][a] * co[0][1][b] + co[1][0][b] * co[0][1][a]);
  MetricPoint mp4 = eval_metric_point(g4, c4);
  TwoForm s = hodge_star2(mp4, 1.0, sigma);
  double dot = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) dot += s[a][b] * sigma[a][b];
  return dot >= 0 ? 1.0 : -1.0;
}

}  // namespace

MetricField jones_tod_lift(const EWStructure& ew, const MonopoleData& m) {
  MetricField g;
  g.dim = 4;
  g.box = Box{{ew.h.box.lo[0], ew.h.box.lo[1], ew.h.box.lo[2], -1},
              {ew.h.box.hi[0], ew.h.box.hi[1], ew.h.box.hi[2], 1}};
  const Expr V = m.V.expr;
  Expr eta[3];
  for (int a = 0; a < 3; ++a)
    eta[a] = m.eta[a].is_zero() ? Expr::constant(0.0) : m.eta[a].expr;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      Expr hab = ew.h.comp[a][b].is_zero() ? Expr::constant(0.0) : ew.h.comp[a][b].expr;
      Expr comp = V * V * hab - eta[a] * eta[b];
      if (a == b) g.set(a, a, {4, comp});
      else g.set(a, b, {4, comp});
    }
  for (int a = 0; a < 3; ++a) g.set(a, 3, {4, Expr::constant(0.0) - eta[a]});
  g.set(3, 3, {4, Expr::constant(-1.0)});
  g.orientation = lift_orientation(ew, m, g);
  return g;
}

ReducedEW jones_tod_reduce(const MetricField& g4) {
  // K = d/dphi; |K|^2 = g_pp must be nonvanishing
  const auto c = [&] {
    std::vector<double> q(4);
    for (int i = 0; i < 4; ++i) q[i] = 0.5 * (g4.box.lo[i] + g4.box.hi[i]) + 0.01 * (i + 1);
    return q;
  }();
  MetricPoint mpc = eval_metric_point(g4, c);
  if (std::abs(mpc.G[3][3]) < 1e-8)
    throw EvalError("null Killing vector: use the null-case canonical forms");

  Expr gc[4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      gc[a][b] = g4.comp[a][b].is_zero() ? Expr::constant(0.0) : g4.comp[a][b].expr;
  const Expr K2 = gc[3][3];

  ReducedEW out;
  out.ew.h.dim = 3;
  out.ew.h.sigPlus = 2;
  out.ew.h.sigMinus = 1;
  out.ew.h.box = Box{{g4.box.lo[0], g4.box.lo[1], g4.box.lo[2]},
                     {g4.box.hi[0], g4.box.hi[1], g4.box.hi[2]}};

  // h_ij = |K|^-2 g_ij - |K|^-4 KK_i KK_j with KK_a = g_{a phi}
  Expr hset[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      hset[i][j] = gc[i][j] / K2 - gc[i][3] * gc[j][3] / (K2 * K2);

  // sign-normalize to (2,1): count positive eigenvalues at the centre
  {
    Eigen::Matrix3d H;
    std::vector<double> q3(c.begin(), c.begin() + 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) H(i, j) = ScalarField(3, hset[i][j]).expr.value(c);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
    int plus = 0;
    for (int i = 0; i < 3; ++i)
      if (es.eigenvalues()[i] > 0) ++plus;
    if (plus == 1) {
      out.flippedSign = true;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) hset[i][j] = Expr::constant(-1.0) * hset[i][j];
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) out.ew.h.set(i, j, {3, hset[i][j]});

  // omega = 2 |K|^-2 *_g (KK ^ dKK), pulled back to the quotient chart
  Expr KK[4];
  for (int a = 0; a < 4; ++a) KK[a] = gc[a][3];
  Expr dKK[4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) dKK[a][b] = Expr(KK[b]).diff(a) - Expr(KK[a]).diff(b);
  // T = KK ^ dKK
  auto T = [&](int a, int b, int cc) {
    return KK[a] * dKK[b][cc] + KK[b] * dKK[cc][a] + KK[cc] * dKK[a][b];
  };
  // det g as an expression
  Expr det = Expr::constant(0.0);
  {
    int idx[4] = {0, 1, 2, 3};
    std::sort(idx, idx + 4);
    do {
      int sgn = 1;
      int pp[4] = {idx[0], idx[1], idx[2], idx[3]};
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          if (pp[i] > pp[j]) {
            std::swap(pp[i], pp[j]);
            sgn = -sgn;
          }
      (void)pp;
      Expr term = gc[0][idx[0]] * gc[1][idx[1]] * gc[2][idx[2]] * gc[3][idx[3]];
      det = det + Expr::constant(static_cast<double>(sgn)) * term;
    } while (std::next_permutation(idx, idx + 4));
  }
  const Expr sq = expr_sqrt(det);  // neutral signature: det > 0

  // (*T)_a = s/(6 sqrt(det)) g_{ak} tilde-eps_{kefh} T_{efh}; the sign s is
  // fixed by the round-trip with the lift.
  auto perm4sign = [](int a, int b, int cc, int d) {
    int q[4] = {a, b, cc, d};
    int s = 1;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        if (q[i] == q[j]) return 0;
        if (q[i] > q[j]) {
          std::swap(q[i], q[j]);
          s = -s;
        }
      }
    return s;
  };
  for (int a = 0; a < 3; ++a) {
    Expr acc = Expr::constant(0.0);
    for (int k = 0; k < 4; ++k)
      for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f)
          for (int h2 = 0; h2 < 4; ++h2) {
            const int sg = perm4sign(k, e, f, h2);
            if (!sg) continue;
            acc = acc + Expr::constant(static_cast<double>(sg)) * gc[a][k] * T(e, f, h2);
          }
    out.ew.omega[a] = {3, Expr::constant(-2.0) / K2 * acc / (6.0 * sq)};
  }
  return out;
}

double weyl_connection_distance(const EWStructure& a, const EWStructure& b,
                                std::span<const double> p) {
  ChristoffelJets ca = weyl_connection_jets(a, p);
  ChristoffelJets cb = weyl_connection_jets(b, p);
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        worst = std::max(worst, std::abs(ca.v[i][j][k] - cb.v[i][j][k]));
  return worst;
}

std::vector<ScalarField> integrable_residual_fields(IntegrableKind kind,
                                                    const ScalarField& u,
                                                    const ScalarField& w, double b,
                                                    double c) {
  // charts: (x,y,t) = vars (0,1,2)
  std::vector<ScalarField> out;
  switch (kind) {
    case IntegrableKind::Toda: {
      // (e^u)_tt - u_xx - u_yy
      ScalarField eu{3, expr_exp(u.expr)};
      out.push_back(
          {3, eu.diff(2).diff(2).expr - u.diff(0).diff(0).expr - u.diff(1).diff(1).expr});
      break;
    }
    case IntegrableKind::Dkp: {
      if (w.is_zero() && !u.is_zero() && w.arity == 0) {
        // scalar form (u_t - u u_x)_x - u_yy
        const ScalarField ut = u.diff(2), ux = u.diff(0);
        out.push_back({3, ut.diff(0).expr - ux.expr * ux.expr -
                              u.expr * ux.diff(0).expr - u.diff(1).diff(1).expr});
      } else {
        // first-order pair; identical to the interpolating system at (b,c)=(1,0)
        out.push_back({3, u.diff(1).expr + w.diff(0).expr});
        out.push_back({3, u.diff(2).expr + w.diff(1).expr + u.expr * u.diff(0).expr});
      }
      break;
    }
    case IntegrableKind::HyperCr: {
      out.push_back({3, u.diff(1).expr + w.diff(0).expr});
      out.push_back({3, u.diff(2).expr + w.diff(1).expr + u.expr * w.diff(0).expr -
                            w.expr * u.diff(0).expr});
      break;
    }
    case IntegrableKind::Interpolating: {
      out.push_back({3, u.diff(1).expr + w.diff(0).expr});
      out.push_back({3, u.diff(2).expr + w.diff(1).expr -
                            Expr::constant(c) * (u.expr * w.diff(0).expr -
                                                 w.expr * u.diff(0).expr) +
                            Expr::constant(b) * u.expr * u.diff(0).expr});
      break;
    }
  }
  return out;
}

ResidualReport integrable_residual(IntegrableKind kind, const ScalarField& u,
                                   const ScalarField& w, double b, double c,
                                   std::span<const std::vector<double>> samples,
                                   double tolerance, const std::string& name) {
  auto fields = integrable_residual_fields(kind, u, w, b, c);
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (const auto& p : samples) {
    double worst = 0;
    for (const auto& f : fields) worst = std::max(worst, std::abs(field_value(f, p)));
    rep.absorb(worst);
  }
  return rep;
}

// --- grid solver --------------------------------------------------------------

namespace {

struct OperatorCoefficients {
  // C[a][b] multiplies d_a(C d_b V); D[a] multiplies d_a(D V)
  std::function<double(std::span<const double>, int, int)> C;
  std::function<double(std::span<const double>, int)> D;
};

GridSolution solve_divergence_form(const GridSpec& grid, const OperatorCoefficients& op,
                                   const std::function<double(std::span<const double>)>& bc) {
  const int n = grid.n;
  const double dx[3] = {grid.spacing(0), grid.spacing(1), grid.spacing(2)};
  auto gidx = [n](int i, int j, int k) { return (static_cast<size_t>(i) * n + j) * n + k; };
  auto interior = [n](int i, int j, int k) {
    return i > 0 && i < n - 1 && j > 0 && j < n - 1 && k > 0 && k < n - 1;
  };
  auto unknown = [&](int i, int j, int k) {
    return (static_cast<long>(i - 1) * (n - 2) + (j - 1)) * (n - 2) + (k - 1);
  };

  GridSolution sol;
  sol.grid = grid;
  sol.values.assign(static_cast<size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (!interior(i, j, k)) sol.values[gidx(i, j, k)] = bc(grid.node(i, j, k));

  const long m = static_cast<long>(n - 2) * (n - 2) * (n - 2);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(m) * 19);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);

  auto shift = [&](int idx[3], int axis, int delta) {
    int out[3] = {idx[0], idx[1], idx[2]};
    out[axis] += delta;
    return std::array<int, 3>{out[0], out[1], out[2]};
  };

  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j)
      for (int k = 1; k < n - 1; ++k) {
        const long row = unknown(i, j, k);
        int idx[3] = {i, j, k};
        auto add = [&](std::array<int, 3> at, double coef) {
          if (coef == 0.0) return;
          if (interior(at[0], at[1], at[2]))
            trips.emplace_back(row, unknown(at[0], at[1], at[2]), coef);
          else
            rhs(row) -= coef * sol.values[gidx(at[0], at[1], at[2])];
        };
        auto nodeAt = [&](std::array<int, 3> at) { return grid.node(at[0], at[1], at[2]); };

        for (int a = 0; a < 3; ++a) {
          // diagonal second-order terms in flux form
          {
            auto plus = shift(idx, a, 1), minus = shift(idx, a, -1);
            std::vector<double> pph = grid.node(i, j, k);
            pph[a] += dx[a] / 2;
            std::vector<double> pmh = grid.node(i, j, k);
            pmh[a] -= dx[a] / 2;
            const double cp = op.C(pph, a, a), cm = op.C(pmh, a, a);
            add(plus, cp / (dx[a] * dx[a]));
            add(minus, cm / (dx[a] * dx[a]));
            add({i, j, k}, -(cp + cm) / (dx[a] * dx[a]));
          }
          // mixed terms d_a (C^{ab} d_b V), a != b, central everywhere
          for (int b2 = 0; b2 < 3; ++b2) {
            if (b2 == a) continue;
            auto ap = shift(idx, a, 1), am = shift(idx, a, -1);
            const double cp = op.C(nodeAt(ap), a, b2), cm = op.C(nodeAt(am), a, b2);
            // (cp * D_b V|_{a+1} - cm * D_b V|_{a-1}) / (2 dx_a)
            int app[3] = {ap[0], ap[1], ap[2]};
            int amm[3] = {am[0], am[1], am[2]};
            auto apb = shift(app, b2, 1), apb2 = shift(app, b2, -1);
            auto amb = shift(amm, b2, 1), amb2 = shift(amm, b2, -1);
            const double w4 = 1.0 / (4.0 * dx[a] * dx[b2]);
            add(apb, cp * w4);
            add(apb2, -cp * w4);
            add(amb, -cm * w4);
            add(amb2, cm * w4);
          }
          // first-order term d_a (D^a V), central
          {
            auto ap = shift(idx, a, 1), am = shift(idx, a, -1);
            const double dp = op.D(nodeAt(ap), a), dm = op.D(nodeAt(am), a);
            add(ap, dp / (2 * dx[a]));
            add(am, -dm / (2 * dx[a]));
          }
        }
      }

  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::VectorXd x;
  if (n <= 42) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success) throw EvalError("grid solver: factorization failed");
    x = lu.solve(rhs);
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it(A);
    it.setTolerance(1e-12);
    it.setMaxIterations(100000);
    x = it.solve(rhs);
    if (it.info() != Eigen::Success)
      throw EvalError("grid solver: iteration did not converge");
  }
  sol.solveResidual = (A * x - rhs).cwiseAbs().maxCoeff();
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j)
      for (int k = 1; k < n - 1; ++k) sol.values[gidx(i, j, k)] = x(unknown(i, j, k));
  return sol;
}

}  // namespace

GridSolution monopole_solve_linear(
    const EWStructure& ew, const GridSpec& grid,
    const std::function<double(std::span<const double>)>& dirichlet) {
  OperatorCoefficients op;
  op.C = [&ew](std::span<const double> p, int a, int b) {
    MetricPoint mp = eval_metric_point(ew.h, p);
    return mp.sqrtAbsDet * mp.Ginv[a][b];
  };
  op.D = [&ew](std::span<const double> p, int a) {
    MetricPoint mp = eval_metric_point(ew.h, p);
    double s = 0;
    for (int b = 0; b < 3; ++b)
      s += mp.Ginv[a][b] * (ew.omega[b].is_zero() ? 0.0 : field_value(ew.omega[b], p));
    return 0.5 * mp.sqrtAbsDet * s;
  };
  return solve_divergence_form(grid, op, dirichlet);
}

GridSolution dkp_linear_solve(
    const ScalarField& H, const GridSpec& grid,
    const std::function<double(std::span<const double>)>& dirichlet) {
  const ScalarField Hx = H.diff(0);
  OperatorCoefficients op;
  // W_yy - W_xt + (H_x W_x)_x
  op.C = [Hx](std::span<const double> p, int a, int b) -> double {
    if (a == 1 && b == 1) return 1.0;
    if ((a == 0 && b == 2) || (a == 2 && b == 0)) return -0.5;
    if (a == 0 && b == 0) return field_value(Hx, p);
    return 0.0;
  };
  op.D = [](std::span<const double>, int) { return 0.0; };
  return solve_divergence_form(grid, op, dirichlet);
}

void export_grid_csv(const GridSolution& sol, std::ostream& os) {
  os << "x,y,t,V\n";
  char buf[160];
  const int n = sol.grid.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        auto p = sol.grid.node(i, j, k);
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", p[0], p[1], p[2],
                      sol.at(i, j, k));
        os << buf;
      }
}

std::vector<GeodesicPoint> projective_geodesic(const ProjectiveStructure2D& ps,
                                               double x0, double y0, double yp0,
                                               double x1, double tol) {
  auto rhs = [&](double x, double y, double yp) {
    const std::vector<double> p = {x, y};
    double A[4];
    for (int i = 0; i < 4; ++i)
      A[i] = ps.A[i].is_zero() ? 0.0 : field_value(ps.A[i], p);
    return ((A[3] * yp + A[2]) * yp + A[1]) * yp + A[0];
  };
  // embedded RK4(5)-style adaptive stepper with step doubling
  std::vector<GeodesicPoint> out = {{x0, y0, yp0}};
  double x = x0, y = y0, yp = yp0;
  double hstep = (x1 - x0) / 64.0;
  const double dir = x1 >= x0 ? 1.0 : -1.0;
  hstep = dir * std::abs(hstep);
  auto rk4 = [&](double xx, double yy, double vv, double hh, double& ny, double& nv) {
    const double k1y = vv, k1v = rhs(xx, yy, vv);
    const double k2y = vv + hh / 2 * k1v, k2v = rhs(xx + hh / 2, yy + hh / 2 * k1y, vv + hh / 2 * k1v);
    const double k3y = vv + hh / 2 * k2v, k3v = rhs(xx + hh / 2, yy + hh / 2 * k2y, vv + hh / 2 * k2v);
    const double k4y = vv + hh * k3v, k4v = rhs(xx + hh, yy + hh * k3y, vv + hh * k3v);
    ny = yy + hh / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    nv = vv + hh / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  };
  int guard = 0;
  while (dir * (x1 - x) > 1e-14 && guard++ < 100000) {
    if (dir * (x + hstep - x1) > 0) hstep = x1 - x;
    double y1f, v1f, yh, vh, y2f, v2f;
    rk4(x, y, yp, hstep, y1f, v1f);
    rk4(x, y, yp, hstep / 2, yh, vh);
    rk4(x + hstep / 2, yh, vh, hstep / 2, y2f, v2f);
    const double err = std::max(std::abs(y1f - y2f), std::abs(v1f - v2f));
    if (err < tol * (1.0 + std::abs(y2f)) || std::abs(hstep) < 1e-12) {
      x += hstep;
      y = y2f;
      yp = v2f;
      out.push_back({x, y, yp});
      if (err < tol / 32) hstep *= 2;
      if (!std::isfinite(y) || std::abs(y) > 1e6)
        throw EvalError("projective geodesic blow-up before requested range");
    } else {
      hstep /= 2;
    }
  }
  return out;
}

}  // namespace nsasd
