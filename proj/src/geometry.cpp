#include "nsasd/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "nsasd/spinor.hpp"

namespace nsasd {

Jet1 operator+(const Jet1& a, const Jet1& b) {
  Jet1 r = a;
  r.v += b.v;
  for (int i = 0; i < a.n; ++i) r.g[i] += b.g[i];
  return r;
}
Jet1 operator-(const Jet1& a, const Jet1& b) {
  Jet1 r = a;
  r.v -= b.v;
  for (int i = 0; i < a.n; ++i) r.g[i] -= b.g[i];
  return r;
}
Jet1 operator-(const Jet1& a) {
  Jet1 r = a;
  r.v = -r.v;
  for (int i = 0; i < a.n; ++i) r.g[i] = -r.g[i];
  return r;
}
Jet1 operator*(const Jet1& a, const Jet1& b) {
  Jet1 r;
  r.n = a.n;
  r.v = a.v * b.v;
  for (int i = 0; i < a.n; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  return r;
}
Jet1 operator/(const Jet1& a, const Jet1& b) {
  if (std::abs(b.v) < kSingularTol) throw EvalError("Jet1 division by ~0");
  Jet1 r;
  r.n = a.n;
  r.v = a.v / b.v;
  for (int i = 0; i < a.n; ++i) r.g[i] = (a.g[i] - r.v * b.g[i]) / b.v;
  return r;
}
Jet1 operator*(double c, const Jet1& a) {
  Jet1 r = a;
  r.v *= c;
  for (int i = 0; i < a.n; ++i) r.g[i] *= c;
  return r;
}

void MetricField::add_ds2(int a, int b, const Expr& c) {
  if (a == b) {
    comp[a][a] = {dim, comp[a][a].is_zero() ? c : comp[a][a].expr + c};
  } else {
    const Expr half = c * 0.5;
    comp[a][b] = {dim, comp[a][b].is_zero() ? half : comp[a][b].expr + half};
    comp[b][a] = comp[a][b];
  }
}

static void invert(int n, const double A[4][4], double out[4][4], double* det) {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = A[i][j];
  const double d = M.topLeftCorner(n, n).determinant();
  if (std::abs(d) < kSingularTol) throw EvalError("singular metric");
  Eigen::MatrixXd inv = M.topLeftCorner(n, n).inverse();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i][j] = inv(i, j);
  if (det) *det = d;
}

MetricPoint MetricJets::pt() const {
  MetricPoint mp;
  mp.n = n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) mp.G[a][b] = comp[a][b].v;
  invert(n, mp.G, mp.Ginv, &mp.det);
  mp.sqrtAbsDet = std::sqrt(std::abs(mp.det));
  return mp;
}

MetricJets eval_metric_jets(const MetricField& m, std::span<const double> p) {
  if (m.excluded && m.excluded(p)) throw EvalError("point in excluded set");
  MetricJets mj;
  mj.n = m.dim;
  for (int a = 0; a < m.dim; ++a)
    for (int b = a; b < m.dim; ++b) {
      mj.comp[a][b] = m.comp[a][b].is_zero() ? Jet2::constant(m.dim, 0.0)
                                             : jet_eval(m.comp[a][b], p);
      mj.comp[b][a] = mj.comp[a][b];
    }
  return mj;
}

MetricPoint eval_metric_point(const MetricField& m, std::span<const double> p) {
  return eval_metric_jets(m, p).pt();
}

bool signature_matches(const MetricField& m, std::span<const double> p) {
  MetricPoint mp = eval_metric_point(m, p);
  Eigen::MatrixXd M(m.dim, m.dim);
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) M(i, j) = mp.G[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  int plus = 0, minus = 0;
  for (int i = 0; i < m.dim; ++i) (es.eigenvalues()[i] > 0 ? plus : minus)++;
  return plus == m.sigPlus && minus == m.sigMinus;
}

ChristoffelJets christoffel_jets(const MetricJets& mj) {
  const int n = mj.n;
  MetricPoint mp = mj.pt();
  // dG[e][a][b] = d_e g_ab ; ddG[e][f][a][b] = d_e d_f g_ab
  double dG[4][4][4], dGinv[4][4][4];
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
  ChristoffelJets cj;
  cj.n = n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = 0;
        for (int d = 0; d < n; ++d)
          s += mp.Ginv[a][d] * (dG[b][d][c] + dG[c][b][d] - dG[d][b][c]);
        cj.v[a][b][c] = 0.5 * s;
        for (int e = 0; e < n; ++e) {
          double t = 0;
          for (int d = 0; d < n; ++d) {
            t += dGinv[e][a][d] * (dG[b][d][c] + dG[c][b][d] - dG[d][b][c]);
            t += mp.Ginv[a][d] * (mj.comp[d][c].h[e][b] + mj.comp[b][d].h[e][c] -
                                  mj.comp[b][c].h[e][d]);
          }
          cj.d[e][a][b][c] = 0.5 * t;
        }
      }
  return cj;
}

void riemann_from_connection(const ChristoffelJets& cj, int n, double R[4][4][4][4]) {
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double s = cj.d[c][a][d][b] - cj.d[d][a][c][b];
          for (int e = 0; e < n; ++e)
            s += cj.v[a][c][e] * cj.v[e][d][b] - cj.v[a][d][e] * cj.v[e][c][b];
          R[a][b][c][d] = s;
        }
}

CurvaturePack curvature_pack(const MetricField& g, std::span<const double> p) {
  CurvaturePack cp;
  cp.n = g.dim;
  const int n = g.dim;
  MetricJets mj = eval_metric_jets(g, p);
  cp.mp = mj.pt();
  cp.christoffel = christoffel_jets(mj);
  riemann_from_connection(cp.christoffel, n, cp.riemannUp);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double s = 0;
          for (int e = 0; e < n; ++e) s += cp.mp.G[a][e] * cp.riemannUp[e][b][c][d];
          cp.riemann[a][b][c][d] = s;
        }
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double s = 0;
      for (int a = 0; a < n; ++a) s += cp.riemannUp[a][b][a][d];
      cp.ricci[b][d] = s;
    }
  cp.scalar = 0;
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) cp.scalar += cp.mp.Ginv[b][d] * cp.ricci[b][d];
  if (n == 4) {
    const auto& G = cp.mp.G;
    const auto& Ric = cp.ricci;
    const double s6 = cp.scalar / 6.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            double w = cp.riemann[a][b][c][d];
            w -= 0.5 * (G[a][c] * Ric[b][d] - G[a][d] * Ric[b][c] -
                        G[b][c] * Ric[a][d] + G[b][d] * Ric[a][c]);
            w += s6 * (G[a][c] * G[b][d] - G[a][d] * G[b][c]);
            cp.weyl[a][b][c][d] = w;
          }
  }
  return cp;
}

static int perm_sign4(int a, int b, int c, int d) {
  int p[4] = {a, b, c, d};
  int sign = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (p[i] == p[j]) return 0;
      if (p[i] > p[j]) {
        std::swap(p[i], p[j]);
        sign = -sign;
      }
    }
  return sign;
}

TwoForm hodge_star2(const MetricPoint& mp, double orientation, const TwoForm& F) {
  // (*F)_ab = 1/2 eps_abcd F^{cd},  eps_abcd = orientation*sqrt|det g|*sgn(abcd)
  double Fup[4][4];
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 4; ++d) {
      double s = 0;
      for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f) s += mp.Ginv[c][e] * mp.Ginv[d][f] * F[e][f];
      Fup[c][d] = s;
    }
  TwoForm out{};
  const double eps0 = orientation * mp.sqrtAbsDet;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0;
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const int sg = perm_sign4(a, b, c, d);
          if (sg != 0) s += sg * Fup[c][d];
        }
      out[a][b] = 0.5 * eps0 * s;
    }
  return out;
}

TwoForm hodge_star2(const MetricField& g, std::span<const double> p, const TwoForm& F) {
  return hodge_star2(eval_metric_point(g, p), g.orientation, F);
}

// Star acting on the first index pair of a (0,4) tensor with 2-form symmetry.
static void left_star(const MetricPoint& mp, double orientation,
                      const double C[4][4][4][4], double out[4][4][4][4]) {
  const double eps0 = orientation * mp.sqrtAbsDet;
  double Cup[4][4][4][4];
  for (int e = 0; e < 4; ++e)
    for (int f = 0; f < 4; ++f)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = 0;
          for (int m = 0; m < 4; ++m)
            for (int k = 0; k < 4; ++k)
              s += mp.Ginv[e][m] * mp.Ginv[f][k] * C[m][k][c][d];
          Cup[e][f][c][d] = s;
        }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = 0;
          for (int e = 0; e < 4; ++e)
            for (int f = 0; f < 4; ++f) {
              const int sg = perm_sign4(a, b, e, f);
              if (sg != 0) s += sg * Cup[e][f][c][d];
            }
          out[a][b][c][d] = 0.5 * eps0 * s;
        }
}

WeylSplit split_weyl_tensor(const MetricPoint& mp, double orientation,
                            const double C[4][4][4][4]) {
  double SC[4][4][4][4];
  left_star(mp, orientation, C, SC);
  WeylSplit ws;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          ws.plus[a][b][c][d] = 0.5 * (C[a][b][c][d] + SC[a][b][c][d]);
          ws.minus[a][b][c][d] = 0.5 * (C[a][b][c][d] - SC[a][b][c][d]);
        }
  return ws;
}

WeylSplit weyl_split(const MetricField& g, std::span<const double> p) {
  CurvaturePack cp = curvature_pack(g, p);
  return split_weyl_tensor(cp.mp, g.orientation, cp.weyl);
}

double frob4(const double T[4][4][4][4], int n) {
  double s = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) s += T[a][b][c][d] * T[a][b][c][d];
  return std::sqrt(s);
}

ResidualReport asd_residual(const MetricField& g,
                            std::span<const std::vector<double>> samples,
                            double tolerance, const std::string& name) {
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (const auto& p : samples) {
    CurvaturePack cp = curvature_pack(g, p);
    WeylSplit ws = split_weyl_tensor(cp.mp, g.orientation, cp.weyl);
    rep.absorb(frob4(ws.plus) / (frob4(cp.weyl) + 1.0));
  }
  return rep;
}

RicciVerdict ricci_flatness(const MetricField& g,
                            std::span<const std::vector<double>> samples) {
  RicciVerdict rv;
  const int n = g.dim;
  for (const auto& p : samples) {
    CurvaturePack cp = curvature_pack(g, p);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double tf = cp.ricci[a][b] - cp.scalar / n * cp.mp.G[a][b];
        rv.maxTracefree = std::max(rv.maxTracefree, std::abs(tf));
      }
    rv.maxScalar = std::max(rv.maxScalar, std::abs(cp.scalar));
  }
  return rv;
}

double scalar_flatness(const MetricField& g, std::span<const std::vector<double>> samples) {
  double m = 0;
  for (const auto& p : samples) m = std::max(m, std::abs(curvature_pack(g, p).scalar));
  return m;
}

std::string petrov_name(PetrovType t) {
  switch (t) {
    case PetrovType::I: return "I";
    case PetrovType::II: return "II";
    case PetrovType::D: return "D";
    case PetrovType::III: return "III";
    case PetrovType::N: return "N";
    case PetrovType::O: return "O";
  }
  return "?";
}

namespace {

using Cplx = std::complex<double>;

// Coefficients (low to high) of the monic polynomial with the given root
// multiset.
std::vector<Cplx> poly_from_roots(const std::vector<Cplx>& roots,
                                  const std::vector<int>& mult) {
  std::vector<Cplx> c = {1.0};
  for (size_t i = 0; i < roots.size(); ++i)
    for (int k = 0; k < mult[i]; ++k) {
      std::vector<Cplx> nc(c.size() + 1, 0.0);
      for (size_t j = 0; j < c.size(); ++j) {
        nc[j + 1] += c[j];
        nc[j] -= roots[i] * c[j];
      }
      c = std::move(nc);
    }
  return c;
}

// Gauss-Newton fit of distinct roots with fixed multiplicities to a monic
// polynomial; returns the final coefficient-space residual.
double fit_root_pattern(const std::vector<Cplx>& target, const std::vector<int>& mult,
                        std::vector<Cplx>& roots) {
  const int d = static_cast<int>(target.size()) - 1;
  const int nr = static_cast<int>(roots.size());
  if (d == 0 || nr == 0) return 0.0;
  for (int iter = 0; iter < 40; ++iter) {
    std::vector<Cplx> cur = poly_from_roots(roots, mult);
    Eigen::VectorXd R(2 * d);
    for (int i = 0; i < d; ++i) {
      R(2 * i) = (cur[i] - target[i]).real();
      R(2 * i + 1) = (cur[i] - target[i]).imag();
    }
    Eigen::MatrixXd J(2 * d, 2 * nr);
    for (int j = 0; j < nr; ++j) {
      // d(coeffs)/d(r_j) = -m_j * coeffs of product with multiplicity of r_j
      // reduced by one
      std::vector<int> m2 = mult;
      m2[j] -= 1;
      std::vector<Cplx> der = poly_from_roots(roots, m2);
      for (int i = 0; i < d; ++i) {
        const Cplx v = (i < static_cast<int>(der.size()) ? der[i] : 0.0) *
                       Cplx(-static_cast<double>(mult[j]), 0.0);
        // complex derivative: columns for d/d(Re r_j) and d/d(Im r_j)
        J(2 * i, 2 * j) = v.real();
        J(2 * i + 1, 2 * j) = v.imag();
        J(2 * i, 2 * j + 1) = -v.imag();
        J(2 * i + 1, 2 * j + 1) = v.real();
      }
    }
    Eigen::VectorXd step = J.colPivHouseholderQr().solve(-R);
    for (int j = 0; j < nr; ++j) roots[j] += Cplx(step(2 * j), step(2 * j + 1));
    if (step.norm() < 1e-14) break;
  }
  std::vector<Cplx> cur = poly_from_roots(roots, mult);
  double res = 0;
  for (int i = 0; i < d; ++i) res = std::max(res, std::abs(cur[i] - target[i]));
  return res;
}

}  // namespace

WeylQuartic classify_quartic(const std::array<double, 5>& coeffs, double tol) {
  WeylQuartic q;
  q.coeffs = coeffs;
  double scale = 0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale < 1e-12) {
    q.petrovType = PetrovType::O;
    return q;
  }
  std::array<double, 5> c = coeffs;
  for (auto& x : c) x /= scale;

  // Degenerate leading coefficients put roots at mu = (0,1), i.e. at infinity.
  int degree = 4;
  while (degree > 0 && std::abs(c[degree]) < tol) --degree;
  const int infMult = 4 - degree;

  std::vector<Cplx> seeds;
  if (degree >= 1) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) comp(i, degree - 1) = -c[i] / c[degree];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    for (int i = 0; i < degree; ++i) seeds.push_back(es.eigenvalues()[i]);
  }
  std::sort(seeds.begin(), seeds.end(), [](const Cplx& a, const Cplx& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  // Monic target of the effective degree.
  std::vector<Cplx> target(degree + 1);
  for (int i = 0; i <= degree; ++i) target[i] = c[i] / c[degree];

  // Multiplicity patterns, most degenerate first; accept the first whose
  // fitted root multiset reproduces the coefficients within tolerance.
  static const std::vector<std::vector<int>> patterns[5] = {
      {{}},
      {{1}},
      {{2}, {1, 1}},
      {{3}, {2, 1}, {1, 1, 1}},
      {{4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}}};

  std::vector<int> mult;
  std::vector<Cplx> roots;
  for (const auto& pat : patterns[degree]) {
    // initial guess: split the sorted seed roots into consecutive groups
    std::vector<Cplx> guess;
    int at = 0;
    for (int m : pat) {
      Cplx mean = 0;
      for (int k = 0; k < m; ++k) mean += seeds[at + k];
      guess.push_back(mean / static_cast<double>(m));
      at += m;
    }
    std::vector<Cplx> r = guess;
    const double res = fit_root_pattern(target, pat, r);
    if (res <= tol || pat.size() == static_cast<size_t>(degree)) {
      mult = pat;
      roots = r;
      break;
    }
  }
  q.roots = roots;
  for (size_t i = 0; i < roots.size(); ++i)
    if (std::abs(roots[i].imag()) > tol * std::max(1.0, std::abs(roots[i])))
      q.allRootsReal = false;

  std::vector<int> pattern = mult;
  if (infMult > 0) pattern.push_back(infMult);
  std::sort(pattern.begin(), pattern.end(), std::greater<int>());
  q.multiplicities = pattern;

  if (pattern.size() == 1) q.petrovType = PetrovType::N;
  else if (pattern.size() == 2 && pattern[0] == 3) q.petrovType = PetrovType::III;
  else if (pattern.size() == 2 && pattern[0] == 2) q.petrovType = PetrovType::D;
  else if (pattern.size() == 3) q.petrovType = PetrovType::II;
  else q.petrovType = PetrovType::I;
  return q;
}

std::array<double, 5> asd_weyl_spinor(const MetricField& g, const TetradFrame& frame,
                                      std::span<const double> p) {
  CurvaturePack cp = curvature_pack(g, p);
  FramePoint fp = eval_frame(frame, p);

  // Sigma^{AB} = 1/2 (e^{A0'} ^ e^{B1'} - e^{A1'} ^ e^{B0'}), lower indices.
  double sigma[2][2][4][4] = {};
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          sigma[A][B][a][b] =
              0.5 * (fp.co[A][0][a] * fp.co[B][1][b] - fp.co[A][0][b] * fp.co[B][1][a] -
                     fp.co[A][1][a] * fp.co[B][0][b] + fp.co[A][1][b] * fp.co[B][0][a]);

  double sigmaUp[2][2][4][4];
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          double s = 0;
          for (int c = 0; c < 4; ++c)
            for (int d = 0; d < 4; ++d)
              s += cp.mp.Ginv[a][c] * cp.mp.Ginv[b][d] * sigma[A][B][c][d];
          sigmaUp[A][B][a][b] = s;
        }

  auto contract = [&](int A, int B, int C, int D) {
    double s = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d)
            s += cp.weyl[a][b][c][d] * sigmaUp[A][B][a][b] * sigmaUp[C][D][c][d];
    return s;
  };
  // Totally symmetric; five independent components.
  return {contract(0, 0, 0, 0), contract(0, 0, 0, 1), contract(0, 0, 1, 1),
          contract(0, 1, 1, 1), contract(1, 1, 1, 1)};
}

WeylQuartic petrov_classify(const MetricField& g, const TetradFrame& frame,
                            std::span<const double> p) {
  const auto C = asd_weyl_spinor(g, frame, p);
  // P(x) = mu^A mu^B mu^C mu^D C_ABCD with mu = (1, x).
  const std::array<double, 5> coeffs = {C[0], 4 * C[1], 6 * C[2], 4 * C[3], C[4]};
  // Scale-normalize against the full Weyl norm so "type O" means small Weyl,
  // not small dyad normalization.
  CurvaturePack cp = curvature_pack(g, p);
  const double wnorm = frob4(cp.weyl) + 1.0;
  std::array<double, 5> scaled;
  for (int i = 0; i < 5; ++i) scaled[i] = coeffs[i] / wnorm;
  return classify_quartic(scaled);
}

}  // namespace nsasd
