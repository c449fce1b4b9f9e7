#include "nsasd/spinor.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace nsasd {

namespace {

// Gauss-Jordan inverse of a 4x4 matrix with Jet2 entries (exact derivatives).
void invert_jet2(const Jet2 M[4][4], Jet2 out[4][4], int nvars) {
  Jet2 a[4][8];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[i][j] = M[i][j];
    for (int j = 0; j < 4; ++j) a[i][4 + j] = Jet2::constant(nvars, i == j ? 1.0 : 0.0);
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col].v) > std::abs(a[piv][col].v)) piv = r;
    if (std::abs(a[piv][col].v) < kSingularTol) throw EvalError("non-invertible frame");
    if (piv != col)
      for (int j = 0; j < 8; ++j) std::swap(a[piv][j], a[col][j]);
    const Jet2 d = a[col][col];
    for (int j = 0; j < 8; ++j) a[col][j] = a[col][j] / d;
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const Jet2 f = a[r][col];
      if (f.v == 0.0) {
        bool zero = true;
        for (int i = 0; i < nvars && zero; ++i)
          if (f.g[i] != 0.0) zero = false;
        if (zero) continue;
      }
      for (int j = 0; j < 8; ++j) a[r][j] = a[r][j] - f * a[col][j];
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = a[i][4 + j];
}

int flat_idx(int A, int Ap) { return 2 * A + Ap; }

}  // namespace

TetradFrame TetradFrame::from_vectors(
    std::array<std::array<std::array<Expr, 4>, 2>, 2> comps) {
  TetradFrame f;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int a = 0; a < 4; ++a)
        if (comps[A][Ap][a].valid()) f.e[A][Ap][a] = ScalarField(4, comps[A][Ap][a]);
  return f;
}

FramePoint FrameJets::pt() const {
  FramePoint fp;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int a = 0; a < 4; ++a) {
        fp.ev[A][Ap][a] = ev[A][Ap][a].v;
        fp.co[A][Ap][a] = co[A][Ap][a].v;
      }
  return fp;
}

FrameJets eval_frame_jets(const TetradFrame& f, std::span<const double> p) {
  FrameJets fj;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int a = 0; a < 4; ++a)
        fj.ev[A][Ap][a] = f.e[A][Ap][a].is_zero() ? Jet2::constant(4, 0.0)
                                                  : jet_eval(f.e[A][Ap][a], p);
  // Co-frame rows satisfy  sum_a co^{BB'}_a ev_{AA'}^a = delta; i.e. the
  // co-frame matrix is the inverse transpose of the frame matrix.
  Jet2 M[4][4], Minv[4][4];
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int a = 0; a < 4; ++a) M[a][flat_idx(A, Ap)] = fj.ev[A][Ap][a];
  invert_jet2(M, Minv, 4);
  for (int B = 0; B < 2; ++B)
    for (int Bp = 0; Bp < 2; ++Bp)
      for (int a = 0; a < 4; ++a) fj.co[B][Bp][a] = Minv[flat_idx(B, Bp)][a];
  return fj;
}

FramePoint eval_frame(const TetradFrame& f, std::span<const double> p) {
  return eval_frame_jets(f, p).pt();
}

void frame_metric(const FramePoint& fp, double G[4][4]) {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      G[a][b] = fp.co[0][0][a] * fp.co[1][1][b] + fp.co[1][1][a] * fp.co[0][0][b] -
                fp.co[0][1][a] * fp.co[1][0][b] - fp.co[1][0][a] * fp.co[0][1][b];
}

ResidualReport verify_tetrad(const MetricField& g, const TetradFrame& frame,
                             std::span<const std::vector<double>> samples,
                             double tolerance) {
  ResidualReport rep;
  rep.name = "tetrad";
  rep.tolerance = tolerance;
  for (const auto& p : samples) {
    FramePoint fp = eval_frame(frame, p);
    double Gf[4][4];
    frame_metric(fp, Gf);
    MetricPoint mp = eval_metric_point(g, p);
    double worst = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) worst = std::max(worst, std::abs(Gf[a][b] - mp.G[a][b]));
    rep.absorb(worst);
  }
  return rep;
}

NullFactor null_factorize(const double V[2][2], double tol) {
  double norm2 = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) norm2 += V[i][j] * V[i][j];
  const double det = V[0][0] * V[1][1] - V[0][1] * V[1][0];
  if (std::abs(det) > tol * std::max(norm2, 1e-30))
    throw EvalError("null_factorize: matrix is not null (det above tolerance)");
  int pi = 0, pj = 0;
  double best = -1;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (std::abs(V[i][j]) > best) best = std::abs(V[i][j]), pi = i, pj = j;
  if (best < tol) throw EvalError("null_factorize: zero matrix");
  NullFactor nf;
  nf.mu = {V[0][pj] / V[pi][pj], V[1][pj] / V[pi][pj]};
  nf.nu = {V[pi][0], V[pi][1]};
  return nf;
}

SigmaBasis sigma_basis(const TetradFrame& frame, std::span<const double> p) {
  FramePoint fp = eval_frame(frame, p);
  SigmaBasis sb;
  auto wedge = [&](const double* u, const double* v, TwoForm& out, double w) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out[a][b] += w * (u[a] * v[b] - u[b] * v[a]);
  };
  for (int Ap = 0; Ap < 2; ++Ap)
    for (int Bp = 0; Bp < 2; ++Bp) {
      sb.primed[Ap][Bp] = {};
      // Sigma^{A'B'} = 1/2 eps_{AB} e^{AA'} ^ e^{BB'}
      wedge(fp.co[0][Ap], fp.co[1][Bp], sb.primed[Ap][Bp], 0.5);
      wedge(fp.co[1][Ap], fp.co[0][Bp], sb.primed[Ap][Bp], -0.5);
    }
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) {
      sb.unprimed[A][B] = {};
      // Sigma^{AB} = 1/2 eps_{A'B'} e^{AA'} ^ e^{BB'}
      wedge(fp.co[A][0], fp.co[B][1], sb.unprimed[A][B], 0.5);
      wedge(fp.co[A][1], fp.co[B][0], sb.unprimed[A][B], -0.5);
    }
  return sb;
}

// --- Cartan solve ---------------------------------------------------------

namespace {

// Unknown layout: x = [gammaU(CC',(BD)) ; gammaP(CC',(B'D'))], each 4*3.
// gamma symmetric in its last pair, stored as (00,01,11).
int sym_idx(int B, int D) { return B + D; }  // 00->0, 01/10->1, 11->2

struct CartanSystem {
  // 24 equations (4 coframes x 6 two-form components), 24 unknowns.
  Jet1 A[24][24];
  Jet1 rhs[24];
};

// Gamma_{CC'B}^{A} from symmetric storage: raise last index with eps^{AD}.
// Gamma^0 = gamma_{B1}, Gamma^1 = -gamma_{B0}.
double raise_sign(int upper) { return upper == 0 ? 1.0 : -1.0; }
int raise_src(int upper) { return upper == 0 ? 1 : 0; }

}  // namespace

SpinConnection spin_connection(const TetradFrame& frame, std::span<const double> p) {
  FrameJets fj = eval_frame_jets(frame, p);
  const int nv = 4;

  auto J1 = [&](const Jet2& j) {
    Jet1 r;
    r.n = nv;
    r.v = j.v;
    for (int i = 0; i < nv; ++i) r.g[i] = j.g[i];
    return r;
  };
  // d(co)_ab as Jet1: value from co gradients, gradient from co Hessians.
  auto dco = [&](int A, int Ap, int a, int b) {
    Jet1 r;
    r.n = nv;
    r.v = fj.co[A][Ap][b].g[a] - fj.co[A][Ap][a].g[b];
    for (int e = 0; e < nv; ++e)
      r.g[e] = fj.co[A][Ap][b].h[e][a] - fj.co[A][Ap][a].h[e][b];
    return r;
  };

  auto sys = std::make_unique<CartanSystem>();
  for (auto& row : sys->A)
    for (auto& e : row) e = Jet1::constant(nv, 0.0);
  for (auto& e : sys->rhs) e = Jet1::constant(nv, 0.0);

  const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  int row = 0;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int pr = 0; pr < 6; ++pr, ++row) {
        const int a = pairs[pr][0], b = pairs[pr][1];
        sys->rhs[row] = dco(A, Ap, a, b);
        // e^{BA'} ^ Gamma_B^A : Gamma_B^A = Gamma_{CC'B}^A e^{CC'}
        for (int B = 0; B < 2; ++B)
          for (int C = 0; C < 2; ++C)
            for (int Cp = 0; Cp < 2; ++Cp) {
              const Jet1 w = J1(fj.co[B][Ap][a]) * J1(fj.co[C][Cp][b]) -
                             J1(fj.co[B][Ap][b]) * J1(fj.co[C][Cp][a]);
              const int col = 3 * flat_idx(C, Cp) + sym_idx(B, raise_src(A));
              sys->A[row][col] = sys->A[row][col] + raise_sign(A) * w;
            }
        // e^{AB'} ^ Gamma_{B'}^{A'}
        for (int Bp = 0; Bp < 2; ++Bp)
          for (int C = 0; C < 2; ++C)
            for (int Cp = 0; Cp < 2; ++Cp) {
              const Jet1 w = J1(fj.co[A][Bp][a]) * J1(fj.co[C][Cp][b]) -
                             J1(fj.co[A][Bp][b]) * J1(fj.co[C][Cp][a]);
              const int col = 12 + 3 * flat_idx(C, Cp) + sym_idx(Bp, raise_src(Ap));
              sys->A[row][col] = sys->A[row][col] + raise_sign(Ap) * w;
            }
      }

  // Jet1 Gaussian elimination with partial pivoting on values.
  Jet1 x[24];
  {
    auto& M = sys->A;
    auto& r = sys->rhs;
    for (int col = 0; col < 24; ++col) {
      int piv = col;
      for (int i = col + 1; i < 24; ++i)
        if (std::abs(M[i][col].v) > std::abs(M[piv][col].v)) piv = i;
      if (std::abs(M[piv][col].v) < kSingularTol)
        throw EvalError("degenerate Cartan system");
      if (piv != col) {
        for (int j = 0; j < 24; ++j) std::swap(M[piv][j], M[col][j]);
        std::swap(r[piv], r[col]);
      }
      for (int i = col + 1; i < 24; ++i) {
        const Jet1 f = M[i][col] / M[col][col];
        for (int j = col; j < 24; ++j) M[i][j] = M[i][j] - f * M[col][j];
        r[i] = r[i] - f * r[col];
      }
    }
    for (int i = 23; i >= 0; --i) {
      Jet1 s = r[i];
      for (int j = i + 1; j < 24; ++j) s = s - M[i][j] * x[j];
      x[i] = s / M[i][i];
    }
  }

  SpinConnection sc;
  auto gammaU = [&](int C, int Cp, int B, int D) { return x[3 * flat_idx(C, Cp) + sym_idx(B, D)]; };
  auto gammaP = [&](int C, int Cp, int Bp, int Dp) {
    return x[12 + 3 * flat_idx(C, Cp) + sym_idx(Bp, Dp)];
  };
  for (int C = 0; C < 2; ++C)
    for (int Cp = 0; Cp < 2; ++Cp)
      for (int B = 0; B < 2; ++B)
        for (int up = 0; up < 2; ++up) {
          sc.unprimed[C][Cp][B][up] = raise_sign(up) * gammaU(C, Cp, B, raise_src(up));
          sc.primed[C][Cp][B][up] = raise_sign(up) * gammaP(C, Cp, B, raise_src(up));
        }

  // Plug-back residual of the (pre-elimination) Cartan equations.
  {
    FrameJets fj2 = eval_frame_jets(frame, p);
    double worst = 0;
    const int pairs2[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap)
        for (int pr = 0; pr < 6; ++pr) {
          const int a = pairs2[pr][0], b = pairs2[pr][1];
          double lhs = fj2.co[A][Ap][b].g[a] - fj2.co[A][Ap][a].g[b];
          double rhs = 0;
          for (int B = 0; B < 2; ++B)
            for (int C = 0; C < 2; ++C)
              for (int Cp = 0; Cp < 2; ++Cp)
                rhs += (fj2.co[B][Ap][a].v * fj2.co[C][Cp][b].v -
                        fj2.co[B][Ap][b].v * fj2.co[C][Cp][a].v) *
                       sc.unprimed[C][Cp][B][A].v;
          for (int Bp = 0; Bp < 2; ++Bp)
            for (int C = 0; C < 2; ++C)
              for (int Cp = 0; Cp < 2; ++Cp)
                rhs += (fj2.co[A][Bp][a].v * fj2.co[C][Cp][b].v -
                        fj2.co[A][Bp][b].v * fj2.co[C][Cp][a].v) *
                       sc.primed[C][Cp][Bp][Ap].v;
          worst = std::max(worst, std::abs(lhs - rhs));
        }
    sc.cartanResidual = worst;
  }
  return sc;
}

SpinConnection spin_connection_nabla(const MetricField& g, const TetradFrame& frame,
                                     std::span<const double> p) {
  MetricJets mj = eval_metric_jets(g, p);
  ChristoffelJets cj = christoffel_jets(mj);
  FrameJets fj = eval_frame_jets(frame, p);

  // X[(AA')][(BB')][(CC')] = <e^{CC'}, nabla_{e_AA'} e_{BB'}>
  double X[2][2][2][2][2][2];
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int B = 0; B < 2; ++B)
        for (int Bp = 0; Bp < 2; ++Bp) {
          double nab[4];
          for (int c = 0; c < 4; ++c) {
            double s = 0;
            for (int a = 0; a < 4; ++a) {
              s += fj.ev[A][Ap][a].v * fj.ev[B][Bp][c].g[a];
              for (int b = 0; b < 4; ++b)
                s += fj.ev[A][Ap][a].v * cj.v[c][a][b] * fj.ev[B][Bp][b].v;
            }
            nab[c] = s;
          }
          for (int C = 0; C < 2; ++C)
            for (int Cp = 0; Cp < 2; ++Cp) {
              double s = 0;
              for (int c = 0; c < 4; ++c) s += fj.co[C][Cp][c].v * nab[c];
              X[A][Ap][B][Bp][C][Cp] = s;
            }
        }

  SpinConnection sc;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap) {
      for (int Bp = 0; Bp < 2; ++Bp)
        for (int Cp = 0; Cp < 2; ++Cp) {
          double s = 0;
          for (int B = 0; B < 2; ++B) s += X[A][Ap][B][Bp][B][Cp];
          sc.primed[A][Ap][Bp][Cp] = Jet1::constant(4, 0.5 * s);
        }
      for (int B = 0; B < 2; ++B)
        for (int C = 0; C < 2; ++C) {
          double s = 0;
          for (int Bp = 0; Bp < 2; ++Bp) s += X[A][Ap][B][Bp][C][Bp];
          sc.unprimed[A][Ap][B][C] = Jet1::constant(4, 0.5 * s);
        }
    }
  return sc;
}

// --- Lax pair -------------------------------------------------------------

double CommutatorValue::norm() const {
  double s = lam * lam;
  for (int i = 0; i < nbase; ++i) s += base[i] * base[i];
  return std::sqrt(s);
}

LaxPairValue lax_pair(const TetradFrame& frame, std::span<const double> p, double lambda) {
  FrameJets fj = eval_frame_jets(frame, p);
  SpinConnection sc = spin_connection(frame, p);
  const int nv = 4;
  auto J1 = [&](const Jet2& j) {
    Jet1 r;
    r.n = nv;
    r.v = j.v;
    for (int i = 0; i < nv; ++i) r.g[i] = j.g[i];
    return r;
  };

  LaxPairValue lp;
  for (int A = 0; A < 2; ++A) {
    LaxVec& L = (A == 0) ? lp.L0 : lp.L1;
    L.nbase = 4;
    for (int a = 0; a < 4; ++a) {
      L.base[a] = J1(fj.ev[A][0][a]) + lambda * J1(fj.ev[A][1][a]);
      L.dlam_base[a] = fj.ev[A][1][a].v;
    }
    // Horizontal directions follow parallel spinors, pi-dot = -Gamma pi, so
    // ell_A(l) = -(gamma_{A0'}(l) + l gamma_{A1'}(l)) with
    // gamma_{AA'}(l) = G_{AA'0'}^{1'} + l (G_{AA'1'}^{1'} - G_{AA'0'}^{0'}) - l^2 G_{AA'1'}^{0'}
    auto gamma = [&](int Ap, double l) {
      return sc.primed[A][Ap][0][1] +
             l * (sc.primed[A][Ap][1][1] - sc.primed[A][Ap][0][0]) -
             (l * l) * sc.primed[A][Ap][1][0];
    };
    auto dgamma = [&](int Ap, double l) {
      return (sc.primed[A][Ap][1][1].v - sc.primed[A][Ap][0][0].v) -
             2 * l * sc.primed[A][Ap][1][0].v;
    };
    L.lam = -(gamma(0, lambda) + lambda * gamma(1, lambda));
    L.dlam_lam = -(dgamma(0, lambda) + gamma(1, lambda).v + lambda * dgamma(1, lambda));
  }
  return lp;
}

CommutatorValue lax_commutator(const LaxVec& L0, const LaxVec& L1) {
  CommutatorValue cv;
  cv.nbase = L0.nbase;
  const int n = L0.nbase;
  for (int c = 0; c < n; ++c) {
    double s = 0;
    for (int a = 0; a < n; ++a)
      s += L0.base[a].v * L1.base[c].g[a] - L1.base[a].v * L0.base[c].g[a];
    s += L0.lam.v * L1.dlam_base[c] - L1.lam.v * L0.dlam_base[c];
    cv.base[c] = s;
  }
  double s = 0;
  for (int a = 0; a < n; ++a)
    s += L0.base[a].v * L1.lam.g[a] - L1.base[a].v * L0.lam.g[a];
  s += L0.lam.v * L1.dlam_lam - L1.lam.v * L0.dlam_lam;
  cv.lam = s;
  return cv;
}

std::vector<double> default_lambdas(unsigned seed) {
  std::vector<double> ls = {-2, -1, 0, 1, 2};
  for (int k = 0; k < 3; ++k)
    ls.push_back(-1.5 + 3.0 * halton(31 + 7 * seed + k, 2));
  return ls;
}

ResidualReport lax_integrability(const TetradFrame& frame,
                                 std::span<const std::vector<double>> samples,
                                 std::span<const double> lambdas,
                                 double tolerance, const std::string& name) {
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (const auto& p : samples) {
    for (double l : lambdas) {
      LaxPairValue lp = lax_pair(frame, p, l);
      CommutatorValue cv = lax_commutator(lp.L0, lp.L1);
      Eigen::MatrixXd A(5, 2);
      Eigen::VectorXd b(5);
      for (int i = 0; i < 4; ++i) {
        A(i, 0) = lp.L0.base[i].v;
        A(i, 1) = lp.L1.base[i].v;
        b(i) = cv.base[i];
      }
      A(4, 0) = lp.L0.lam.v;
      A(4, 1) = lp.L1.lam.v;
      b(4) = cv.lam;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
      if (svd.singularValues()(1) < 1e-10 * (svd.singularValues()(0) + 1e-30))
        throw EvalError("degenerate Lax span (L0 parallel to L1)");
      Eigen::VectorXd coef = svd.solve(b);
      const double res = (b - A * coef).norm();
      rep.absorb(res / (cv.norm() + 1.0));
    }
  }
  return rep;
}

LaxVec LambdaVecField::eval(std::span<const double> p, double lambda) const {
  LaxVec L;
  L.nbase = nbase;
  for (int c = 0; c <= nbase; ++c) {
    Jet1 acc = Jet1::constant(nbase, 0.0);
    double dacc = 0.0;
    for (const auto& [k, f] : comp[c]) {
      const Jet2 j = jet_eval(f, p);
      Jet1 j1;
      j1.n = nbase;
      j1.v = j.v;
      for (int i = 0; i < nbase; ++i) j1.g[i] = j.g[i];
      const double lk = std::pow(lambda, k);
      acc = acc + lk * j1;
      if (k > 0) dacc += k * std::pow(lambda, k - 1) * j.v;
    }
    if (c < nbase) {
      L.base[c] = acc;
      L.dlam_base[c] = dacc;
    } else {
      L.lam = acc;
      L.dlam_lam = dacc;
    }
  }
  return L;
}

std::pair<LambdaVecField, LambdaVecField> special_lax_pair(SpecialLaxKind kind,
                                                           const SpecialLaxData& data) {
  LambdaVecField L0, L1;
  auto one = [](int n) { return ScalarField(n, Expr::constant(1.0)); };
  switch (kind) {
    case SpecialLaxKind::Hyperhermitian: {
      // coords (p^0,p^1,w^0,w^1); e_{A0'} = d/dp^A,
      // e_{A1'} = d/dw^A - Theta^B_{p^A} d/dp^B.
      L0.nbase = L1.nbase = 4;
      const ScalarField &t0 = data.f1, &t1 = data.f2;
      L0.add(0, 0, one(4));
      L0.add(2, 1, one(4));
      L0.add(0, 1, {4, -t0.diff(0).expr});
      L0.add(1, 1, {4, -t1.diff(0).expr});
      L1.add(1, 0, one(4));
      L1.add(3, 1, one(4));
      L1.add(0, 1, {4, -t0.diff(1).expr});
      L1.add(1, 1, {4, -t1.diff(1).expr});
      break;
    }
    case SpecialLaxKind::Sfk: {
      // coords (w^0,w^1,wt^0,wt^1); L_A = d/dw^A - l M_{AB} d/dwt_B + l^2 f_{w^A} d/dl
      // with (d/dwt_0, d/dwt_1) = (-d/dwt^1, +d/dwt^0).
      L0.nbase = L1.nbase = 4;
      const ScalarField &Om = data.f1, &f = data.f2;
      auto M = [&](int A, int B) { return Om.diff(A).diff(2 + B); };
      L0.add(0, 0, one(4));
      L0.add(3, 1, {4, M(0, 0).expr});   // -l M_{A0} d/dwt_0 = +l M_{A0} d/dwt^1
      L0.add(2, 1, {4, -M(0, 1).expr});  // -l M_{A1} d/dwt_1 = -l M_{A1} d/dwt^0
      L0.add(4, 2, f.diff(0));
      L1.add(1, 0, one(4));
      L1.add(3, 1, {4, M(1, 0).expr});
      L1.add(2, 1, {4, -M(1, 1).expr});
      L1.add(4, 2, f.diff(1));
      break;
    }
    case SpecialLaxKind::NullKahler: {
      // coords (w,z,x,y); f = Theta_wx + Theta_zy + Theta_xx Theta_yy - Theta_xy^2.
      L0.nbase = L1.nbase = 4;
      const ScalarField& th = data.f1;
      const ScalarField txx = th.diff(2).diff(2), tyy = th.diff(3).diff(3),
                        txy = th.diff(2).diff(3);
      ScalarField f{4, th.diff(0).diff(2).expr + th.diff(1).diff(3).expr +
                           txx.expr * tyy.expr - txy.expr * txy.expr};
      L0.add(0, 0, one(4));
      L0.add(3, 0, {4, -txy.expr});
      L0.add(2, 0, tyy);
      L0.add(3, 1, {4, Expr::constant(-1.0)});
      L0.add(4, 0, f.diff(3));
      L1.add(1, 0, one(4));
      L1.add(3, 0, txx);
      L1.add(2, 0, {4, -txy.expr});
      L1.add(2, 1, one(4));
      L1.add(4, 0, f.diff(2));
      break;
    }
    case SpecialLaxKind::Interpolating: {
      // coords (x,y,t);
      // L0 = d/dt + (c w + b u - l c u - l^2) d/dx + b (w_x - l u_x) d/dl
      // L1 = d/dy - (c u + l) d/dx - b u_x d/dl
      L0.nbase = L1.nbase = 3;
      const ScalarField &u = data.f1, &w = data.f2;
      const double b = data.b, c = data.c;
      L0.add(2, 0, one(3));
      L0.add(0, 0, {3, Expr::constant(c) * w.expr + Expr::constant(b) * u.expr});
      L0.add(0, 1, {3, Expr::constant(-c) * u.expr});
      L0.add(0, 2, {3, Expr::constant(-1.0)});
      L0.add(3, 0, {3, Expr::constant(b) * w.diff(0).expr});
      L0.add(3, 1, {3, Expr::constant(-b) * u.diff(0).expr});
      L1.add(1, 0, one(3));
      L1.add(0, 0, {3, Expr::constant(-c) * u.expr});
      L1.add(0, 1, {3, Expr::constant(-1.0)});
      L1.add(3, 0, {3, Expr::constant(-b) * u.diff(0).expr});
      break;
    }
  }
  return {L0, L1};
}

ResidualReport special_lax_check(SpecialLaxKind kind, const SpecialLaxData& data,
                                 std::span<const std::vector<double>> samples,
                                 std::span<const double> lambdas,
                                 double tolerance, const std::string& name) {
  auto [F0, F1] = special_lax_pair(kind, data);
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (const auto& p : samples)
    for (double l : lambdas) {
      LaxVec L0 = F0.eval(p, l);
      LaxVec L1 = F1.eval(p, l);
      CommutatorValue cv = lax_commutator(L0, L1);
      double scale = 1.0;
      for (int i = 0; i < L0.nbase; ++i)
        scale = std::max({scale, std::abs(L0.base[i].v), std::abs(L1.base[i].v)});
      double worst = std::abs(cv.lam);
      for (int i = 0; i < cv.nbase; ++i) worst = std::max(worst, std::abs(cv.base[i]));
      rep.absorb(worst / scale);
    }
  return rep;
}

double volume_lie_coefficient(const LaxVec& L, const Jet1& rho) {
  double s = 0;
  for (int a = 0; a < L.nbase; ++a)
    s += rho.g[a] * L.base[a].v + rho.v * L.base[a].g[a];
  return s;
}

TetradFrame rotate_primed(const TetradFrame& f, const double L[2][2]) {
  TetradFrame out = f;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int a = 0; a < 4; ++a) {
        Expr e = Expr::constant(0.0);
        for (int Bp = 0; Bp < 2; ++Bp)
          if (!f.e[A][Bp][a].is_zero()) e = e + Expr::constant(L[Bp][Ap]) * f.e[A][Bp][a].expr;
        out.e[A][Ap][a] = ScalarField(4, e);
      }
  return out;
}

TetradFrame rotate_unprimed(const TetradFrame& f, const double L[2][2]) {
  TetradFrame out = f;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int a = 0; a < 4; ++a) {
        Expr e = Expr::constant(0.0);
        for (int B = 0; B < 2; ++B)
          if (!f.e[B][Ap][a].is_zero()) e = e + Expr::constant(L[B][A]) * f.e[B][Ap][a].expr;
        out.e[A][Ap][a] = ScalarField(4, e);
      }
  return out;
}

}  // namespace nsasd
