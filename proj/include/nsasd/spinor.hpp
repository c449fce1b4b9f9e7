#pragma once

// Two-component spinor algebra: tetrad <-> metric dictionary, spin connection
// from the Cartan equations, the Penrose Lax pair with horizontal lift, and
// numeric integrability tests. Conventions: eps_{01} = eps_{0'1'} = 1,
// mu_A = mu^B eps_{BA}, mu^A = eps^{AB} mu_B.

#include <optional>

#include "nsasd/geometry.hpp"

namespace nsasd {

// Four vector fields e_{AA'} on a 4-chart, plus optional volume-form density
// and Lax potentials f_A.
struct TetradFrame {
  std::array<ScalarField, 4> e[2][2];  // e[A][A'][component a]
  std::optional<ScalarField> volumeDensity;   // nu = rho dx^0^dx^1^dx^2^dx^3
  std::array<std::optional<ScalarField>, 2> laxPotentials;

  static TetradFrame from_vectors(
      std::array<std::array<std::array<Expr, 4>, 2>, 2> comps);
};

struct FramePoint {
  double ev[2][2][4] = {};  // frame vectors e_{AA'}^a
  double co[2][2][4] = {};  // dual co-frame e^{AA'}_a
};

struct FrameJets {
  Jet2 ev[2][2][4];
  Jet2 co[2][2][4];
  FramePoint pt() const;
};

FramePoint eval_frame(const TetradFrame& f, std::span<const double> p);
FrameJets eval_frame_jets(const TetradFrame& f, std::span<const double> p);

// Metric reconstructed from the co-frame by
// g_ab = e^{00'}_a e^{11'}_b + e^{11'}_a e^{00'}_b - e^{01'}_a e^{10'}_b - e^{10'}_a e^{01'}_b.
void frame_metric(const FramePoint& fp, double G[4][4]);

// maxAbs of the componentwise difference between the reconstructed metric and g.
ResidualReport verify_tetrad(const MetricField& g, const TetradFrame& frame,
                             std::span<const std::vector<double>> samples,
                             double tolerance = 1e-9);

// Rank-1 factorization V^{AA'} = mu^A nu^{A'} of a null 2x2 matrix,
// normalization fixed by the largest-entry pivot.
struct NullFactor {
  std::array<double, 2> mu, nu;
};
NullFactor null_factorize(const double V[2][2], double tol = 1e-10);

// Basis of SD (primed) and ASD (unprimed) 2-forms built from the co-frame.
struct SigmaBasis {
  TwoForm primed[2][2];    // Sigma^{A'B'}, self-dual
  TwoForm unprimed[2][2];  // Sigma^{AB},  anti-self-dual
};
SigmaBasis sigma_basis(const TetradFrame& frame, std::span<const double> p);

// Spin connection coefficients with exact first derivatives.
// primed[A][A'][B'][C'] = Gamma_{AA'B'}^{C'}; unprimed analogous.
struct SpinConnection {
  Jet1 primed[2][2][2][2];
  Jet1 unprimed[2][2][2][2];
  double cartanResidual = 0.0;
};

// Solves the Cartan structure equations
//   d e^{AA'} = e^{BA'} ^ Gamma_B^A + e^{AB'} ^ Gamma_{B'}^{A'}
// as a square linear system in Jet1 arithmetic; the plug-back residual is a
// consistency check.
SpinConnection spin_connection(const TetradFrame& frame, std::span<const double> p);

// Independent route used as a cross-check: project nabla_{AA'} e_{BB'} onto
// the frame and trace out the unprimed/primed parts.
SpinConnection spin_connection_nabla(const MetricField& g, const TetradFrame& frame,
                                     std::span<const double> p);

// One member L_A of a lifted Lax pair at fixed lambda: 4 base components and
// one d/dlambda component, each with exact chart-gradients, plus analytic
// lambda-derivatives of all components.
struct LaxVec {
  Jet1 base[4];
  Jet1 lam;
  double dlam_base[4] = {};
  double dlam_lam = 0.0;
  int nbase = 4;
};

struct LaxPairValue {
  LaxVec L0, L1;
};

// L_A = e_{A0'} + lambda e_{A1'} + ell_A(lambda) d/dlambda with the
// horizontal-lift component assembled from Gamma_{AA'B'}^{C'}.
LaxPairValue lax_pair(const TetradFrame& frame, std::span<const double> p, double lambda);

// Commutator [L0, L1] over the chart x lambda.
struct CommutatorValue {
  double base[4] = {};
  double lam = 0.0;
  int nbase = 4;
  double norm() const;
};
CommutatorValue lax_commutator(const LaxVec& L0, const LaxVec& L1);

// Least-squares projection of [L0,L1] onto span{L0,L1}; residual normalized
// by commutator norm + 1. Verdict must agree with asd_residual on the metric.
ResidualReport lax_integrability(const TetradFrame& frame,
                                 std::span<const std::vector<double>> samples,
                                 std::span<const double> lambdas,
                                 double tolerance = 1e-8,
                                 const std::string& name = "lax");

std::vector<double> default_lambdas(unsigned seed = 0);

// Vector field over chart x lambda with polynomial lambda-dependence:
// comp c is sum_k lambda^k * field_{c,k}.
struct LambdaVecField {
  int nbase = 4;
  std::vector<std::pair<int, ScalarField>> comp[5];  // index 4 (or nbase) = d/dlambda
  void add(int c, int power, ScalarField f) { comp[c].push_back({power, std::move(f)}); }
  LaxVec eval(std::span<const double> p, double lambda) const;
};

enum class SpecialLaxKind { Hyperhermitian, Sfk, NullKahler, Interpolating };

struct SpecialLaxData {
  // hyperhermitian: theta0, theta1 over (p^0,p^1,w^0,w^1)
  // sfk:            omega, f over (w^0,w^1,wt^0,wt^1)
  // nullkahler:     theta over (w,z,x,y)
  // interpolating:  u, w over (x,y,t) with constants b, c
  ScalarField f1, f2;
  double b = 0.0, c = 0.0;
};

// Builds the special Lax pair for the given kind.
std::pair<LambdaVecField, LambdaVecField> special_lax_pair(SpecialLaxKind kind,
                                                           const SpecialLaxData& data);

// Full commutator norm (these pairs commute exactly on solutions).
ResidualReport special_lax_check(SpecialLaxKind kind, const SpecialLaxData& data,
                                 std::span<const std::vector<double>> samples,
                                 std::span<const double> lambdas,
                                 double tolerance = 1e-8,
                                 const std::string& name = "special-lax");

// Coefficient of L_{L} nu on dx^0^...^dx^{n-1} for nu = rho dx^0^...^dx^{n-1}.
double volume_lie_coefficient(const LaxVec& L, const Jet1& rho);

// Frame transformed by a constant primed SL(2) rotation e_{AA'} -> L^{B'}_{A'} e_{AB'}.
TetradFrame rotate_primed(const TetradFrame& f, const double L[2][2]);
// Unprimed rotation e_{AA'} -> L^B_A e_{BA'}.
TetradFrame rotate_unprimed(const TetradFrame& f, const double L[2][2]);

}  // namespace nsasd
