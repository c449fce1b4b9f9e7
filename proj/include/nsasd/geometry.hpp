#pragma once

// Metric fields, Levi-Civita curvature, Hodge-star on 2-forms, SD/ASD Weyl
// splitting, ASD residuals and Petrov-Penrose classification.

#include <complex>
#include <functional>

#include "nsasd/jets.hpp"
#include "nsasd/report.hpp"

namespace nsasd {

struct TetradFrame;  // spinor module

// Value plus exact first derivatives; the bookkeeping carrier for quantities
// assembled from metric/frame jets whose own second derivatives are not needed.
struct Jet1 {
  int n = 0;
  double v = 0.0;
  std::array<double, kMaxVars> g{};

  static Jet1 constant(int n, double c) { return {n, c, {}}; }
};

Jet1 operator+(const Jet1& a, const Jet1& b);
Jet1 operator-(const Jet1& a, const Jet1& b);
Jet1 operator-(const Jet1& a);
Jet1 operator*(const Jet1& a, const Jet1& b);
Jet1 operator/(const Jet1& a, const Jet1& b);
Jet1 operator*(double c, const Jet1& a);

// Smooth map from an n-dim chart (n = 3 or 4) to a symmetric matrix field.
struct MetricField {
  int dim = 4;
  std::array<std::array<ScalarField, 4>, 4> comp{};  // symmetric
  int sigPlus = 2, sigMinus = 2;
  Box box;
  std::function<bool(std::span<const double>)> excluded;
  double orientation = 1.0;  // sign of eps_{0...n-1} in this chart order

  const ScalarField& at(int a, int b) const { return comp[a][b]; }
  void set(int a, int b, ScalarField f) {
    comp[a][b] = f;
    if (a != b) comp[b][a] = std::move(f);
  }
  // Adds c * dx^a dx^b in line-element notation (off-diagonal terms split).
  void add_ds2(int a, int b, const Expr& c);
};

// Pointwise metric data.
struct MetricPoint {
  int n = 4;
  double G[4][4] = {};
  double Ginv[4][4] = {};
  double det = 0.0;
  double sqrtAbsDet = 0.0;
};

struct MetricJets {
  int n = 4;
  Jet2 comp[4][4];
  MetricPoint pt() const;
};

MetricJets eval_metric_jets(const MetricField& m, std::span<const double> p);
MetricPoint eval_metric_point(const MetricField& m, std::span<const double> p);
bool signature_matches(const MetricField& m, std::span<const double> p);

// Christoffel symbols with exact first derivatives: v[a][b][c] = Gamma^a_bc,
// d[e][a][b][c] = partial_e Gamma^a_bc.
struct ChristoffelJets {
  int n = 4;
  double v[4][4][4] = {};
  double d[4][4][4][4] = {};
};

ChristoffelJets christoffel_jets(const MetricJets& mj);

// Curvature of a (possibly non-metric) connection with the convention
// R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db
//         - Gamma^a_de Gamma^e_cb,  Ricci R_bd = R^a_bad.
void riemann_from_connection(const ChristoffelJets& cj, int n, double R[4][4][4][4]);

struct CurvaturePack {
  int n = 4;
  MetricPoint mp;
  ChristoffelJets christoffel;
  double riemannUp[4][4][4][4] = {};   // R^a_bcd
  double riemann[4][4][4][4] = {};     // R_abcd
  double ricci[4][4] = {};
  double scalar = 0.0;
  double weyl[4][4][4][4] = {};        // C_abcd (4D only)
};

CurvaturePack curvature_pack(const MetricField& g, std::span<const double> p);

using TwoForm = std::array<std::array<double, 4>, 4>;  // antisymmetric, lower indices

// Hodge star on 2-forms for a 4D metric; an involution in neutral signature.
TwoForm hodge_star2(const MetricPoint& mp, double orientation, const TwoForm& F);
TwoForm hodge_star2(const MetricField& g, std::span<const double> p, const TwoForm& F);

// Splits the Weyl tensor into +1/-1 eigenspaces of the star.
struct WeylSplit {
  double plus[4][4][4][4] = {};
  double minus[4][4][4][4] = {};
};
WeylSplit weyl_split(const MetricField& g, std::span<const double> p);
WeylSplit split_weyl_tensor(const MetricPoint& mp, double orientation,
                            const double C[4][4][4][4]);

double frob4(const double T[4][4][4][4], int n = 4);

// max over samples of |C_plus| / (|C| + 1).
ResidualReport asd_residual(const MetricField& g,
                            std::span<const std::vector<double>> samples,
                            double tolerance = 1e-8, const std::string& name = "asd");

// Trace-free Ricci and scalar measured separately.
struct RicciVerdict {
  double maxTracefree = 0.0;
  double maxScalar = 0.0;
};
RicciVerdict ricci_flatness(const MetricField& g, std::span<const std::vector<double>> samples);
double scalar_flatness(const MetricField& g, std::span<const std::vector<double>> samples);

enum class PetrovType { I, II, D, III, N, O };
std::string petrov_name(PetrovType t);

struct WeylQuartic {
  std::array<double, 5> coeffs{};  // c[k] multiplies x^k
  std::vector<std::complex<double>> roots;
  std::vector<int> multiplicities;  // cluster sizes, root at infinity included
  PetrovType petrovType = PetrovType::O;
  bool allRootsReal = true;
};

// Classification from quartic coefficients alone.
WeylQuartic classify_quartic(const std::array<double, 5>& coeffs, double tol = 1e-6);

// Full pipeline: ASD Weyl spinor in the frame's dyad, then root clustering.
WeylQuartic petrov_classify(const MetricField& g, const TetradFrame& frame,
                            std::span<const double> p);

// Symmetric spinor components C_(ABCD) of the ASD Weyl tensor in a dyad.
std::array<double, 5> asd_weyl_spinor(const MetricField& g, const TetradFrame& frame,
                                      std::span<const double> p);

}  // namespace nsasd
