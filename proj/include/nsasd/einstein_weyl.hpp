#pragma once

// Three-dimensional Lorentzian Einstein-Weyl structures, the generalised
// monopole equation, the Jones-Tod lift/reduction, and the integrable-system
// families (Toda, dKP, hyper-CR, interpolating).

#include <iosfwd>
#include <map>

#include "nsasd/geometry.hpp"

namespace nsasd {

// Weighted pair (h, omega): the Weyl connection D is determined by
// Dh = omega x h.
struct EWStructure {
  MetricField h;  // dim 3, signature (2,1)
  std::array<ScalarField, 3> omega;
  double orientation3 = 1.0;  // epsilon sign in the (x,y,t) chart order
};

struct MonopoleData {
  ScalarField V;
  std::array<ScalarField, 3> eta;
};

EWStructure ew_flat();
EWStructure ew_toda_tod();  // Tod's Toda solution e^u = 4(1-t^2)/(1+x^2+y^2)^2
EWStructure ew_dkp();       // u = -x/t
EWStructure ew_hypercr();   // u = x, w = exp(y)
const std::vector<std::pair<std::string, std::function<EWStructure()>>>& ew_registry();

// conformal gauge change h -> phi^2 h, omega -> omega + 2 dln(phi)
EWStructure gauge_transform(const EWStructure& ew, const Expr& phi);

// Christoffel symbols of the Weyl connection, with first derivatives:
// Gamma(D) = Gamma(h) - 1/2 (delta omega + delta omega - h omega#).
ChristoffelJets weyl_connection_jets(const EWStructure& ew, std::span<const double> p);

// |D h - omega x h| (construction self-test).
double weyl_compat_residual(const EWStructure& ew, std::span<const double> p);

// Ricci of D; not symmetric in general.
void weyl_ricci(const EWStructure& ew, std::span<const double> p, double W[3][3]);

// |W_(ij) - 1/3 W h_ij| at p, and the report over samples.
double ew_pointwise(const EWStructure& ew, std::span<const double> p);
double ew_skew_part(const EWStructure& ew, std::span<const double> p);  // |W_[ij]|
ResidualReport ew_residual(const EWStructure& ew,
                           std::span<const std::vector<double>> samples,
                           double tolerance = 1e-9, const std::string& name = "ew");

using TwoForm3 = std::array<std::array<double, 3>, 3>;

// B = *_h (dV + 1/2 omega V).
TwoForm3 monopole_flux(const EWStructure& ew, const ScalarField& V,
                       std::span<const double> p);
// componentwise |B - d eta|.
double monopole_pointwise(const EWStructure& ew, const MonopoleData& m,
                          std::span<const double> p);
ResidualReport monopole_residual(const EWStructure& ew, const MonopoleData& m,
                                 std::span<const std::vector<double>> samples,
                                 double tolerance = 1e-8,
                                 const std::string& name = "monopole");
// |dB| at p; nonzero flags an inconsistent (ew, V) input.
double flux_closure_residual(const EWStructure& ew, const ScalarField& V,
                             std::span<const double> p);

// Potential of the closed flux 2-form by axis-ordered line integration from
// the lower box corner; gauge eta_x = 0.
std::array<double, 3> reconstruct_eta(const EWStructure& ew, const ScalarField& V,
                                      std::span<const double> p, double quadTol = 1e-10);

// g = V^2 h - (dphi + eta)^2 on the chart (x,y,t,phi).
MetricField jones_tod_lift(const EWStructure& ew, const MonopoleData& m);

// Reduction by the non-null Killing vector d/dphi (the last coordinate);
// requires phi-independent components. h is sign-normalized to (2,1).
struct ReducedEW {
  EWStructure ew;
  bool flippedSign = false;
};
ReducedEW jones_tod_reduce(const MetricField& g4);

// max |Gamma(D1) - Gamma(D2)|: zero iff the two structures are conformal
// gauges of the same Weyl connection.
double weyl_connection_distance(const EWStructure& a, const EWStructure& b,
                                std::span<const double> p);

enum class IntegrableKind { Toda, Dkp, HyperCr, Interpolating };

// The named dispersionless PDE residual(s). Toda takes u only; dkp takes u
// alone (scalar form (u_t - u u_x)_x = u_yy) or the pair (u,w) in the
// first-order form that the interpolating system degenerates to at (b,c)=(1,0).
std::vector<ScalarField> integrable_residual_fields(IntegrableKind kind,
                                                    const ScalarField& u,
                                                    const ScalarField& w, double b,
                                                    double c);
ResidualReport integrable_residual(IntegrableKind kind, const ScalarField& u,
                                   const ScalarField& w, double b, double c,
                                   std::span<const std::vector<double>> samples,
                                   double tolerance = 1e-10,
                                   const std::string& name = "integrable");

// --- structured-grid linear solver -----------------------------------------

struct GridSpec {
  Box box;  // dim 3
  int n = 16;
  double spacing(int axis) const { return (box.hi[axis] - box.lo[axis]) / (n - 1); }
  std::vector<double> node(int i, int j, int k) const {
    return {box.lo[0] + i * spacing(0), box.lo[1] + j * spacing(1),
            box.lo[2] + k * spacing(2)};
  }
};

struct GridSolution {
  GridSpec grid;
  std::vector<double> values;  // (i*n + j)*n + k
  double solveResidual = 0.0;
  double at(int i, int j, int k) const {
    return values[(static_cast<size_t>(i) * grid.n + j) * grid.n + k];
  }
};

// Solves div(sqrt|h| h^{ab} (d_b V + 1/2 omega_b V)) = 0 with Dirichlet data on
// all faces. Sparse direct solve for small grids, ILU-BiCGSTAB above that.
GridSolution monopole_solve_linear(
    const EWStructure& ew, const GridSpec& grid,
    const std::function<double(std::span<const double>)>& dirichlet);

// Solves W_yy - W_xt + (H_x W_x)_x = 0 (the dKP monopole in potential form).
GridSolution dkp_linear_solve(
    const ScalarField& H, const GridSpec& grid,
    const std::function<double(std::span<const double>)>& dirichlet);

void export_grid_csv(const GridSolution& sol, std::ostream& os);

// --- projective structures ---------------------------------------------------

struct ProjectiveStructure2D {
  std::array<ScalarField, 4> A;  // A0..A3, functions of (x,y)
};

struct GeodesicPoint {
  double x, y, yp;
};

// Adaptive RK integration of y'' = A3 y'^3 + A2 y'^2 + A1 y' + A0.
std::vector<GeodesicPoint> projective_geodesic(const ProjectiveStructure2D& ps,
                                               double x0, double y0, double yp0,
                                               double x1, double tol = 1e-10);

}  // namespace nsasd
