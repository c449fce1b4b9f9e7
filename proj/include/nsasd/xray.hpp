#pragma once

// The John transform of decaying functions on R^3 and verification that its
// range satisfies the ultrahyperbolic wave equation psi_xw + psi_yz = 0.

#include "nsasd/report.hpp"

namespace nsasd {

// Oriented line s -> (x s + z, y s - w, s); excludes lines perpendicular to
// the third axis by construction.
struct LineParam {
  double x = 0, y = 0, w = 0, z = 0;
};

struct Integrand3D {
  ScalarField f;          // arity 3
  double decayRadius = 6; // |f| <= tailBound outside this ball
  double tailBound = 1e-12;
};

struct QuadSpec {
  double tol = 1e-10;
  double cutoff = 8.0;
  int maxDepth = 20;
};

struct QuadResult {
  double value = 0;
  double errorEstimate = 0;
};

// Adaptive Gauss quadrature of f along the line over s in [-cutoff, cutoff].
QuadResult john_transform(const Integrand3D& f, const LineParam& L,
                          const QuadSpec& quad = {});

// Central-difference estimate of psi_xw + psi_yz in the line parameters,
// Richardson-extrapolated with steps {h, h/2}.
ResidualReport uhwave_residual(const std::function<double(const LineParam&)>& psi,
                               std::span<const LineParam> samples, double h,
                               double tolerance = 1e-4,
                               const std::string& name = "uhwave");

// Convenience wrapper evaluating the transform at each stencil point.
ResidualReport uhwave_residual(const Integrand3D& f, std::span<const LineParam> samples,
                               double h, const QuadSpec& quad = {},
                               double tolerance = 1e-4);

std::vector<LineParam> sample_lines(int count, double range, unsigned seed);

}  // namespace nsasd
