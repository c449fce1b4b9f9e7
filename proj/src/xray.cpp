#include "nsasd/xray.hpp"

#include <cmath>

namespace nsasd {

namespace {

// 15-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr int kGauss = 15;
constexpr double kNodes[kGauss] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601700, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601700,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kWeights[kGauss] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gauss_panel(const std::function<double(double)>& f, double a, double b) {
  const double m = 0.5 * (a + b), hw = 0.5 * (b - a);
  double s = 0;
  for (int i = 0; i < kGauss; ++i) s += kWeights[i] * f(m + hw * kNodes[i]);
  return hw * s;
}

// Adaptive bisection: a panel is accepted when refining it changes the value
// below the local tolerance share.
double adapt(const std::function<double(double)>& f, double a, double b, double whole,
             double tol, int depth, int maxDepth, double& err) {
  const double m = 0.5 * (a + b);
  const double left = gauss_panel(f, a, m), right = gauss_panel(f, m, b);
  const double delta = left + right - whole;
  if (std::abs(delta) <= tol || depth >= maxDepth) {
    if (depth >= maxDepth && std::abs(delta) > tol)
      throw EvalError("john_transform: requested tolerance unreachable at depth cap");
    err += std::abs(delta);
    return left + right;
  }
  return adapt(f, a, m, left, tol / 2, depth + 1, maxDepth, err) +
         adapt(f, m, b, right, tol / 2, depth + 1, maxDepth, err);
}

}  // namespace

QuadResult john_transform(const Integrand3D& f, const LineParam& L, const QuadSpec& quad) {
  if (quad.cutoff < f.decayRadius)
    throw EvalError("john_transform: cutoff below the declared decay radius");
  auto integrand = [&](double s) {
    const std::vector<double> p = {L.x * s + L.z, L.y * s - L.w, s};
    return field_value(f.f, p);
  };
  QuadResult out;
  const double whole = gauss_panel(integrand, -quad.cutoff, quad.cutoff);
  out.value = adapt(integrand, -quad.cutoff, quad.cutoff, whole, quad.tol, 0,
                    quad.maxDepth, out.errorEstimate);
  // analytic tail bound outside the declared decay radius
  out.errorEstimate += 2.0 * f.tailBound * quad.cutoff;
  return out;
}

ResidualReport uhwave_residual(const std::function<double(const LineParam&)>& psi,
                               std::span<const LineParam> samples, double h,
                               double tolerance, const std::string& name) {
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  auto cross = [&](const LineParam& L, int ai, int bi, double step) {
    auto at = [&](double da, double db) {
      LineParam q = L;
      double* f1 = ai == 0 ? &q.x : (ai == 1 ? &q.y : (ai == 2 ? &q.w : &q.z));
      double* f2 = bi == 0 ? &q.x : (bi == 1 ? &q.y : (bi == 2 ? &q.w : &q.z));
      *f1 += da;
      *f2 += db;
      return psi(q);
    };
    return (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) /
           (4 * step * step);
  };
  for (const auto& L : samples) {
    // psi_xw + psi_yz with Richardson steps {h, h/2}
    const double d1 = cross(L, 0, 2, h) + cross(L, 1, 3, h);
    const double d2 = cross(L, 0, 2, h / 2) + cross(L, 1, 3, h / 2);
    rep.absorb((4 * d2 - d1) / 3);
  }
  return rep;
}

ResidualReport uhwave_residual(const Integrand3D& f, std::span<const LineParam> samples,
                               double h, const QuadSpec& quad, double tolerance) {
  return uhwave_residual(
      [&](const LineParam& L) { return john_transform(f, L, quad).value; }, samples, h,
      tolerance);
}

std::vector<LineParam> sample_lines(int count, double range, unsigned seed) {
  std::vector<LineParam> out;
  unsigned index = 23 + 101 * seed;
  for (int i = 0; i < count; ++i, ++index) {
    LineParam L;
    L.x = range * (2 * halton(index, 2) - 1);
    L.y = range * (2 * halton(index, 3) - 1);
    L.w = range * (2 * halton(index, 5) - 1);
    L.z = range * (2 * halton(index, 7) - 1);
    out.push_back(L);
  }
  return out;
}

}  // namespace nsasd
