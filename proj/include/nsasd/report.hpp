#pragma once

// Residual reports and deterministic low-discrepancy sampling.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nsasd/jets.hpp"

namespace nsasd {

struct ResidualReport {
  std::string name;
  int samplePoints = 0;
  double maxAbs = 0.0;
  double meanAbs = 0.0;
  double tolerance = 0.0;

  bool pass() const { return maxAbs <= tolerance; }
  std::string verdict() const { return pass() ? "pass" : "fail"; }
  // One JSON object per line: {"name":..., "maxAbs":..., "tolerance":..., "verdict":...}
  std::string json_line() const;

  void absorb(double r) {
    const double a = r < 0 ? -r : r;
    if (a > maxAbs) maxAbs = a;
    meanAbs = (meanAbs * samplePoints + a) / (samplePoints + 1);
    ++samplePoints;
  }
};

// Accumulates many scalar residual values into a report.
ResidualReport sweep_report(const std::string& name, double tolerance,
                            std::span<const std::vector<double>> samples,
                            const std::function<double(std::span<const double>)>& residual);

// Deterministic Halton points in a box, rejecting excluded points. The seed
// offsets the sequence so distinct seeds give distinct but reproducible sets.
std::vector<std::vector<double>> sample_box(
    const Box& box, int count, unsigned seed,
    const std::function<bool(std::span<const double>)>& excluded = nullptr);

double halton(unsigned index, unsigned base);

}  // namespace nsasd
