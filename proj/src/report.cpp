#include "nsasd/report.hpp"

#include <cstdio>

namespace nsasd {

std::string ResidualReport::json_line() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"name\":\"%s\",\"maxAbs\":%.12g,\"tolerance\":%.12g,\"verdict\":\"%s\"}",
                name.c_str(), maxAbs, tolerance, verdict().c_str());
  return buf;
}

ResidualReport sweep_report(const std::string& name, double tolerance,
                            std::span<const std::vector<double>> samples,
                            const std::function<double(std::span<const double>)>& residual) {
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (const auto& p : samples) rep.absorb(residual(p));
  return rep;
}

double halton(unsigned index, unsigned base) {
  double f = 1.0, r = 0.0;
  unsigned i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

std::vector<std::vector<double>> sample_box(
    const Box& box, int count, unsigned seed,
    const std::function<bool(std::span<const double>)>& excluded) {
  static constexpr unsigned bases[kMaxVars] = {2, 3, 5, 7, 11};
  const int d = box.dim();
  std::vector<std::vector<double>> out;
  out.reserve(count);
  unsigned index = 17 + seed * 7919;  // deterministic offset per seed
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard < 100000) {
    std::vector<double> p(d);
    for (int i = 0; i < d; ++i)
      p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * halton(index, bases[i]);
    ++index;
    ++guard;
    if (excluded && excluded(p)) continue;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace nsasd
