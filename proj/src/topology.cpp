#include "nsasd/topology.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>

namespace nsasd {

std::string verdict_name(PlaneFieldVerdict v) {
  switch (v) {
    case PlaneFieldVerdict::Admits: return "admits";
    case PlaneFieldVerdict::Rejects: return "rejects";
    case PlaneFieldVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

long det_integer(std::vector<std::vector<long>> m) {
  // fraction-free Bareiss elimination
  const int n = static_cast<int>(m.size());
  if (n == 0) return 1;
  long prev = 1;
  long sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k] == 0) {
      int piv = -1;
      for (int i = k + 1; i < n; ++i)
        if (m[i][k] != 0) {
          piv = i;
          break;
        }
      if (piv < 0) return 0;
      std::swap(m[k], m[piv]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

int eigen_signature(const std::vector<std::vector<int>>& form) {
  const int n = static_cast<int>(form.size());
  if (n == 0) return 0;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = form[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  int s = 0;
  for (int i = 0; i < n; ++i) s += es.eigenvalues()[i] > 0 ? 1 : -1;
  return s;
}

// connected blocks of the form under the nonzero-offdiagonal relation
std::vector<std::vector<int>> block_indices(const std::vector<std::vector<int>>& form) {
  const int n = static_cast<int>(form.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int a) {
    return parent[a] == a ? a : parent[a] = find(parent[a]);
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (form[i][j] != 0) parent[find(i)] = find(j);
  std::vector<std::vector<int>> blocks;
  for (int i = 0; i < n; ++i)
    if (find(i) == i) {
      std::vector<int> blk;
      for (int j = 0; j < n; ++j)
        if (find(j) == i) blk.push_back(j);
      blocks.push_back(std::move(blk));
    }
  return blocks;
}

// value set of one block at the given radius
std::set<long> block_values(const std::vector<std::vector<int>>& form,
                            const std::vector<int>& blk, int radius) {
  const int d = static_cast<int>(blk.size());
  std::set<long> vals;
  std::vector<int> w(d, -radius);
  for (;;) {
    long q = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        q += static_cast<long>(w[i]) * form[blk[i]][blk[j]] * w[j];
    vals.insert(q);
    int pos = 0;
    while (pos < d && ++w[pos] > radius) w[pos++] = -radius;
    if (pos == d) break;
  }
  return vals;
}

}  // namespace

bool validate_topology(const FourManifoldTopology& t, std::string* why) {
  const int n = static_cast<int>(t.intersectionForm.size());
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(t.intersectionForm[i].size()) != n) {
      if (why) *why = "intersection form is not square";
      return false;
    }
    for (int j = 0; j < n; ++j)
      if (t.intersectionForm[i][j] != t.intersectionForm[j][i]) {
        if (why) *why = "intersection form is not symmetric";
        return false;
      }
  }
  std::vector<std::vector<long>> m(n, std::vector<long>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = t.intersectionForm[i][j];
  if (std::labs(det_integer(m)) != 1) {
    if (why) *why = "intersection form is not unimodular";
    return false;
  }
  if (eigen_signature(t.intersectionForm) != t.signature) {
    if (why) *why = "tau does not equal the signature of the form";
    return false;
  }
  return true;
}

bool represents(const std::vector<std::vector<int>>& form, long value, int radius) {
  const auto blocks = block_indices(form);
  if (blocks.empty()) return value == 0;
  std::vector<std::set<long>> sets;
  long maxAbs = 0;
  for (const auto& blk : blocks) {
    sets.push_back(block_values(form, blk, radius));
    long m = 0;
    for (long v : sets.back()) m = std::max(m, std::labs(v));
    maxAbs += m;
  }
  std::set<long> acc = {0};
  long remaining = maxAbs;
  for (const auto& s : sets) {
    long blockMax = 0;
    for (long v : s) blockMax = std::max(blockMax, std::labs(v));
    remaining -= blockMax;
    std::set<long> next;
    for (long a : acc)
      for (long b : s) {
        const long t2 = a + b;
        // prune partial sums that cannot reach the target anymore
        if (std::labs(t2 - value) <= remaining) next.insert(t2);
      }
    acc = std::move(next);
    if (acc.empty()) return false;
  }
  return acc.count(value) > 0;
}

PlaneFieldVerdict hirzebruch_hopf_check(const FourManifoldTopology& t, int searchRadius) {
  if (searchRadius < 1) throw std::invalid_argument("searchRadius must be >= 1");
  {
    std::vector<std::vector<long>> m(t.intersectionForm.size(),
                                     std::vector<long>(t.intersectionForm.size()));
    for (size_t i = 0; i < m.size(); ++i)
      for (size_t j = 0; j < m.size(); ++j) m[i][j] = t.intersectionForm[i][j];
    if (!m.empty() && std::labs(det_integer(m)) != 1)
      throw std::invalid_argument("intersection form must be unimodular");
  }
  const long targets[2] = {3L * t.signature + 2L * t.euler,
                           3L * t.signature - 2L * t.euler};
  const int n = static_cast<int>(t.intersectionForm.size());

  bool evenForm = true;
  for (int i = 0; i < n; ++i)
    if (t.intersectionForm[i][i] % 2 != 0) evenForm = false;
  int definite = 0;  // +1 positive, -1 negative, 0 indefinite
  if (n > 0) {
    const int sig = eigen_signature(t.intersectionForm);
    if (sig == n) definite = 1;
    if (sig == -n) definite = -1;
  }

  bool allFound = true;
  for (long v : targets) {
    // decidable negative certificates
    if (n == 0 && v != 0) return PlaneFieldVerdict::Rejects;
    if (evenForm && (v % 2 != 0)) return PlaneFieldVerdict::Rejects;
    if (definite == 1 && v < 0) return PlaneFieldVerdict::Rejects;
    if (definite == -1 && v > 0) return PlaneFieldVerdict::Rejects;
    if (!represents(t.intersectionForm, v, searchRadius)) allFound = false;
  }
  return allFound ? PlaneFieldVerdict::Admits : PlaneFieldVerdict::Inconclusive;
}

bool atiyah_check(int chi, int tau) {
  auto mod = [](int a, int m) { return ((a % m) + m) % m; };
  return mod(chi, 2) == 0 && mod(chi - tau, 4) == 0;
}

namespace {

std::vector<std::vector<int>> hyperbolic_blocks(int copies) {
  const int n = 2 * copies;
  std::vector<std::vector<int>> f(n, std::vector<int>(n, 0));
  for (int k = 0; k < copies; ++k) {
    f[2 * k][2 * k + 1] = 1;
    f[2 * k + 1][2 * k] = 1;
  }
  return f;
}

std::vector<std::vector<int>> k3_form() {
  // E8 Cartan matrix (branch node attached to the fifth chain node)
  const int E8[8][8] = {
      {2, -1, 0, 0, 0, 0, 0, 0},  {-1, 2, -1, 0, 0, 0, 0, 0},
      {0, -1, 2, -1, 0, 0, 0, 0}, {0, 0, -1, 2, -1, 0, 0, 0},
      {0, 0, 0, -1, 2, -1, 0, -1}, {0, 0, 0, 0, -1, 2, -1, 0},
      {0, 0, 0, 0, 0, -1, 2, 0},  {0, 0, 0, 0, -1, 0, 0, 2}};
  std::vector<std::vector<int>> f(22, std::vector<int>(22, 0));
  for (int blk = 0; blk < 2; ++blk)
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) f[8 * blk + i][8 * blk + j] = -E8[i][j];
  for (int k = 0; k < 3; ++k) {
    const int at = 16 + 2 * k;
    f[at][at + 1] = 1;
    f[at + 1][at] = 1;
  }
  return f;
}

}  // namespace

const std::vector<FourManifoldTopology>& manifold_catalogue() {
  static const std::vector<FourManifoldTopology> cat = [] {
    std::vector<FourManifoldTopology> v;
    v.push_back({"S4", 2, 0, {}, true});
    v.push_back({"S2xS2", 4, 0, hyperbolic_blocks(1), true});
    v.push_back({"CP2", 3, 1, {{1}}, true});
    v.push_back({"K3", 24, -16, k3_form(), true});
    v.push_back({"T4", 0, 0, hyperbolic_blocks(3), true});
    return v;
  }();
  return cat;
}

const FourManifoldTopology* find_manifold(const std::string& name) {
  for (const auto& t : manifold_catalogue())
    if (t.name == name) return &t;
  return nullptr;
}

}  // namespace nsasd
