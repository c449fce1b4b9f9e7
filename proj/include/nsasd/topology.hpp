#pragma once

// Arithmetic admissibility checks for the existence of (oriented) 2-plane
// fields, hence neutral metrics, on compact 4-manifolds.

#include <string>
#include <vector>

namespace nsasd {

struct FourManifoldTopology {
  std::string name;
  int euler = 0;      // chi
  int signature = 0;  // tau
  std::vector<std::vector<int>> intersectionForm;  // symmetric unimodular
  bool oriented = true;
};

// symmetric, |det| = 1, tau equals the eigenvalue signature
bool validate_topology(const FourManifoldTopology& t, std::string* why = nullptr);

enum class PlaneFieldVerdict { Admits, Rejects, Inconclusive };
std::string verdict_name(PlaneFieldVerdict v);

// Tests 3 tau +- 2 chi against {mu(w,w) : |w|_inf <= searchRadius}. Membership
// is semi-decided by enumeration; parity/definiteness certificates supply the
// decidable negative cases.
PlaneFieldVerdict hirzebruch_hopf_check(const FourManifoldTopology& t, int searchRadius);

// chi even and chi = tau (mod 4): existence of an oriented 2-plane field.
bool atiyah_check(int chi, int tau);

// Representability helper exposed for the property tests.
bool represents(const std::vector<std::vector<int>>& form, long value, int radius);

const std::vector<FourManifoldTopology>& manifold_catalogue();
const FourManifoldTopology* find_manifold(const std::string& name);

}  // namespace nsasd
