#pragma once
// The theta recursion and its inverse, exponential clustering, cluster
// tracking across chain steps, collapse times, and the multi-scale collapse
// harness.

#include <cstdint>
#include <vector>

#include "hatlab/hat.hpp"
#include "hatlab/lattice.hpp"

namespace hatlab {

// theta_0 = r, theta_m = theta_{m-1} + exp(theta_{m-1}); kept in linear form
// while exp stays representable, then as a natural log, then saturated. A
// saturated value exceeds any representable distance.
struct ThetaValue {
  double linear = 0;
  double log_form = 0;
  bool log_valid = false;
  bool saturated = false;

  double to_double() const;      // +inf when not representable
  bool value_gt(double d) const;  // theta > d
  bool value_ge(double d) const;  // theta >= d
};

ThetaValue theta(int m, double r);

// Inverse of r -> theta(n, r) by bisection to 1e-9 relative tolerance.
double phi(int n, double d);

struct Cluster {
  Config sites;       // A^i = A ∩ D*
  Site center;        // x_i
  ThetaValue radius;  // theta^(i) >= r
};

struct Clustering {
  std::vector<Cluster> clusters;
  double parameter = 0;  // r
};

// Constructive clustering: per point, the first empty theta-annulus bounds
// its disk D*; membership sets are totally ordered by inclusion and maximal
// disks become clusters. Verifies the partition and the separation
// dist(A^i, A^j) > exp(max radius) before returning.
Clustering exponential_clustering(const Config& A, double r);

struct CollapseRecord {
  std::vector<long long> thresholds;  // collapse times T_l, nondecreasing
  std::vector<double> rho;            // least cluster separation at T_{l-1}
  std::vector<double> expiry;         // (log rho)^2 - 4 log(rho + T_{l-1}) - T_{l-1}
  bool overlap = false;               // tracked clusters ever intersected
  int flag = 0;                       // 1 when a collapse budget was exhausted
  long long total = 0;                // accumulated T
  long long recluster_events = 0;     // k = 1 fallbacks with halved r
};

// Advance per-cluster membership by U_t^i = U_t ∩ (U_{t-1}^i ∪ bd U_{t-1}^i)
// along a trajectory recorded with every state (thin = 1).
CollapseRecord track_clusters(const Trajectory& traj, const Clustering& c0);

// Multi-scale collapse loop: cluster at r = phi(n, diam), simulate up to
// ceil((log diam)^(1 + 7 delta)) steps waiting for k-1 collapses, repeat
// while diam > threshold; flag = 1 when a budget runs out.
CollapseRecord algorithm1(const Config& U, double threshold, double exponent_delta,
                          const PotentialTable& table, Rng& rng);

}  // namespace hatlab
