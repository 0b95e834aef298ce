#pragma once
// Potential kernel a(x) of simple random walk on Z^2: exact table on a disk
// plus the asymptotic tail (2/pi) log|x| + kappa with certified error.

#include <cstdint>
#include <string>
#include <vector>

#include "hatlab/lattice.hpp"
#include "hatlab/rng.hpp"

namespace hatlab {

class PotentialTable {
 public:
  // Exact values on {x : max(|x1|,|x2|) <= R0} via the diagonal closed form
  // a(k,k) = (4/pi) sum_{j<=k} 1/(2j-1) and harmonic fill, computed in MPFR
  // (the double-precision recurrence diverges like (3+2*sqrt(2))^x).
  static PotentialTable build(int R0);

  int exact_radius() const { return R0_; }
  double kappa() const { return kappa_; }
  double lambda_bound() const { return lambda_; }

  // Exact inside the table; (2/pi) log|x| + kappa outside, with absolute
  // error at most lambda_bound()/|x|^2.
  double operator()(const Site& x) const;

  // Octant accessor used by tests; requires 0 <= y <= x <= R0.
  double octant(int64_t x, int64_t y) const;

  void save(const std::string& path) const;   // binary cache with header
  static PotentialTable load(const std::string& path);

 private:
  int R0_ = 0;
  double kappa_ = 0;
  double lambda_ = 0;
  std::vector<double> vals_;  // octant, index x(x+1)/2 + y
};

double kernel_prime(double r);  // (2/pi) log r + kappa
double kappa_constant();        // (2*gamma + 3 log 2)/pi
inline constexpr double kLambdaBound = 0.06882;

struct AuditItem {
  std::string name;
  bool pass = true;
  double worst_margin = 0;  // min over samples of (slack); >= 0 means pass
  long samples = 0;
};

// Checks classical potential-kernel inequalities (monotonicity, global log
// bounds, offset/comparability/perturbation bounds, and the circle-average
// estimate) on pseudo-random admissible inputs. Failures are reported, not
// thrown.
std::vector<AuditItem> audit_kernel_bounds(const PotentialTable& table,
                                           long samples, uint64_t rng_seed);

}  // namespace hatlab
