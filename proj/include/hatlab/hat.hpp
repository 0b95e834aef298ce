#pragma once
// The harmonic activation and transport chain: exact one-step kernel, exact
// sampler, Monte Carlo transport backend, trajectories, renewal analysis.

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hatlab/harmonic.hpp"
#include "hatlab/lattice.hpp"
#include "hatlab/potential.hpp"
#include "hatlab/rng.hpp"
#include "hatlab/squares.hpp"

namespace hatlab {

struct TransportRow {
  Site from;                   // activated site x
  double activation = 0;       // H_U(x)
  std::vector<Site> to;        // candidates in boundary(U \ {x}), sorted
  std::vector<double> prob;    // sums to 1 within 1e-8
};

struct TransitionKernel {
  Config state;
  std::vector<TransportRow> rows;  // one per exposed site, sorted by `from`
};

// Law of S_{tau - 1} for the walk from x absorbed on W = U \ {x}, via the
// excursion decomposition p(y) * s(y): reach y before W, then leave for W
// directly after a geometric number of returns.
TransportRow transport_distribution(const Config& U, const Site& x,
                                    const PotentialTable& table);

TransitionKernel transition_kernel(const Config& U, const PotentialTable& table);

struct StepResult {
  Config next;
  Site activated, deposited;
};

StepResult step(const Config& U, const PotentialTable& table, Rng& rng);

// Kernel cache keyed by canonical class; one entry per representative.
class KernelCache {
 public:
  explicit KernelCache(size_t cap = size_t(1) << 20) : cap_(cap) {}
  const TransitionKernel* find(uint64_t hash, const Config& rep) const;
  const TransitionKernel* insert(TransitionKernel k, uint64_t hash);
  size_t size() const { return count_; }

 private:
  size_t cap_, count_ = 0;
  std::unordered_map<uint64_t, std::vector<std::unique_ptr<TransitionKernel>>> map_;
};

// step() through the cache: the kernel is solved once per canonical class
// and mapped through the dihedral symmetry back to U's frame.
StepResult step_cached(const Config& U, const PotentialTable& table, Rng& rng,
                       KernelCache& cache);

struct Event {
  long long t;
  Site activated, deposited;
};

struct RunOptions {
  bool record_states = false;
  long long thin = 1;  // record every thin-th state when record_states
};

struct Trajectory {
  uint64_t seed = 0;
  Config initial;
  std::vector<double> diameters;                 // after each step
  std::vector<std::array<double, 2>> com;        // after each step
  std::vector<uint64_t> class_hashes;            // after each step
  std::vector<Event> events;
  std::vector<Config> states;                    // optional, thinned
  long long thin = 1;
};

Trajectory run(const Config& initial, long long steps, const PotentialTable& table,
               uint64_t seed, const RunOptions& opts = {});

// One Monte Carlo transport sample (landing site S_{tau-1}) by accelerated
// walk; r_max = r_max_factor * configuration radius.
Site mc_transport(const Config& U, const Site& x, Rng& rng,
                  const WalkOptions& opts = {}, double r_max_factor = 65536);

struct RenewalReport {
  std::vector<long long> return_times;              // tau_{i+1} - tau_i
  std::vector<std::array<double, 2>> increments;    // com over each cycle
  std::array<double, 2> increment_mean{0, 0};
  std::array<std::array<double, 2>, 2> covariance{{{0, 0}, {0, 0}}};
  double nu2 = 0;       // average of the covariance diagonal
  double mean_tau = 0;  // E[tau_1]
  double chi2 = 0;      // nu2 / mean_tau
  double kac = 0;       // class frequency times mean return time
};

RenewalReport renewal_analysis(const Trajectory& traj, int n);

}  // namespace hatlab
