#pragma once
// Exact exit distributions for centered squares, used to fast-forward random
// walks far from the absorbing set. One discrete-sine Poisson solve per
// half-width; sampling is inverse-CDF in lexicographic site order.

#include <cstdint>
#include <vector>

#include "hatlab/lattice.hpp"
#include "hatlab/rng.hpp"

namespace hatlab {

struct ExitTable {
  int half_width = 0;          // h: exit on the L-inf sphere of radius h
  std::vector<Site> sites;     // boundary sites with positive mass, sorted
  std::vector<double> cdf;     // inclusive prefix sums, back() == 1
};

// Cached table for half-width h (power of two up to 1024 is what callers
// use, but any h in [1, 2048] works).
const ExitTable& exit_table(int h);

// Offset from the square's center to the exit site.
Site sample_exit(const ExitTable& t, Rng& rng);

struct WalkOptions {
  bool accelerate = true;   // jump via exit tables when far from the set
  int max_half_width = 1024;
  long long max_steps = 1'000'000'000;  // unit steps plus jumps
};

struct WalkResult {
  Site hit;        // first site of the absorbing set entered
  Site previous;   // position one unit step before absorption
  long long steps = 0;
  long long reinjections = 0;
  bool exhausted = false;  // budget ran out (hit/previous meaningless)
};

// Run from `start` until absorption in `absorbing`, fast-forwarding with
// square exits while the set is at L-inf distance >= 2. If the walk leaves
// the disk of radius r_max it is reinjected uniformly on the circle of
// radius r_max/2 (harmonic measure from far away is uniform within ~2%).
WalkResult walk_to_set(const Config& absorbing, const Site& start, double r_max,
                       Rng& rng, const WalkOptions& opts = {});

}  // namespace hatlab
