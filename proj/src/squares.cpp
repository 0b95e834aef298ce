#include "hatlab/squares.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hatlab {

namespace {

// Expected-visit (Green) solve on the open square of half-width h: with
// z = N/4 for N the visit counts from the center, (4I - A) z = e_center,
// diagonalized by the type-I discrete sine transform. The exit probability
// at a boundary site is the sum of z over its interior neighbors; corners
// carry no mass.
ExitTable build_table(int h) {
  ExitTable t;
  t.half_width = h;
  if (h == 1) {
    t.sites = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
    t.cdf = {0.25, 0.5, 0.75, 1.0};
    return t;
  }

  const int N = 2 * h - 1;  // interior sites per axis, indices 1..N map to
                            // coordinates -(h-1)..(h-1)
  std::vector<double> grid(size_t(N) * N, 0.0);
  grid[size_t(h - 1) * N + (h - 1)] = 1.0;  // delta at the center

  fftw_plan plan = fftw_plan_r2r_2d(N, N, grid.data(), grid.data(), FFTW_RODFT00,
                                    FFTW_RODFT00, FFTW_ESTIMATE);
  fftw_execute(plan);
  const double pi = std::numbers::pi;
  std::vector<double> lam(size_t(N) + 1);
  for (int p = 1; p <= N; ++p) lam[size_t(p)] = 2 - 2 * std::cos(pi * p / (2 * h));
  for (int p = 1; p <= N; ++p)
    for (int q = 1; q <= N; ++q)
      grid[size_t(p - 1) * N + (q - 1)] /= lam[size_t(p)] + lam[size_t(q)];
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double scale = 1.0 / (16.0 * h * h);  // 1/(2(N+1)) per axis, twice
  auto z = [&](int64_t x, int64_t y) {
    return grid[size_t(x + h - 1) * N + size_t(y + h - 1)] * scale;
  };

  std::map<Site, double> mass;
  for (int64_t j = -(h - 1); j <= h - 1; ++j) {
    mass[{h, j}] = z(h - 1, j);
    mass[{-h, j}] = z(-(h - 1), j);
    mass[{j, h}] = z(j, h - 1);
    mass[{j, -h}] = z(j, -(h - 1));
  }
  double total = 0;
  for (const auto& [s, p] : mass) total += p;
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::runtime_error("exit table mass " + std::to_string(total));
  double acc = 0;
  for (const auto& [s, p] : mass) {  // std::map: lexicographic by Site
    acc += p / total;
    t.sites.push_back(s);
    t.cdf.push_back(acc);
  }
  t.cdf.back() = 1.0;
  return t;
}

std::mutex g_mutex;
std::map<int, std::unique_ptr<ExitTable>> g_tables;

}  // namespace

const ExitTable& exit_table(int h) {
  if (h < 1 || h > 2048) throw std::invalid_argument("exit_table: h out of range");
  std::lock_guard<std::mutex> lock(g_mutex);
  auto& slot = g_tables[h];
  if (!slot) slot = std::make_unique<ExitTable>(build_table(h));
  return *slot;
}

Site sample_exit(const ExitTable& t, Rng& rng) {
  double u = rng.uniform();
  size_t i = size_t(std::lower_bound(t.cdf.begin(), t.cdf.end(), u) - t.cdf.begin());
  if (i >= t.sites.size()) i = t.sites.size() - 1;
  return t.sites[i];
}

WalkResult walk_to_set(const Config& absorbing, const Site& start, double r_max,
                       Rng& rng, const WalkOptions& opts) {
  if (absorbing.empty()) throw std::invalid_argument("walk_to_set: empty set");
  if (absorbing.contains(start))
    throw std::invalid_argument("walk_to_set: start inside the set");
  const auto& zs = absorbing.sites();
  const Site nb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

  auto linf_dist = [&](const Site& s) {
    int64_t best = INT64_MAX;
    for (const auto& a : zs) best = std::min(best, linf(s - a));
    return best;
  };

  WalkResult res;
  Site pos = start, prev = start;
  for (; res.steps < opts.max_steps; ++res.steps) {
    int64_t rho = linf_dist(pos);
    if (opts.accelerate && rho >= 2) {
      int h = 1;
      int64_t cap = std::min<int64_t>(rho - 1, opts.max_half_width);
      while (2 * h <= cap) h *= 2;
      pos = pos + sample_exit(exit_table(h), rng);
    } else {
      prev = pos;
      pos = pos + nb[rng.below(4)];
      if (absorbing.contains(pos)) {
        res.hit = pos;
        res.previous = prev;
        return res;
      }
    }
    if (norm(pos) > r_max) {
      double th = 2 * std::numbers::pi * rng.uniform();
      pos = {int64_t(std::llround(r_max / 2 * std::cos(th))),
             int64_t(std::llround(r_max / 2 * std::sin(th)))};
      ++res.reinjections;
    }
  }
  res.exhausted = true;
  return res;
}

}  // namespace hatlab
