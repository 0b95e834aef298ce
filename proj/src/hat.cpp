#include "hatlab/hat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace hatlab {

namespace {

const Site kNb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

size_t sample_cdf(const std::vector<double>& prob, double total, Rng& rng) {
  double u = rng.uniform() * total, acc = 0;
  for (size_t i = 0; i < prob.size(); ++i) {
    acc += prob[i];
    if (u < acc) return i;
  }
  return prob.size() - 1;
}

}  // namespace

namespace {

// Exactness checks assume exact kernel lookups; when any pairwise distance
// leaves the table's exact disk the tail approximation contributes up to
// lambda/R0^2 per lookup, so the tolerance must widen accordingly.
double seam_tol(const Config& U, const PotentialTable& table, double base) {
  const auto& z = U.sites();
  const int64_t R0 = table.exact_radius();
  for (size_t i = 0; i < z.size(); ++i)
    for (size_t j = i + 1; j < z.size(); ++j)
      if (linf(z[i] - z[j]) > R0 - 2)
        return base + 32.0 * double(z.size()) * table.lambda_bound() /
                          double(R0 * R0);
  return base;
}

}  // namespace

TransportRow transport_distribution(const Config& U, const Site& x,
                                    const PotentialTable& table) {
  if (U.n() < 2) throw std::invalid_argument("transport_distribution: |U| < 2");
  if (!U.contains(x)) throw std::invalid_argument("transport_distribution: x not in U");
  Config W = U.without(x);

  TransportRow row;
  row.from = x;
  row.to = boundaries(W).exterior;  // already sorted
  row.prob.resize(row.to.size());

  for (size_t c = 0; c < row.to.size(); ++c) {
    const Site y = row.to[c];
    Config B = W.with(y);
    const auto& zb = B.sites();
    std::vector<double> data(zb.size(), 0.0);
    data[size_t(std::lower_bound(zb.begin(), zb.end(), y) - zb.begin())] = 1.0;
    BoundaryFit fit = solve_boundary(B, data, table);

    double p = (y == x) ? 1.0 : fit(B, x, table);
    int ky = 0;
    double ret = 0;  // P_y(first step avoids W, then back to y before W)
    for (const auto& d : kNb) {
      Site u = y + d;
      if (W.contains(u))
        ++ky;
      else
        ret += fit(B, u, table);
    }
    double denom = 1.0 - 0.25 * ret;
    if (!(denom > 1e-12))
      throw std::runtime_error("transport_distribution: degenerate excursion weight");
    row.prob[c] = p * (0.25 * ky) / denom;
  }

  double sum = 0;
  for (double p : row.prob) {
    if (p < -1e-10) throw std::runtime_error("transport_distribution: negative probability");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > seam_tol(U, table, 1e-8))
    throw std::runtime_error("transport_distribution: row sums to " + std::to_string(sum));
  return row;
}

TransitionKernel transition_kernel(const Config& U, const PotentialTable& table) {
  if (U.n() < 2) throw std::invalid_argument("transition_kernel: |U| < 2");
  std::vector<double> alpha = harmonic_measure(U, table, true);
  const auto& z = U.sites();

  std::vector<Site> exposed = exposed_sites(U);
  std::sort(exposed.begin(), exposed.end());
  std::unordered_set<uint64_t> eset;
  for (const auto& s : exposed) eset.insert(site_key(s));

  double mass = 0;
  TransitionKernel k;
  k.state = U;
  for (size_t i = 0; i < z.size(); ++i) {
    if (!eset.count(site_key(z[i]))) {
      if (alpha[i] > 1e-9)
        throw std::runtime_error("transition_kernel: mass on a non-exposed site");
      continue;
    }
    TransportRow row = transport_distribution(U, z[i], table);
    row.activation = std::max(alpha[i], 0.0);
    mass += row.activation;
    k.rows.push_back(std::move(row));
  }
  if (std::fabs(mass - 1.0) > seam_tol(U, table, 1e-8))
    throw std::runtime_error("transition_kernel: activation sums to " + std::to_string(mass));
  for (auto& row : k.rows) row.activation /= mass;
  return k;
}

namespace {

StepResult apply_kernel(const Config& U, const TransitionKernel& k, Rng& rng,
                        int inv_d, const Site& unshift) {
  // Sample in the kernel's frame, then map back through the dihedral
  // symmetry: our site = dihedral(inv_d, kernel site + unshift).
  std::vector<double> act(k.rows.size());
  for (size_t i = 0; i < act.size(); ++i) act[i] = k.rows[i].activation;
  const TransportRow& row = k.rows[sample_cdf(act, 1.0, rng)];
  const Site y = row.to[sample_cdf(row.prob, 1.0, rng)];

  StepResult r;
  r.activated = apply_dihedral(inv_d, row.from + unshift);
  r.deposited = apply_dihedral(inv_d, y + unshift);
  r.next = U.without(r.activated).with(r.deposited);
  if (r.next.n() != U.n()) throw std::logic_error("step: particle count changed");
  return r;
}

}  // namespace

StepResult step(const Config& U, const PotentialTable& table, Rng& rng) {
  TransitionKernel k = transition_kernel(U, table);
  return apply_kernel(U, k, rng, 0, kOrigin);
}

const TransitionKernel* KernelCache::find(uint64_t hash, const Config& rep) const {
  auto it = map_.find(hash);
  if (it == map_.end()) return nullptr;
  for (const auto& k : it->second)
    if (k->state == rep) return k.get();
  return nullptr;
}

const TransitionKernel* KernelCache::insert(TransitionKernel k, uint64_t hash) {
  auto& bucket = map_[hash];
  bucket.push_back(std::make_unique<TransitionKernel>(std::move(k)));
  ++count_;
  return bucket.back().get();
}

StepResult step_cached(const Config& U, const PotentialTable& table, Rng& rng,
                       KernelCache& cache) {
  CanonicalClass cls = canonicalize(U);
  // representative = dihedral(d, U) shifted by its min corner; invert that.
  Site m{INT64_MAX, INT64_MAX};
  for (const auto& s : U.sites()) {
    Site t = apply_dihedral(cls.dihedral_index, s);
    m.x = std::min(m.x, t.x);
    m.y = std::min(m.y, t.y);
  }
  const int inv = inverse_dihedral(cls.dihedral_index);

  const TransitionKernel* k = cache.find(cls.hash, cls.representative);
  if (k) return apply_kernel(U, *k, rng, inv, m);
  TransitionKernel fresh = transition_kernel(cls.representative, table);
  if (cache.size() < (size_t(1) << 20)) k = cache.insert(std::move(fresh), cls.hash);
  return apply_kernel(U, k ? *k : fresh, rng, inv, m);
}

Trajectory run(const Config& initial, long long steps, const PotentialTable& table,
               uint64_t seed, const RunOptions& opts) {
  if (initial.n() < 2) throw std::invalid_argument("run: |U0| < 2");
  Rng rng(seed);
  KernelCache cache;

  Trajectory traj;
  traj.seed = seed;
  traj.initial = initial;
  traj.thin = opts.thin;
  traj.diameters.reserve(size_t(steps));
  traj.com.reserve(size_t(steps));
  traj.class_hashes.reserve(size_t(steps));

  const double n = double(initial.n());
  auto center = [&](const Config& U) {
    double mx = 0, my = 0;
    for (const auto& s : U.sites()) {
      mx += double(s.x);
      my += double(s.y);
    }
    return std::array<double, 2>{mx / n, my / n};
  };

  Config V = initial;
  double prev_diam = diameter(V);
  std::array<double, 2> prev_com = center(V);
  for (long long t = 1; t <= steps; ++t) {
    StepResult sr = step_cached(V, table, rng, cache);
    V = std::move(sr.next);

    double d = diameter(V);
    std::array<double, 2> c = center(V);
    if (d > prev_diam + 1 + 1e-9)
      throw std::logic_error("run: diameter increased by more than 1");
    double dc = std::hypot(c[0] - prev_com[0], c[1] - prev_com[1]);
    if (dc > (prev_diam + 1) / n + 1 + 1e-9)
      throw std::logic_error("run: center-of-mass increment out of bound");

    traj.diameters.push_back(d);
    traj.com.push_back(c);
    traj.class_hashes.push_back(canonicalize(V).hash);
    traj.events.push_back({t, sr.activated, sr.deposited});
    if (opts.record_states && t % opts.thin == 0) traj.states.push_back(V);
    prev_diam = d;
    prev_com = c;
  }
  return traj;
}

Site mc_transport(const Config& U, const Site& x, Rng& rng, const WalkOptions& opts,
                  double r_max_factor) {
  if (!U.contains(x) || U.n() < 2) throw std::invalid_argument("mc_transport: bad input");
  Config W = U.without(x);
  double radius = 1;
  for (const auto& s : U.sites()) radius = std::max(radius, norm(s));
  WalkResult res = walk_to_set(W, x, r_max_factor * radius, rng, opts);
  if (res.exhausted) throw std::runtime_error("mc_transport: step budget exhausted");
  return res.previous;
}

RenewalReport renewal_analysis(const Trajectory& traj, int n) {
  const uint64_t target = canonicalize(make_line(n)).hash;
  std::vector<size_t> hits;
  for (size_t t = 0; t < traj.class_hashes.size(); ++t)
    if (traj.class_hashes[t] == target) hits.push_back(t);
  if (hits.size() < 31)
    throw std::runtime_error("renewal_analysis: fewer than 30 returns (" +
                             std::to_string(hits.size()) + " visits)");

  RenewalReport rep;
  const size_t m = hits.size() - 1;
  rep.return_times.reserve(m);
  rep.increments.reserve(m);
  for (size_t i = 0; i < m; ++i) {
    rep.return_times.push_back(int64_t(hits[i + 1]) - int64_t(hits[i]));
    const auto &a = traj.com[hits[i]], &b = traj.com[hits[i + 1]];
    rep.increments.push_back({b[0] - a[0], b[1] - a[1]});
  }

  double sx = 0, sy = 0, st = 0;
  for (size_t i = 0; i < m; ++i) {
    sx += rep.increments[i][0];
    sy += rep.increments[i][1];
    st += double(rep.return_times[i]);
  }
  rep.increment_mean = {sx / double(m), sy / double(m)};
  rep.mean_tau = st / double(m);

  double cxx = 0, cyy = 0, cxy = 0;
  for (size_t i = 0; i < m; ++i) {
    double dx = rep.increments[i][0] - rep.increment_mean[0];
    double dy = rep.increments[i][1] - rep.increment_mean[1];
    cxx += dx * dx;
    cyy += dy * dy;
    cxy += dx * dy;
  }
  double denom = double(m - 1);
  rep.covariance = {{{cxx / denom, cxy / denom}, {cxy / denom, cyy / denom}}};
  rep.nu2 = (rep.covariance[0][0] + rep.covariance[1][1]) / 2;
  rep.chi2 = rep.nu2 / rep.mean_tau;
  rep.kac = double(hits.size()) / double(traj.class_hashes.size()) * rep.mean_tau;
  return rep;
}

}  // namespace hatlab
