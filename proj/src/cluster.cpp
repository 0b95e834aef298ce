#include "hatlab/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Site kNb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

ThetaValue advance(const ThetaValue& v) {
  ThetaValue n = v;
  if (v.saturated) return n;
  if (!v.log_valid) {
    if (v.linear <= 709.0) {
      n.linear = v.linear + std::exp(v.linear);
    } else {
      // log(theta + e^theta) = theta + log1p(theta e^-theta) ~= theta
      n.log_valid = true;
      n.log_form = v.linear + std::log1p(v.linear * std::exp(-v.linear));
    }
    return n;
  }
  if (v.log_form <= 709.0) {
    n.log_form = std::exp(v.log_form);  // log theta_next ~= theta
  } else {
    n.saturated = true;
  }
  return n;
}

}  // namespace

double ThetaValue::to_double() const {
  if (saturated) return kInf;
  if (log_valid) return log_form <= 709.0 ? std::exp(log_form) : kInf;
  return linear;
}

bool ThetaValue::value_gt(double d) const {
  if (saturated) return true;
  if (log_valid) return d <= 0 || log_form > std::log(d);
  return linear > d;
}

bool ThetaValue::value_ge(double d) const {
  if (saturated) return true;
  if (log_valid) return d <= 0 || log_form >= std::log(d);
  return linear >= d;
}

ThetaValue theta(int m, double r) {
  if (m < 0 || m > 64) throw std::invalid_argument("theta: m out of [0, 64]");
  if (!(r >= 0)) throw std::invalid_argument("theta: r must be >= 0");
  ThetaValue v;
  v.linear = r;
  for (int i = 0; i < m; ++i) v = advance(v);
  return v;
}

double phi(int n, double d) {
  if (!(d > 0)) throw std::invalid_argument("phi: d must be positive");
  if (theta(n, 0).value_gt(d)) throw std::invalid_argument("phi: d below theta_n(0)");
  double lo = 0, hi = d;  // theta_n(r) >= r, so the root is <= d
  while (hi - lo > 1e-9 * std::max(1.0, lo)) {
    double mid = 0.5 * (lo + hi);
    if (theta(n, mid).value_gt(d))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Clustering exponential_clustering(const Config& A, double r) {
  if (A.empty()) throw std::invalid_argument("exponential_clustering: empty set");
  if (!(r >= 0)) throw std::invalid_argument("exponential_clustering: r must be >= 0");
  const auto& z = A.sites();
  const size_t n = z.size();

  std::vector<ThetaValue> th(n + 1);
  for (size_t m = 0; m <= n; ++m) th[m] = theta(int(m), r);

  // Pairwise distances; m_i = first m whose annulus (theta_{m-1}, theta_m]
  // around z_i holds no other point. Pigeonhole gives m_i <= n.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = norm(z[i] - z[j]);

  std::vector<ThetaValue> rad(n);
  for (size_t i = 0; i < n; ++i) {
    size_t m = 0;
    for (m = 1; m <= n; ++m) {
      bool occupied = false;
      for (size_t j = 0; j < n && !occupied; ++j)
        if (j != i && !th[m - 1].value_ge(dist[i][j]) && th[m].value_ge(dist[i][j]))
          occupied = true;
      if (!occupied) break;
    }
    if (m > n) throw std::logic_error("exponential_clustering: no empty annulus");
    rad[i] = th[m - 1];
  }

  // Membership bitmaps of D*_i ∩ A.
  std::vector<std::vector<bool>> inter(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inter[i][j] = rad[i].value_ge(dist[i][j]);

  auto subset = [&](size_t a, size_t b) {
    for (size_t j = 0; j < n; ++j)
      if (inter[a][j] && !inter[b][j]) return false;
    return true;
  };

  // For each point, the disks containing it are totally ordered by inclusion
  // of their intersections with A; keep the greatest one.
  std::vector<size_t> chosen;
  for (size_t i = 0; i < n; ++i) {
    size_t best = n;
    for (size_t c = 0; c < n; ++c) {
      if (!inter[c][i]) continue;
      if (best == n || subset(best, c)) best = c;
    }
    if (best == n) throw std::logic_error("exponential_clustering: uncontained point");
    for (size_t c = 0; c < n; ++c)
      if (inter[c][i] && !subset(c, best))
        throw std::logic_error("exponential_clustering: incomparable memberships");
    chosen.push_back(best);
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  // Distinct selected disks with identical intersections are one cluster.
  std::vector<size_t> reps;
  for (size_t c : chosen) {
    bool dup = false;
    for (size_t r2 : reps) dup = dup || inter[c] == inter[r2];
    if (!dup) reps.push_back(c);
  }

  Clustering out;
  out.parameter = r;
  std::vector<int> owner(n, -1);
  for (size_t c : reps) {
    Cluster cl;
    cl.center = z[c];
    cl.radius = rad[c];
    std::vector<Site> members;
    for (size_t j = 0; j < n; ++j)
      if (inter[c][j]) {
        if (owner[j] != -1) throw std::logic_error("exponential_clustering: not a partition");
        owner[j] = int(out.clusters.size());
        members.push_back(z[j]);
      }
    cl.sites = Config(std::move(members));
    out.clusters.push_back(std::move(cl));
  }
  for (size_t j = 0; j < n; ++j)
    if (owner[j] == -1) throw std::logic_error("exponential_clustering: uncovered point");

  // Separation check: dist(A^i, A^j) > exp(max radius).
  for (size_t a = 0; a < out.clusters.size(); ++a)
    for (size_t b = a + 1; b < out.clusters.size(); ++b) {
      double d = kInf;
      for (const auto& p : out.clusters[a].sites.sites())
        for (const auto& q : out.clusters[b].sites.sites()) d = std::min(d, norm(p - q));
      const ThetaValue& ra = out.clusters[a].radius;
      const ThetaValue& rb = out.clusters[b].radius;
      bool ok = !ra.saturated && !ra.log_valid && !rb.saturated && !rb.log_valid &&
                std::max(ra.linear, rb.linear) < std::log(d);
      if (!ok) throw std::logic_error("exponential_clustering: separation violated");
    }
  return out;
}

namespace {

// One tracking step of U^i -> U ∩ (U^i ∪ bd U^i). Returns whether any site
// was claimed by more than one cluster.
bool advance_tracking(std::vector<Config>& track, const Config& U) {
  std::vector<int> claims(U.n(), 0);
  const auto& us = U.sites();
  for (auto& part : track) {
    if (part.empty()) continue;
    std::vector<Site> next;
    for (size_t s = 0; s < us.size(); ++s) {
      bool keep = part.contains(us[s]);
      for (int d = 0; d < 4 && !keep; ++d) keep = part.contains(us[s] + kNb[d]);
      if (keep) {
        next.push_back(us[s]);
        ++claims[s];
      }
    }
    part = Config(std::move(next));
  }
  for (int c : claims)
    if (c > 1) return true;
  return false;
}

double separation(const std::vector<Config>& track) {
  double best = kInf;
  for (size_t a = 0; a < track.size(); ++a)
    for (size_t b = a + 1; b < track.size(); ++b) {
      if (track[a].empty() || track[b].empty()) continue;
      for (const auto& p : track[a].sites())
        for (const auto& q : track[b].sites()) best = std::min(best, norm(p - q));
    }
  return best;
}

double expiry_of(double rho, double t_prev) {
  double lg = std::log(rho);
  return lg * lg - 4 * std::log(rho + t_prev) - t_prev;
}

}  // namespace

CollapseRecord track_clusters(const Trajectory& traj, const Clustering& c0) {
  if (traj.thin != 1 || traj.states.size() != traj.diameters.size())
    throw std::invalid_argument("track_clusters: trajectory must record every state");
  {
    size_t covered = 0;
    for (const auto& cl : c0.clusters) covered += cl.sites.n();
    if (covered != traj.initial.n())
      throw std::invalid_argument("track_clusters: clustering does not match the initial state");
  }

  std::vector<Config> track;
  for (const auto& cl : c0.clusters) track.push_back(cl.sites);

  CollapseRecord rec;
  double sep_snapshot = separation(track);
  long long t_prev = 0;
  for (size_t t = 0; t < traj.states.size(); ++t) {
    std::vector<bool> was_empty;
    for (const auto& p : track) was_empty.push_back(p.empty());
    rec.overlap = advance_tracking(track, traj.states[t]) || rec.overlap;
    bool any_collapse = false;
    for (size_t i = 0; i < track.size(); ++i)
      if (!was_empty[i] && track[i].empty()) {
        rec.thresholds.push_back((long long)(t) + 1);
        rec.rho.push_back(sep_snapshot);
        rec.expiry.push_back(expiry_of(sep_snapshot, double(t_prev)));
        any_collapse = true;
      }
    if (any_collapse) {
      t_prev = (long long)(t) + 1;
      sep_snapshot = separation(track);
    }
  }
  rec.total = rec.thresholds.empty() ? 0 : rec.thresholds.back();
  return rec;
}

CollapseRecord algorithm1(const Config& U, double threshold, double exponent_delta,
                          const PotentialTable& table, Rng& rng) {
  if (U.n() < 2) throw std::invalid_argument("algorithm1: |U| < 2");
  if (!(threshold > 0)) throw std::invalid_argument("algorithm1: threshold must be > 0");
  const int n = int(U.n());

  CollapseRecord rec;
  Config V = U;
  KernelCache cache;

  while (rec.flag == 0) {
    double d = diameter(V);
    if (!(d > threshold)) break;

    double r = theta(n, 0).value_gt(d) ? 0.0 : phi(n, d);
    Clustering cl = exponential_clustering(V, r);
    while (cl.clusters.size() == 1 && r > 1e-9) {
      r *= 0.5;  // marginal rounding can defeat the k > 1 guarantee
      if (r < 1e-9) r = 0;
      cl = exponential_clustering(V, r);
      ++rec.recluster_events;
    }
    if (cl.clusters.size() == 1) {
      rec.flag = 1;
      break;
    }

    const size_t k = cl.clusters.size();
    const long long budget =
        (long long)(std::ceil(std::pow(std::log(d), 1.0 + 7.0 * exponent_delta)));
    std::vector<Config> track;
    for (const auto& c : cl.clusters) track.push_back(c.sites);

    double sep_snapshot = separation(track);
    long long t_prev = 0;
    size_t collapsed = 0;
    long long t = 0, t_done = -1;
    while (t < budget && collapsed < k - 1) {
      ++t;
      V = step_cached(V, table, rng, cache).next;
      std::vector<bool> was_empty;
      for (const auto& p : track) was_empty.push_back(p.empty());
      rec.overlap = advance_tracking(track, V) || rec.overlap;
      bool any = false;
      for (size_t i = 0; i < track.size(); ++i)
        if (!was_empty[i] && track[i].empty()) {
          ++collapsed;
          rec.thresholds.push_back(t);
          rec.rho.push_back(sep_snapshot);
          rec.expiry.push_back(expiry_of(sep_snapshot, double(t_prev)));
          any = true;
        }
      if (any) {
        t_prev = t;
        sep_snapshot = separation(track);
      }
      if (collapsed >= k - 1) t_done = t;
    }
    if (t_done >= 0)
      rec.total += t_done;
    else
      rec.flag = 1;
  }
  return rec;
}

}  // namespace hatlab
