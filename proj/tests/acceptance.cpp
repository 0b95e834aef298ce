// Acceptance harness: prints one PASS/FAIL line per criterion and exits with
// the number of failures.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "hatlab/cluster.hpp"
#include "hatlab/harmonic.hpp"
#include "hatlab/hat.hpp"
#include "hatlab/lab.hpp"
#include "hatlab/lattice.hpp"
#include "hatlab/potential.hpp"
#include "hatlab/rng.hpp"

using namespace hatlab;

namespace {

int failures = 0;
std::chrono::steady_clock::time_point t0;

void report(int idx, bool pass, const std::string& what, const std::string& detail) {
  auto t1 = std::chrono::steady_clock::now();
  double secs = std::chrono::duration<double>(t1 - t0).count();
  std::printf("criterion %2d: %s  %s (%s; %.1fs)\n", idx, pass ? "PASS" : "FAIL",
              what.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
  t0 = t1;
}

Site random_site(Rng& rng, int64_t box) {
  return {int64_t(rng.below(uint64_t(2 * box + 1))) - box,
          int64_t(rng.below(uint64_t(2 * box + 1))) - box};
}

Config random_config(Rng& rng, int n, int64_t box) {
  std::set<Site> s;
  while (int(s.size()) < n) s.insert(random_site(rng, box));
  return Config(std::vector<Site>(s.begin(), s.end()));
}

unsigned thread_count() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 4 : std::min(n, 8u);
}

void parallel_tasks(size_t count, const std::function<void(size_t)>& fn) {
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < thread_count(); ++w)
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= double(x.size());
  my /= double(x.size());
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

void criterion1(const PotentialTable& t) {
  Rng rng(101);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Site x = random_site(rng, 10);
    Site y = x + random_site(rng, 10);
    Site z = random_site(rng, 100);
    if (x == y || z == x || z == y) {
      --trial;
      continue;
    }
    Config a({x, y});
    HittingSolution sol = solve_hitting(a, t);
    size_t yi = a.sites()[0] == y ? 0 : 1;
    worst = std::max(worst,
                     std::fabs(sol.evaluate(yi, z, t) - two_point(x, y, z, t)));
  }
  report(1, worst <= 1e-10, "pair hitting solve vs two-point closed form",
         "200 triples, max err " + std::to_string(worst));
}

void criterion2(const PotentialTable& t) {
  Rng rng(202);
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Config a = random_config(rng, 2 + int(rng.below(7)), 20);
    try {
      harmonic_measure(a, t, true);  // throws beyond 1e-7 disagreement
      ++ok;
    } catch (const std::exception&) {
    }
  }
  report(2, ok == 100, "harmonic measure dual computation within 1e-7",
         std::to_string(ok) + "/100 sets agree");
}

void criterion3(const PotentialTable& t) {
  std::vector<Site> box;
  for (int64_t x = 0; x < 5; ++x)
    for (int64_t y = 0; y < 5; ++y) box.push_back({x, y});
  std::set<uint64_t> seen;
  long classes = 0, bad = 0;
  std::vector<int> pick;
  std::function<void(size_t)> rec = [&](size_t lo) {
    if (!pick.empty()) {
      std::vector<Site> sites;
      for (int i : pick) sites.push_back(box[size_t(i)]);
      Config a(sites);
      if (seen.insert(canonicalize(a).hash).second) {
        ++classes;
        auto hm = harmonic_measure(a, t, false);
        std::set<Site> support;
        for (size_t i = 0; i < a.n(); ++i)
          if (hm[i] > 1e-9) support.insert(a.sites()[i]);
        auto ex = exposed_sites(a);
        if (support != std::set<Site>(ex.begin(), ex.end())) ++bad;
      }
    }
    if (pick.size() == 4) return;
    for (size_t i = lo; i < box.size(); ++i) {
      pick.push_back(int(i));
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  report(3, bad == 0, "harmonic-measure support equals flood-fill exposure",
         std::to_string(classes) + " classes (n <= 4 in a 5x5 box), " +
             std::to_string(bad) + " mismatches");
}

void criterion4(const PotentialTable& t) {
  Rng rng(404);
  double worst_row = 0, worst_act = 0, worst_neg = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Config a = random_config(rng, 2 + int(rng.below(5)), 6);
    if (classify(a) != IsoClass::NonIso) {
      --trial;
      continue;
    }
    TransitionKernel k = transition_kernel(a, t);
    double act = 0;
    for (const auto& row : k.rows) {
      act += row.activation;
      double sum = 0;
      for (double p : row.prob) {
        sum += p;
        worst_neg = std::min(worst_neg, p);
      }
      worst_row = std::max(worst_row, std::fabs(sum - 1.0));
    }
    worst_act = std::max(worst_act, std::fabs(act - 1.0));
  }
  report(4,
         worst_row <= 1e-8 && worst_act <= 1e-8 && worst_neg >= -1e-10,
         "activation and transport rows normalized",
         "100 NonIso states, worst row defect " + std::to_string(worst_row));
}

void criterion5(const PotentialTable& t) {
  bool pass = true;
  std::string detail;
  for (int64_t d : {10, 100, 1000}) {
    Config u({{0, 0}, {d, 0}});
    // Exact kernel: all transport mass adjacent to the survivor.
    for (const Site& x : {Site{0, 0}, Site{d, 0}}) {
      Site survivor = x == Site{0, 0} ? Site{d, 0} : Site{0, 0};
      TransportRow row = transport_distribution(u, x, t);
      double adj = 0;
      for (size_t c = 0; c < row.to.size(); ++c)
        if (l1(row.to[c] - survivor) == 1) adj += row.prob[c];
      if (std::fabs(adj - 1.0) > 1e-8) pass = false;
    }
    // Sampled steps: diameter 1 in every one of 1e4 trials.
    KernelCache cache;
    Rng rng(500 + uint64_t(d));
    long hit = 0;
    for (long i = 0; i < 10000; ++i)
      if (diameter(step_cached(u, t, rng, cache).next) == 1.0) ++hit;
    detail += "d=" + std::to_string(d) + ":" + std::to_string(hit) + "/10000 ";
    if (hit != 10000) pass = false;
  }
  report(5, pass, "pair collapses to diameter 1 in one step", detail);
}

void criterion6(const PotentialTable& t) {
  bool pass = true;
  std::string detail;
  for (int n = 2; n <= 6; ++n) {
    Config line = make_line(n);
    uint64_t h = canonicalize(line).hash;
    TransitionKernel k = transition_kernel(line, t);
    double stay = 0;
    for (const auto& row : k.rows)
      for (size_t c = 0; c < row.to.size(); ++c)
        if (canonicalize(line.without(row.from).with(row.to[c])).hash == h)
          stay += row.activation * row.prob[c];
    char buf[48];
    std::snprintf(buf, sizeof buf, "n=%d:%.4f ", n, stay);
    detail += buf;
    if (stay < 0.25) pass = false;
  }
  report(6, pass, "line self-transition probability >= 1/4", detail);
}

void criterion7(const PotentialTable& t) {
  AuditItem item = audit_escape_lower_bound(t, 50, 707);
  report(7, item.pass && item.worst_margin >= 0,
         "escape probability dominates H_A(x) / (4 log r)",
         std::to_string(item.samples) + " checks, worst margin " +
             std::to_string(item.worst_margin));
}

void criterion8(const PotentialTable& t) {
  AuditItem item = audit_circle_ratio(t);
  report(8, item.pass, "circle hitting ratios within [0.93, 1.04]",
         "worst margin " + std::to_string(item.worst_margin));
}

void criterion9() {
  const double s3 = std::sqrt(3.0);
  double worst_rel = 0;
  for (int L = 3; L <= 60; ++L) {
    double closed = 2 * s3 / (std::pow(2 + s3, L - 1) - std::pow(2 - s3, L - 1));
    worst_rel = std::max(worst_rel,
                         std::fabs(tunnel_value(L, 2) - closed) / closed);
  }
  bool tunnel_ok = worst_rel <= 1e-12;
  Spiral sp = build_spiral(40);
  double rate = spiral_log_rate(sp);
  double ref = 2 * std::log(2 + s3);
  bool band_ok = rate >= 0.8 * ref && rate <= 1.2 * ref;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "tunnel rel err %.2e; n=40 rate %.3f vs band [%.3f, %.3f]",
                worst_rel, rate, 0.8 * ref, 1.2 * ref);
  report(9, tunnel_ok && band_ok, "tunnel closed form and spiral escape band",
         buf);
}

void criterion10(const PotentialTable& t) {
  Config u({{0, 0}, {0, 1}, {2, 0}});
  const Site x{2, 0};
  TransportRow row = transport_distribution(u, x, t);
  const long samples = 1000000;
  std::mutex mu;
  std::map<uint64_t, long> freq;
  const size_t chunks = 64;
  parallel_tasks(chunks, [&](size_t c) {
    Rng rng(replica_seed(1010, c));
    std::map<uint64_t, long> local;
    long per = samples / long(chunks);
    // Reinjection bias at r_max/2 is O(diam / r_max) ~ 1e-3 of the 0.01
    // tolerance at factor 2048.
    for (long i = 0; i < per; ++i)
      ++local[site_key(mc_transport(u, x, rng, {}, 2048))];
    std::lock_guard<std::mutex> lk(mu);
    for (const auto& [k, v] : local) freq[k] += v;
  });
  long total = 0;
  for (const auto& [k, v] : freq) total += v;
  double tv = 0;
  long on_support = 0;
  for (size_t c = 0; c < row.to.size(); ++c) {
    auto it = freq.find(site_key(row.to[c]));
    long f = it == freq.end() ? 0 : it->second;
    on_support += f;
    tv += std::fabs(double(f) / double(total) - row.prob[c]);
  }
  tv = (tv + double(total - on_support) / double(total)) / 2;
  report(10, tv < 0.01, "Monte Carlo transport matches the exact law",
         std::to_string(total) + " samples, TV " + std::to_string(tv));
}

Trajectory long_run;  // shared by criteria 11 and 12

void criterion11(const PotentialTable& t) {
  long_run = run(make_line(3), 1000000, t, 1111);
  RenewalReport rep = renewal_analysis(long_run, 3);
  size_t m = rep.increments.size();
  double zx = rep.increment_mean[0] / std::sqrt(rep.covariance[0][0] / double(m));
  double zy = rep.increment_mean[1] / std::sqrt(rep.covariance[1][1] / double(m));
  // Spread of the off-diagonal product and of the diagonal difference.
  double s_off = 0, s_diff = 0, mean_diff = 0;
  for (const auto& inc : rep.increments) {
    double dx = inc[0] - rep.increment_mean[0], dy = inc[1] - rep.increment_mean[1];
    s_off += (dx * dy - rep.covariance[0][1]) * (dx * dy - rep.covariance[0][1]);
    mean_diff += dx * dx - dy * dy;
  }
  mean_diff /= double(m);
  for (const auto& inc : rep.increments) {
    double dx = inc[0] - rep.increment_mean[0], dy = inc[1] - rep.increment_mean[1];
    double d = dx * dx - dy * dy - mean_diff;
    s_diff += d * d;
  }
  double z_off = rep.covariance[0][1] / std::sqrt(s_off / double(m) / double(m));
  double z_diag = mean_diff / std::sqrt(s_diff / double(m) / double(m));

  std::vector<double> lx, ly;
  for (long lag = 16; lag <= 65536; lag *= 2) {
    double acc = 0;
    long cnt = 0;
    for (size_t j = 0; (j + 1) * size_t(lag) < long_run.com.size(); ++j) {
      const auto &a = long_run.com[j * size_t(lag)],
                 &b = long_run.com[(j + 1) * size_t(lag)];
      acc += (b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]);
      ++cnt;
    }
    if (cnt < 8) break;
    lx.push_back(std::log(double(lag)));
    ly.push_back(std::log(acc / double(cnt)));
  }
  double expo = fit_slope(lx, ly);
  bool pass = std::fabs(zx) < 3 && std::fabs(zy) < 3 && std::fabs(z_off) < 3 &&
              std::fabs(z_diag) < 3 && rep.chi2 > 0 && std::isfinite(rep.chi2) &&
              std::fabs(expo - 1.0) <= 0.15;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "z=(%.2f,%.2f) z_off=%.2f z_diag=%.2f chi2=%.4f msd exponent %.3f",
                zx, zy, z_off, z_diag, rep.chi2, expo);
  report(11, pass, "renewal diffusivity properties at n=3", buf);
}

void criterion12() {
  RenewalReport rep = renewal_analysis(long_run, 3);
  report(12, rep.kac >= 0.9 && rep.kac <= 1.1,
         "Kac stationarity statistic within [0.9, 1.1]",
         "kac " + std::to_string(rep.kac));
}

void criterion13(const PotentialTable& t) {
  std::vector<long long> ds = {32, 64, 128, 256, 512, 1024};
  // The true median is exactly 2 at every separation here: the far site
  // activates with probability alpha(d) in (0.458, 0.480) and lands adjacent
  // to the pair in one transport, so P(T <= 1) = alpha(d) < 1/2 < P(T <= 2).
  // With alpha so close to 1/2 the sample median flips to 1 with probability
  // about Phi(-0.058 sqrt(N)) per point, so well beyond the minimum 64
  // replicas are needed to keep that noise out of the monotonicity check.
  const int replicas = 8192;
  const long long cap = 2000000;
  std::vector<long long> times(ds.size() * size_t(replicas), 0);
  std::atomic<bool> capped{false};
  parallel_tasks(times.size(), [&](size_t i) {
    long long d = ds[i / size_t(replicas)];
    Config u({{0, 0}, {0, 1}, {d, 0}});
    Rng rng(replica_seed(1313, i));
    KernelCache cache;
    long long step_no = 0;
    while (diameter(u) > 5.0 && step_no < cap) {
      u = step_cached(u, t, rng, cache).next;
      ++step_no;
    }
    if (step_no >= cap) capped = true;
    times[i] = step_no;
  });
  std::vector<double> med;
  bool nondecreasing = true;
  std::string detail = "medians ";
  for (size_t k = 0; k < ds.size(); ++k) {
    std::vector<long long> block(times.begin() + long(k) * replicas,
                                 times.begin() + long(k + 1) * replicas);
    std::sort(block.begin(), block.end());
    double v = 0.5 * (double(block[replicas / 2 - 1]) + double(block[replicas / 2]));
    if (!med.empty() && v < med.back()) nondecreasing = false;
    med.push_back(v);
    detail += std::to_string(v) + " ";
  }
  std::vector<double> lx, ly;
  for (size_t k = 0; k < ds.size(); ++k) {
    lx.push_back(std::log(std::log(double(ds[k]))));
    ly.push_back(std::log(std::max(med[k], 1.0)));
  }
  double p = fit_slope(lx, ly);
  detail += "p=" + std::to_string(p);
  report(13, nondecreasing && p <= 2.5 && !capped,
         "collapse time scales like a power of log d", detail);
}

void criterion14(const PotentialTable& t) {
  auto items = audit_kernel_bounds(t, 10000, 1414);
  bool pass = true;
  for (const auto& it : items) pass = pass && it.pass;
  Rng rng(1415);
  double worst = 1e300;
  for (int i = 0; i < 10000; ++i) {
    Site x = random_site(rng, t.exact_radius());
    if (x == kOrigin) continue;
    double tail = 2.0 / std::numbers::pi * std::log(norm(x)) + t.kappa();
    worst = std::min(worst, t.lambda_bound() / (norm(x) * norm(x)) -
                                std::fabs(t(x) - tail));
  }
  report(14, pass && worst >= 0, "potential-kernel inequality audits",
         "7 items on 1e4 inputs, lambda margin " + std::to_string(worst));
}

void criterion15() {
  bool pass = true;
  std::string detail;
  for (double phi : {0.0, std::numbers::pi / 4}) {
    double lo = 1e300, hi = 0;
    for (double l : {24.0, 48.0, 96.0}) {
      double p = rectangle_exit(phi, 24, l);
      double s = -std::log(p) / (l / 24.0);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "phi=%.2f ratio %.2f ", phi, hi / lo);
    detail += buf;
    if (hi > 3 * lo) pass = false;
  }
  report(15, pass, "rectangle exit rate per aspect within a factor 3", detail);
}

}  // namespace

int main() {
  std::printf("building potential table (radius 128)...\n");
  std::fflush(stdout);
  PotentialTable table = PotentialTable::build(128);
  t0 = std::chrono::steady_clock::now();
  criterion1(table);
  criterion2(table);
  criterion3(table);
  criterion4(table);
  criterion5(table);
  criterion6(table);
  criterion7(table);
  criterion8(table);
  criterion9();
  criterion10(table);
  criterion11(table);
  criterion12();
  criterion13(table);
  criterion14(table);
  criterion15();
  std::printf("%d of 15 criteria failed\n", failures);
  return failures;
}
