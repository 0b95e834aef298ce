#include "hatlab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "hatlab/harmonic.hpp"
#include "hatlab/hat.hpp"
#include "hatlab/io.hpp"
#include "hatlab/rng.hpp"
#include "hatlab/squares.hpp"

namespace hatlab {

using json = nlohmann::json;

namespace {

enum class Kind { Int, Real, Str };

struct Field {
  const char* key;
  Kind kind;
  json def;
};

json resolve_params(const std::string& exp, const json& in,
                    const std::vector<Field>& fields) {
  if (!in.is_object()) throw std::runtime_error(exp + ": params must be an object");
  json out = json::object();
  for (const auto& f : fields) out[f.key] = f.def;
  for (auto it = in.begin(); it != in.end(); ++it) {
    const Field* f = nullptr;
    for (const auto& g : fields)
      if (it.key() == g.key) f = &g;
    if (!f) throw std::runtime_error(exp + ": unknown parameter '" + it.key() + "'");
    bool ok = false;
    switch (f->kind) {
      case Kind::Int: ok = it->is_number_integer(); break;
      case Kind::Real: ok = it->is_number(); break;
      case Kind::Str: ok = it->is_string(); break;
    }
    if (!ok) throw std::runtime_error(exp + ": parameter '" + it.key() + "' has the wrong type");
    out[it.key()] = *it;
  }
  return out;
}

std::vector<long long> parse_int_list(const std::string& s) {
  std::vector<long long> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    size_t pos = 0;
    long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::runtime_error("bad integer list entry '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::runtime_error("empty integer list");
  return out;
}

void write_meta(const ExperimentConfig& cfg, const json& resolved, json extra) {
  json meta;
  meta["experiment"] = cfg.experiment;
  meta["seed"] = cfg.seed;
  meta["threads"] = cfg.threads;
  meta["format"] = cfg.format;
  meta["params"] = resolved;
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = *it;
  write_text_file(cfg.out_prefix + ".meta.json", meta.dump(2) + "\n");
}

std::string svg_meta(const ExperimentConfig& cfg, const json& resolved) {
  return "experiment=" + cfg.experiment + " seed=" + std::to_string(cfg.seed) +
         " params=" + resolved.dump();
}

void parallel_for(size_t tasks, int threads,
                  const std::function<void(size_t)>& fn) {
  int nt = std::max(1, std::min<int>(threads, int(tasks)));
  if (nt == 1) {
    for (size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= tasks) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double median_of(std::vector<long long> v) {
  std::sort(v.begin(), v.end());
  size_t m = v.size();
  if (m % 2) return double(v[m / 2]);
  return 0.5 * (double(v[m / 2 - 1]) + double(v[m / 2]));
}

// Least squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw std::runtime_error("degenerate regression");
  return sxy / sxx;
}

Config spaced_pair_config(int n, long long d) {
  std::vector<Site> sites;
  for (int j = 0; j + 1 < n; ++j) sites.push_back({0, j});
  sites.push_back({d, 0});
  return Config(std::move(sites));
}

std::string site_csv(const Site& s) {
  return format_num((long long)s.x) + "," + format_num((long long)s.y);
}

// ---- simulate ------------------------------------------------------------

int exp_simulate(const ExperimentConfig& cfg, const json& P) {
  Config init = parse_set_spec(P["init"].get<std::string>());
  long long steps = P["steps"].get<long long>();
  long long thin = P["thin"].get<long long>();
  if (steps < 1 || thin < 1) throw std::runtime_error("simulate: steps and thin must be >= 1");
  PotentialTable table = PotentialTable::build(P["radius"].get<int>());
  Trajectory traj = run(init, steps, table, cfg.seed);

  if (cfg.format == "json") {
    json out;
    out["initial"] = json::parse(config_to_json(init));
    json diam = json::array(), com = json::array(), events = json::array();
    for (long long t = 1; t <= steps; ++t) {
      if (t % thin && t != steps) continue;
      diam.push_back({t, traj.diameters[t - 1]});
      com.push_back({t, traj.com[t - 1][0], traj.com[t - 1][1]});
    }
    for (const auto& e : traj.events)
      events.push_back({e.t, e.activated.x, e.activated.y, e.deposited.x, e.deposited.y});
    out["diam"] = diam;
    out["com"] = com;
    out["events"] = events;
    write_text_file(cfg.out_prefix + ".json", out.dump(2) + "\n");
  } else {
    CsvWriter dw(cfg.out_prefix + ".diam.csv", {"t", "diam"});
    CsvWriter cw(cfg.out_prefix + ".com.csv", {"t", "com_x", "com_y"});
    for (long long t = 1; t <= steps; ++t) {
      if (t % thin && t != steps) continue;
      dw.row({format_num(t), format_num(traj.diameters[t - 1])});
      cw.row({format_num(t), format_num(traj.com[t - 1][0]),
              format_num(traj.com[t - 1][1])});
    }
    CsvWriter ew(cfg.out_prefix + ".events.csv",
                 {"t", "activated_x", "activated_y", "deposited_x", "deposited_y"});
    for (const auto& e : traj.events)
      ew.row({format_num(e.t), format_num((long long)e.activated.x),
              format_num((long long)e.activated.y), format_num((long long)e.deposited.x),
              format_num((long long)e.deposited.y)});
  }
  write_meta(cfg, P, {{"n", init.n()}, {"final_diam", traj.diameters.back()}});
  return 0;
}

// ---- collapse-scaling ------------------------------------------------------

int exp_collapse(const ExperimentConfig& cfg, const json& P) {
  int n = P["n"].get<int>();
  if (n < 2) throw std::runtime_error("collapse-scaling: n must be >= 2");
  std::vector<long long> ds = parse_int_list(P["d_list"].get<std::string>());
  int replicas = P["replicas"].get<int>();
  long long r_stop = P["r_stop"].get<long long>();
  if (r_stop <= 0) r_stop = std::max<long long>(5, 2 * n);
  long long cap = P["step_cap"].get<long long>();
  PotentialTable table = PotentialTable::build(P["radius"].get<int>());

  struct Row {
    long long d = 0;
    int replica = 0;
    uint64_t seed = 0;
    long long T = 0;
    int capped = 0;
  };
  size_t tasks = ds.size() * size_t(replicas);
  std::vector<Row> rows(tasks);
  double stop = double(r_stop);
  parallel_for(tasks, cfg.threads, [&](size_t i) {
    long long d = ds[i / replicas];
    Row r;
    r.d = d;
    r.replica = int(i % replicas);
    r.seed = replica_seed(cfg.seed, i);
    Rng rng(r.seed);
    KernelCache cache;
    Config U = spaced_pair_config(n, d);
    long long t = 0;
    while (t < cap && diameter(U) > stop) {
      U = step_cached(U, table, rng, cache).next;
      ++t;
    }
    r.T = t;
    r.capped = diameter(U) > stop ? 1 : 0;
    rows[i] = r;
  });

  CsvWriter rw(cfg.out_prefix + ".replicas.csv",
               {"n", "d", "replica", "seed", "T", "capped"});
  for (const auto& r : rows)
    rw.row({format_num((long long)n), format_num(r.d), format_num((long long)r.replica),
            std::to_string(r.seed), format_num(r.T), format_num((long long)r.capped)});

  std::vector<double> med, logd;
  CsvWriter sw(cfg.out_prefix + ".summary.csv", {"n", "d", "median_T"});
  SvgSeries series{"median T", {}};
  for (size_t k = 0; k < ds.size(); ++k) {
    std::vector<long long> ts;
    for (int r = 0; r < replicas; ++r) ts.push_back(rows[k * replicas + r].T);
    double m = median_of(ts);
    med.push_back(m);
    logd.push_back(std::log(double(ds[k])));
    sw.row({format_num((long long)n), format_num(ds[k]), format_num(m)});
    series.points.push_back({double(ds[k]), m});
  }
  std::vector<double> lx, ly;
  for (size_t k = 0; k < med.size(); ++k) {
    lx.push_back(std::log(logd[k]));
    ly.push_back(std::log(std::max(med[k], 1.0)));
  }
  double p = lx.size() >= 2 ? fit_slope(lx, ly)
                            : std::numeric_limits<double>::quiet_NaN();
  write_svg_plot(cfg.out_prefix + ".svg", "collapse time vs separation", "d",
                 "median T", {series}, true, true, svg_meta(cfg, P));
  long long capped = 0;
  for (const auto& r : rows) capped += r.capped;
  write_meta(cfg, P,
             {{"n", n}, {"r_stop", r_stop}, {"fitted_exponent", p}, {"capped", capped}});
  return 0;
}

// ---- stationary-tail -------------------------------------------------------

int exp_tail(const ExperimentConfig& cfg, const json& P) {
  int n = P["n"].get<int>();
  long long steps = P["steps"].get<long long>();
  PotentialTable table = PotentialTable::build(P["radius"].get<int>());
  Trajectory traj = run(make_line(n), steps, table, cfg.seed);

  long long burn = steps / 10;
  std::map<long long, std::pair<double, long long>> hist;  // key: rounded diam
  for (long long t = burn; t < steps; ++t) {
    double d = traj.diameters[t];
    auto& cell = hist[llround(d * 1048576.0)];
    cell.first = d;
    cell.second += 1;
  }
  long long total = steps - burn;
  CsvWriter w(cfg.out_prefix + ".tail.csv",
              {"diam", "count", "frequency", "log10_frequency"});
  SvgSeries series{"diam frequency", {}};
  for (const auto& [k, cell] : hist) {
    double freq = double(cell.second) / double(total);
    w.row({format_num(cell.first), format_num(cell.second), format_num(freq),
           format_num(std::log10(freq))});
    series.points.push_back({cell.first, freq});
  }
  write_svg_plot(cfg.out_prefix + ".svg", "stationary diameter tail", "diam",
                 "frequency", {series}, false, true, svg_meta(cfg, P));
  write_meta(cfg, P, {{"n", n},
                      {"burn_in", burn},
                      {"qualitative", true},
                      {"note", "desk-scale tail; the asymptotic regime of the "
                               "tail bound is out of reach"}});
  return 0;
}

// ---- diffusivity -----------------------------------------------------------

int exp_diffusivity(const ExperimentConfig& cfg, const json& P) {
  int n = P["n"].get<int>();
  long long steps = P["steps"].get<long long>();
  int B = P["bootstrap"].get<int>();
  PotentialTable table = PotentialTable::build(P["radius"].get<int>());
  Trajectory traj = run(make_line(n), steps, table, cfg.seed);
  RenewalReport rep = renewal_analysis(traj, n);
  size_t m = rep.increments.size();

  // Paired bootstrap of (increment, return time) cycles.
  std::vector<double> boots;
  for (int b = 0; b < B; ++b) {
    Rng rng(replica_seed(cfg.seed ^ 0x9e3779b97f4a7c15ULL, uint64_t(b)));
    double sx = 0, sy = 0, st = 0;
    std::vector<size_t> idx(m);
    for (size_t i = 0; i < m; ++i) idx[i] = size_t(rng.below(m));
    for (size_t i : idx) {
      sx += rep.increments[i][0];
      sy += rep.increments[i][1];
      st += double(rep.return_times[i]);
    }
    double mx = sx / m, my = sy / m;
    double vx = 0, vy = 0;
    for (size_t i : idx) {
      vx += (rep.increments[i][0] - mx) * (rep.increments[i][0] - mx);
      vy += (rep.increments[i][1] - my) * (rep.increments[i][1] - my);
    }
    double nu2 = 0.5 * (vx + vy) / double(m - 1);
    boots.push_back(nu2 / (st / m));
  }
  std::sort(boots.begin(), boots.end());
  double lo = boots[size_t(std::llround(0.025 * (B - 1)))];
  double hi = boots[size_t(std::llround(0.975 * (B - 1)))];

  // Isotropy z-scores from the renewal increments.
  double mx = rep.increment_mean[0], my = rep.increment_mean[1];
  double vx = rep.covariance[0][0], vy = rep.covariance[1][1];
  double zx = mx / std::sqrt(vx / m), zy = my / std::sqrt(vy / m);
  double sprod = 0, sdiff = 0;
  for (size_t i = 0; i < m; ++i) {
    double dx = rep.increments[i][0] - mx, dy = rep.increments[i][1] - my;
    double prod = dx * dy - rep.covariance[0][1];
    double diff = (dx * dx - dy * dy) - (vx - vy);
    sprod += prod * prod;
    sdiff += diff * diff;
  }
  double z_off = rep.covariance[0][1] / std::sqrt(sprod / (m * double(m - 1)));
  double z_diag = (vx - vy) / std::sqrt(sdiff / (m * double(m - 1)));

  // Center-of-mass spread vs time over doubling lags, disjoint blocks.
  std::vector<double> lags, msd;
  CsvWriter mw(cfg.out_prefix + ".msd.csv", {"lag", "msd"});
  SvgSeries series{"msd", {}};
  for (long long s = 1; s <= steps / 10; s *= 2) {
    double acc = 0;
    long long cnt = 0;
    for (long long t = 0; t + s < (long long)traj.com.size(); t += s) {
      double dx = traj.com[t + s][0] - traj.com[t][0];
      double dy = traj.com[t + s][1] - traj.com[t][1];
      acc += dx * dx + dy * dy;
      ++cnt;
    }
    double v = acc / double(cnt);
    mw.row({format_num(s), format_num(v)});
    series.points.push_back({double(s), v});
    if (s >= 16) {
      lags.push_back(std::log(double(s)));
      msd.push_back(std::log(v));
    }
  }
  double expo = fit_slope(lags, msd);
  write_svg_plot(cfg.out_prefix + ".svg", "center-of-mass spread vs lag", "lag",
                 "mean squared displacement", {series}, true, true,
                 svg_meta(cfg, P));

  CsvWriter w(cfg.out_prefix + ".stats.csv", {"statistic", "value"});
  auto put = [&](const std::string& k, double v) { w.row({k, format_num(v)}); };
  put("cycles", double(m));
  put("mean_tau", rep.mean_tau);
  put("nu2", rep.nu2);
  put("chi2", rep.chi2);
  put("chi2_ci_lo", lo);
  put("chi2_ci_hi", hi);
  put("kac", rep.kac);
  put("z_mean_x", zx);
  put("z_mean_y", zy);
  put("z_cov_offdiag", z_off);
  put("z_var_diff", z_diag);
  put("msd_exponent", expo);
  write_meta(cfg, P, {{"n", n}, {"chi2", rep.chi2}, {"kac", rep.kac},
                      {"msd_exponent", expo}});
  return 0;
}

// ---- spiral-sweep ----------------------------------------------------------

int exp_spiral(const ExperimentConfig& cfg, const json& P) {
  std::vector<long long> ns = parse_int_list(P["n_list"].get<std::string>());
  const double ref = 2.0 * std::log(2.0 + std::sqrt(3.0));
  CsvWriter w(cfg.out_prefix + ".csv",
              {"n", "gamma", "gamma_over_2n", "rate", "reference", "ratio", "class"});
  SvgSeries series{"-(1/n) log H(o)", {}}, refline{"2 log(2+sqrt(3))", {}};
  double last_ratio = 0;
  for (long long n : ns) {
    Spiral sp = build_spiral(int(n));
    double rate = spiral_log_rate(sp);
    double g2n = double(sp.gamma_length) / (2.0 * double(n));
    last_ratio = rate / ref;
    w.row({format_num(n), format_num((long long)sp.gamma_length), format_num(g2n),
           format_num(rate), format_num(ref), format_num(last_ratio),
           classify(sp.sites) == IsoClass::NonIso ? "NonIso" : "Iso"});
    series.points.push_back({double(n), rate});
    refline.points.push_back({double(n), ref});
  }
  write_svg_plot(cfg.out_prefix + ".svg", "spiral hitting rate", "n",
                 "-(1/n) log H(o)", {series, refline}, false, false,
                 svg_meta(cfg, P));
  write_meta(cfg, P, {{"reference", ref}, {"final_ratio", last_ratio}});
  return 0;
}

// ---- audit-bounds ----------------------------------------------------------

int exp_audit(const ExperimentConfig& cfg, const json& P) {
  PotentialTable table = PotentialTable::build(P["radius"].get<int>());
  std::vector<AuditItem> items =
      audit_kernel_bounds(table, P["samples"].get<long>(), cfg.seed);
  items.push_back(audit_escape_lower_bound(table, P["sets"].get<int>(), cfg.seed));
  items.push_back(audit_circle_ratio(table));
  items.push_back(audit_rectangle_exit());
  items.push_back(audit_entrance_measure(cfg.seed, P["entrance_walks"].get<long>()));

  bool all = true;
  CsvWriter w(cfg.out_prefix + ".csv", {"item", "pass", "worst_margin", "samples"});
  for (const auto& it : items) {
    all = all && it.pass;
    w.row({it.name, it.pass ? "1" : "0", format_num(it.worst_margin),
           format_num((long long)it.samples)});
  }
  write_meta(cfg, P, {{"all_pass", all}});
  return all ? 0 : 2;
}

// ---- kernel-table ----------------------------------------------------------

int exp_kernel_table(const ExperimentConfig& cfg, const json& P) {
  int R0 = P["radius"].get<int>();
  PotentialTable table = PotentialTable::build(R0);
  table.save(cfg.out_prefix + ".bin");
  CsvWriter w(cfg.out_prefix + ".csv", {"x", "y", "a"});
  for (int x = 0; x <= R0; ++x)
    for (int y = 0; y <= x; ++y)
      w.row({format_num((long long)x), format_num((long long)y),
             format_num(table.octant(x, y))});
  write_meta(cfg, P, {{"kappa", table.kappa()}, {"lambda", table.lambda_bound()}});
  return 0;
}

// ---- hm / escape -----------------------------------------------------------

int exp_hm(const ExperimentConfig& cfg, const json& P) {
  Config A = parse_set_spec(P["set"].get<std::string>());
  PotentialTable table = PotentialTable::build(P["radius"].get<int>());
  std::vector<double> hm = harmonic_measure(A, table, true);
  uint64_t h = canonicalize(A).hash;
  CsvWriter w(cfg.out_prefix + ".csv",
              {"set_hash", "n", "x", "y", "value", "method", "tolerance"});
  for (size_t i = 0; i < A.sites().size(); ++i)
    w.row({std::to_string(h), format_num((long long)A.n()),
           format_num((long long)A.sites()[i].x), format_num((long long)A.sites()[i].y),
           format_num(hm[i]), "exact+crosscheck", format_num(1e-7)});
  write_meta(cfg, P, {{"n", A.n()}});
  return 0;
}

int exp_escape(const ExperimentConfig& cfg, const json& P) {
  Config A = parse_set_spec(P["set"].get<std::string>());
  std::vector<long long> st = parse_int_list(P["start"].get<std::string>());
  if (st.size() != 2) throw std::runtime_error("escape: start must be 'x,y'");
  Site x{st[0], st[1]};
  if (!A.contains(x)) throw std::runtime_error("escape: start must lie in the set");
  double r = P["r"].get<double>();
  PotentialTable table = PotentialTable::build(P["radius"].get<int>());
  double v = circle_escape(A, x, r, table);
  uint64_t h = canonicalize(A).hash;
  CsvWriter w(cfg.out_prefix + ".csv",
              {"set_hash", "n", "x", "y", "r", "value", "method", "tolerance"});
  w.row({std::to_string(h), format_num((long long)A.n()), format_num((long long)x.x),
         format_num((long long)x.y), format_num(r), format_num(v), "exact",
         format_num(1e-10)});
  write_meta(cfg, P, {{"n", A.n()}, {"value", v}});
  return 0;
}

}  // namespace

Config parse_set_spec(const std::string& spec) {
  if (spec.rfind("line:", 0) == 0) return make_line(std::stoll(spec.substr(5)));
  if (spec.rfind("pair:", 0) == 0) {
    std::vector<long long> v = parse_int_list(spec.substr(5));
    if (v.size() == 1) return spaced_pair_config(2, v[0]);
    if (v.size() == 2) return spaced_pair_config(int(v[0]), v[1]);
    throw std::runtime_error("bad pair spec '" + spec + "'");
  }
  std::vector<Site> sites;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    if (tok.empty()) continue;
    std::vector<long long> v = parse_int_list(tok);
    if (v.size() != 2) throw std::runtime_error("bad site '" + tok + "'");
    sites.push_back({v[0], v[1]});
  }
  if (sites.empty()) throw std::runtime_error("empty set spec");
  return Config(std::move(sites));
}

std::vector<std::string> experiment_names() {
  return {"simulate",     "collapse-scaling", "stationary-tail",
          "diffusivity",  "spiral-sweep",     "audit-bounds",
          "kernel-table", "hm",               "escape"};
}

AuditItem audit_escape_lower_bound(const PotentialTable& table, int sets,
                                   uint64_t seed) {
  Rng rng(seed ^ 0x5851f42d4c957f2dULL);
  AuditItem item{"escape lower bound vs harmonic measure", true, 1e300, sets};
  for (int s = 0; s < sets; ++s) {
    Config A;
    for (;;) {
      int n = 2 + int(rng.below(5));
      std::vector<Site> pts;
      while ((int)pts.size() < n) {
        Site p{int64_t(rng.below(7)) - 3, int64_t(rng.below(7)) - 3};
        if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
      }
      A = Config(std::move(pts));
      if (diameter(A) >= 2) break;
    }
    // Center so the circle encloses the set with margin.
    double cx = 0, cy = 0;
    for (const auto& p : A.sites()) cx += double(p.x), cy += double(p.y);
    Site shift{-llround(cx / double(A.n())), -llround(cy / double(A.n()))};
    A = A.translated(shift);
    double b = diameter(A);
    int k = std::max(2, std::min(200, int(std::floor(160.0 / b))));
    double r = k * b;

    std::vector<Site> circle = rasterize_circle(kOrigin, r);
    std::vector<Site> all = A.sites();
    all.insert(all.end(), circle.begin(), circle.end());
    Config B(all);
    std::vector<double> data(B.n(), 0.0);
    std::unordered_set<uint64_t> circ;
    for (const auto& c : circle) circ.insert(site_key(c));
    for (size_t i = 0; i < B.sites().size(); ++i)
      if (circ.count(site_key(B.sites()[i]))) data[i] = 1.0;
    BoundaryFit fit = solve_boundary(B, data, table);

    std::vector<double> hm = harmonic_measure(A, table, true);
    for (size_t i = 0; i < A.sites().size(); ++i) {
      if (hm[i] <= 1e-12) continue;
      const Site x = A.sites()[i];
      double esc = 0;
      const Site nb[4] = {{x.x + 1, x.y}, {x.x - 1, x.y}, {x.x, x.y + 1}, {x.x, x.y - 1}};
      for (const auto& u : nb) {
        if (A.contains(u)) continue;
        esc += circ.count(site_key(u)) ? 1.0 : fit(B, u, table);
      }
      esc *= 0.25;
      double margin = esc - hm[i] / (4.0 * std::log(r));
      item.worst_margin = std::min(item.worst_margin, margin);
      if (margin < 0) item.pass = false;
    }
  }
  return item;
}

AuditItem audit_circle_ratio(const PotentialTable& table) {
  CircleRatioReport rep = circle_hitting_ratio(10, 1000, table);
  AuditItem item{"near-uniform circle hitting ratio", rep.pass,
                 std::min(rep.min_ratio - 0.93, 1.04 - rep.max_ratio), 16};
  return item;
}

AuditItem audit_rectangle_exit() {
  AuditItem item{"rectangle exit rate spread", true, 1e300, 6};
  const double w = 24;
  for (double phi : {0.0, std::acos(-1.0) / 4}) {
    double lo = 1e300, hi = 0;
    for (double l : {24.0, 48.0, 96.0}) {
      double p = rectangle_exit(phi, w, l);
      if (!(p > 0 && p < 1)) {
        item.pass = false;
        item.worst_margin = -1;
        return item;
      }
      double s = -std::log(p) / (l / w);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    double margin = 3.0 - hi / lo;
    item.worst_margin = std::min(item.worst_margin, margin);
    if (margin < 0) item.pass = false;
  }
  return item;
}

AuditItem audit_entrance_measure(uint64_t seed, long walks_per_start) {
  const double eps = 0.01, R = 10.0 / (eps * eps);
  const double r_mid = eps * R;  // start circle
  std::vector<Site> inner = rasterize_circle(kOrigin, eps * eps * R);
  std::map<uint64_t, size_t> index;
  for (size_t i = 0; i < inner.size(); ++i) index[site_key(inner[i])] = i;
  const double pi = std::acos(-1.0);
  AuditItem item{"conditional entrance measure lower bound", true, 1e300,
                 4 * walks_per_start};
  for (int j = 0; j < 4; ++j) {
    double th = 2 * pi * j / 4 + 0.3;
    Site start{llround(r_mid * std::cos(th)), llround(r_mid * std::sin(th))};
    Rng rng(replica_seed(seed ^ 0xa24baed4963ee407ULL, uint64_t(j)));
    std::vector<long long> counts(inner.size(), 0);
    long long hits = 0;
    for (long w = 0; w < walks_per_start; ++w) {
      Site s = start;
      for (;;) {
        if (norm(s) >= R) break;  // exited through C(R) first
        auto it = index.find(site_key(s));
        if (it != index.end()) {
          ++counts[it->second];
          ++hits;
          break;
        }
        int64_t room = std::min<int64_t>(linf(s) - 13,
                                         int64_t((R - norm(s)) / 2.0));
        int h = 1;
        while (2 * h <= std::min<int64_t>(room, 1024)) h *= 2;
        if (room >= 1 && h >= 1) {
          s = s + sample_exit(exit_table(h), rng);
        } else {
          static const Site dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
          s = s + dirs[rng.below(4)];
        }
      }
    }
    if (hits == 0) {
      item.pass = false;
      item.worst_margin = -1;
      return item;
    }
    for (size_t i = 0; i < counts.size(); ++i) {
      double c = double(counts[i]) * double(inner.size()) / double(hits);
      item.worst_margin = std::min(item.worst_margin, c);
      if (counts[i] == 0) item.pass = false;
    }
  }
  return item;
}

int run_experiment(const ExperimentConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "json")
    throw std::runtime_error("format must be csv or json");
  if (cfg.threads < 1) throw std::runtime_error("threads must be >= 1");
  const std::string& e = cfg.experiment;
  if (e == "simulate") {
    json P = resolve_params(e, cfg.params,
                            {{"init", Kind::Str, "line:3"},
                             {"steps", Kind::Int, 10000},
                             {"thin", Kind::Int, 1},
                             {"radius", Kind::Int, 256}});
    return exp_simulate(cfg, P);
  }
  if (e == "collapse-scaling") {
    json P = resolve_params(e, cfg.params,
                            {{"n", Kind::Int, 3},
                             {"d_list", Kind::Str, "32,64,128,256,512,1024"},
                             {"replicas", Kind::Int, 64},
                             {"r_stop", Kind::Int, 0},
                             {"step_cap", Kind::Int, 100000},
                             {"radius", Kind::Int, 256}});
    return exp_collapse(cfg, P);
  }
  if (e == "stationary-tail") {
    json P = resolve_params(e, cfg.params,
                            {{"n", Kind::Int, 3},
                             {"steps", Kind::Int, 1000000},
                             {"radius", Kind::Int, 256}});
    return exp_tail(cfg, P);
  }
  if (e == "diffusivity") {
    json P = resolve_params(e, cfg.params,
                            {{"n", Kind::Int, 3},
                             {"steps", Kind::Int, 1000000},
                             {"bootstrap", Kind::Int, 200},
                             {"radius", Kind::Int, 256}});
    return exp_diffusivity(cfg, P);
  }
  if (e == "spiral-sweep") {
    json P = resolve_params(e, cfg.params,
                            {{"n_list", Kind::Str, "20,24,28,32,36,40"}});
    return exp_spiral(cfg, P);
  }
  if (e == "audit-bounds") {
    json P = resolve_params(e, cfg.params,
                            {{"samples", Kind::Int, 10000},
                             {"sets", Kind::Int, 50},
                             {"entrance_walks", Kind::Int, 20000},
                             {"radius", Kind::Int, 128}});
    return exp_audit(cfg, P);
  }
  if (e == "kernel-table") {
    json P = resolve_params(e, cfg.params, {{"radius", Kind::Int, 64}});
    return exp_kernel_table(cfg, P);
  }
  if (e == "hm") {
    json P = resolve_params(e, cfg.params,
                            {{"set", Kind::Str, "line:4"}, {"radius", Kind::Int, 256}});
    return exp_hm(cfg, P);
  }
  if (e == "escape") {
    json P = resolve_params(e, cfg.params,
                            {{"set", Kind::Str, "line:4"},
                             {"start", Kind::Str, "0,0"},
                             {"r", Kind::Real, 32.0},
                             {"radius", Kind::Int, 256}});
    return exp_escape(cfg, P);
  }
  throw std::runtime_error("unknown experiment '" + e + "'");
}

}  // namespace hatlab
