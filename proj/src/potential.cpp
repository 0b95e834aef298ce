#include "hatlab/potential.hpp"

#include <boost/math/constants/constants.hpp>

#include "hatlab/bigkernel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace hatlab {

namespace mp = boost::multiprecision;
// Fixed-precision type for constants, so computing them never perturbs the
// dynamic default precision used during table fill.
using Big100 = mp::number<mp::mpfr_float_backend<100>, mp::et_off>;

double kappa_constant() {
  static const double k = [] {
    // (2*gamma_Euler + 3 log 2)/pi
    Big100 gamma = boost::math::constants::euler<Big100>();
    Big100 ln2 = boost::math::constants::ln_two<Big100>();
    Big100 pi = boost::math::constants::pi<Big100>();
    return double((2 * gamma + 3 * ln2) / pi);
  }();
  return k;
}

double kernel_prime(double r) {
  if (!(r > 0)) throw std::invalid_argument("kernel_prime: r must be positive");
  return 2.0 / std::numbers::pi * std::log(r) + kappa_constant();
}

std::vector<Big> kernel_octant_big(int R0, unsigned bits) {
  const unsigned digits = unsigned(bits / 3.32) + 4;
  Big::default_precision(digits);

  Big pi;  // at the freshly-set default precision, straight from mpfr
  mpfr_const_pi(pi.backend().data(), MPFR_RNDN);
  std::vector<Big> diag(size_t(R0) + 2);
  diag[0] = 0;
  Big acc = 0;
  for (int k = 1; k <= R0 + 1; ++k) {
    acc += Big(1) / (2 * k - 1);
    diag[size_t(k)] = 4 * acc / pi;
  }

  std::vector<Big> out(size_t(R0 + 1) * size_t(R0 + 2) / 2, Big(0));
  auto idx = [](int64_t x, int64_t y) { return size_t(x) * size_t(x + 1) / 2 + size_t(y); };

  // Columns col[x][y] for 0 <= y <= x, advanced by harmonicity at (x, y):
  //   a(x+1,y) = 4 a(x,y) - a(x-1,y) - a(x,y+1) - a(x,y-1)
  // with the symmetries a(x,-1) = a(x,1) and a(x-1,x) = a(x,x-1).
  std::vector<Big> prev, cur, next;
  cur = {Big(0)};                    // column x=0: a(0,0)
  if (R0 >= 1) {
    next = {Big(1), diag[1]};        // a(1,0)=1, a(1,1)=4/pi
    for (int x = 1; x <= R0; ++x) {
      prev = std::move(cur);
      cur = std::move(next);
      for (int y = 0; y <= x; ++y) out[idx(x, y)] = cur[size_t(y)];
      if (x == R0) break;
      next.assign(size_t(x) + 2, Big(0));
      next[0] = 4 * cur[0] - prev[0] - 2 * cur[1];
      for (int y = 1; y <= x - 1; ++y)
        next[size_t(y)] =
            4 * cur[size_t(y)] - prev[size_t(y)] - cur[size_t(y) + 1] - cur[size_t(y) - 1];
      if (x >= 1) next[size_t(x)] = 2 * cur[size_t(x)] - cur[size_t(x) - 1];
      next[size_t(x) + 1] = diag[size_t(x) + 1];
    }
  }
  return out;
}

PotentialTable PotentialTable::build(int R0) {
  if (R0 < 4 || R0 > 4096)
    throw std::invalid_argument("build_table: R0 out of [4, 4096]");

  // Precision in bits: the anti-diagonal recurrence amplifies error by
  // (3+2*sqrt(2)) per column.
  const unsigned bits = 96 + unsigned(2.6 * R0);
  std::vector<Big> oct = kernel_octant_big(R0, bits);

  PotentialTable t;
  t.R0_ = R0;
  t.kappa_ = kappa_constant();
  t.lambda_ = kLambdaBound;
  t.vals_.resize(oct.size());
  for (size_t i = 0; i < oct.size(); ++i) t.vals_[i] = double(oct[i]);
  return t;
}

double PotentialTable::octant(int64_t x, int64_t y) const {
  return vals_[size_t(x) * size_t(x + 1) / 2 + size_t(y)];
}

double PotentialTable::operator()(const Site& s) const {
  int64_t x = std::llabs(s.x), y = std::llabs(s.y);
  if (x < y) std::swap(x, y);
  if (x <= R0_) return octant(x, y);
  double r = std::hypot(double(x), double(y));
  return 2.0 / std::numbers::pi * std::log(r) + kappa_;
}

void PotentialTable::save(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path);
  const char magic[8] = {'H', 'A', 'T', 'K', 'E', 'R', '0', '1'};
  std::fwrite(magic, 1, 8, f);
  int64_t r = R0_;
  std::fwrite(&r, 8, 1, f);
  std::fwrite(&kappa_, 8, 1, f);
  std::fwrite(&lambda_, 8, 1, f);
  std::fwrite(vals_.data(), 8, vals_.size(), f);
  std::fclose(f);
}

PotentialTable PotentialTable::load(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, "HATKER01", 8) != 0) {
    std::fclose(f);
    throw std::runtime_error("bad kernel cache header in " + path);
  }
  PotentialTable t;
  int64_t r = 0;
  if (std::fread(&r, 8, 1, f) != 1) throw std::runtime_error("truncated cache");
  t.R0_ = int(r);
  if (std::fread(&t.kappa_, 8, 1, f) != 1) throw std::runtime_error("truncated cache");
  if (std::fread(&t.lambda_, 8, 1, f) != 1) throw std::runtime_error("truncated cache");
  t.vals_.assign(size_t(t.R0_ + 1) * size_t(t.R0_ + 2) / 2, 0.0);
  if (std::fread(t.vals_.data(), 8, t.vals_.size(), f) != t.vals_.size())
    throw std::runtime_error("truncated cache");
  std::fclose(f);
  return t;
}

namespace {

Site random_site_in_annulus(Rng& rng, double rlo, double rhi) {
  for (;;) {
    double R = rhi;
    int64_t x = int64_t(std::floor((2 * rng.uniform() - 1) * (R + 1)));
    int64_t y = int64_t(std::floor((2 * rng.uniform() - 1) * (R + 1)));
    double r = std::hypot(double(x), double(y));
    if (r >= rlo && r <= rhi) return {x, y};
  }
}

std::vector<Site> circle_sites(const Site& c, double r) {
  // {y : |y - c| >= r, some neighbor strictly inside} — the first-exit layer
  // of the open disk D_c(r); separating by construction.
  std::vector<Site> out;
  int64_t R = int64_t(std::ceil(r)) + 1;
  static const Site nb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  auto test = [&](int64_t x, int64_t y) {
    Site s{c.x + x, c.y + y};
    if (norm(s - c) < r) return;
    for (const auto& d : nb)
      if (norm(s + d - c) < r) {
        out.push_back(s);
        return;
      }
  };
  // Members satisfy r <= |s - c| < r + 1, so per column only a narrow band of
  // y values can qualify.
  for (int64_t x = -R; x <= R; ++x) {
    double a2 = r * r - double(x) * double(x);
    double b2 = (r + 1) * (r + 1) - double(x) * double(x);
    if (b2 < 0) continue;
    int64_t ylo = a2 > 0 ? int64_t(std::floor(std::sqrt(a2))) - 1 : 0;
    if (ylo < 0) ylo = 0;
    int64_t yhi = int64_t(std::ceil(std::sqrt(b2))) + 1;
    for (int64_t y = -yhi; y <= -std::max<int64_t>(ylo, 1); ++y) test(x, y);
    for (int64_t y = ylo; y <= yhi; ++y) test(x, y);
  }
  return out;
}

void record(AuditItem& item, double margin) {
  ++item.samples;
  if (item.samples == 1 || margin < item.worst_margin) item.worst_margin = margin;
  if (margin < 0) item.pass = false;
}

}  // namespace

std::vector<AuditItem> audit_kernel_bounds(const PotentialTable& t, long samples,
                                           uint64_t rng_seed) {
  Rng rng(rng_seed);
  const double R0 = t.exact_radius();
  const double pi = std::numbers::pi;
  std::vector<AuditItem> items(7);
  items[0].name = "radial monotonicity at |y| >= 1.06|x|";
  items[1].name = "global bounds (2/pi)log|x| <= a(x) <= 4 log|x|";
  items[2].name = "circle-offset difference <= 4/pi";
  items[3].name = "a(y)-a(x) <= log K for K-comparable radii";
  items[4].name = "perturbation bound |a(x+y)-a(x)| <= 0.7|y|/|x|";
  items[5].name = "two-circle gap 0.56 log(R/r) <= a(x)-a(y) <= log(R/r)";
  items[6].name = "circle-average estimate vs radial derivative";

  for (long it = 0; it < samples; ++it) {
    // (1)
    {
      Site x = random_site_in_annulus(rng, 2.0, R0 / 1.1);
      Site y = random_site_in_annulus(rng, 1.06 * norm(x), R0);
      record(items[0], t(y) - t(x));
    }
    // (2)
    {
      Site x = random_site_in_annulus(rng, 1.0, R0);
      record(items[1], t(x) - 2 / pi * std::log(norm(x)));
      Site x2 = random_site_in_annulus(rng, 2.0, R0);
      record(items[1], 4 * std::log(norm(x2)) - t(x2));
    }
    // (3): r <= R/100, R >= 100; y outside D(R). The tail formula is
    // certified, so y may lie beyond the exact table.
    {
      double R = 100 + rng.uniform() * 900;
      double r = 1 + rng.uniform() * (R / 100 - 1);
      auto ring = circle_sites(kOrigin, r);
      Site z = ring[rng.below(ring.size())];
      Site zp = ring[rng.below(ring.size())];
      Site y = random_site_in_annulus(rng, R + 1, 4 * R);
      record(items[2], 4 / pi - std::fabs(t(y - z) - t(y - zp)));
    }
    // (4)
    {
      double K = 2 + rng.uniform() * 8;
      Site x = random_site_in_annulus(rng, 1.0, R0 / 1.01);
      double lo = std::max(1.0, norm(x) / K), hi = std::min(R0, norm(x) * K);
      if (lo <= hi) {
        Site y = random_site_in_annulus(rng, lo, hi);
        record(items[3], std::log(K) - (t(y) - t(x)));
      }
    }
    // (5)
    {
      Site y = random_site_in_annulus(rng, 10.0, std::max(20.0, R0 / 16.0));
      Site x = random_site_in_annulus(rng, 8 * norm(y), 20 * norm(y));
      record(items[4], 0.7 * norm(y) / norm(x) - std::fabs(t(x + y) - t(x)));
    }
    // (6)
    {
      double r = 10 + rng.uniform() * 20;
      double R = 10 * r * (1 + rng.uniform());
      auto cr = circle_sites(kOrigin, r);
      auto cR = circle_sites(kOrigin, R);
      Site y = cr[rng.below(cr.size())];
      Site x = cR[rng.below(cR.size())];
      double d = t(x) - t(y), bound = std::log(R / r);
      record(items[5], d - 0.56 * bound);
      record(items[5], bound - d);
    }
    // Circle-average estimate: random probability measure mu on C_x(r), r >= 2(|x|+1).
    {
      Site x = random_site_in_annulus(rng, 0.0, 10.0);
      double r = 2 * (norm(x) + 1) * (1 + rng.uniform());
      auto ring = circle_sites(x, r);
      double wsum = 0, asum = 0;
      std::vector<double> w(ring.size());
      for (size_t i = 0; i < ring.size(); ++i) {
        w[i] = rng.uniform();
        wsum += w[i];
      }
      for (size_t i = 0; i < ring.size(); ++i) asum += w[i] / wsum * t(ring[i]);
      double bound = (5 / (2 * pi) + 2 * t.lambda_bound()) * (norm(x) + 1) / r;
      record(items[6], bound - std::fabs(asum - kernel_prime(r)));
    }
  }
  return items;
}

}  // namespace hatlab
