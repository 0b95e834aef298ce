#include "hatlab/harmonic.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "hatlab/bigkernel.hpp"

namespace hatlab {

namespace {

const Site kNb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

size_t index_of(const std::vector<Site>& sorted, const Site& s) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), s);
  if (it == sorted.end() || !(*it == s)) throw std::logic_error("site not indexed");
  return size_t(it - sorted.begin());
}

Eigen::MatrixXd kernel_matrix(const std::vector<Site>& z, const PotentialTable& t) {
  const size_t k = z.size(), K = k + 1;
  Eigen::MatrixXd M(K, K);
  for (size_t i = 0; i < k; ++i) {
    M(long(i), long(i)) = 0;
    for (size_t j = i + 1; j < k; ++j)
      M(long(i), long(j)) = M(long(j), long(i)) = t(z[i] - z[j]);
    M(long(i), long(k)) = M(long(k), long(i)) = 1;
  }
  M(long(k), long(k)) = 0;
  return M;
}

}  // namespace

double HittingSolution::evaluate(size_t y_idx, const Site& v,
                                 const PotentialTable& t) const {
  const auto& z = target.sites();
  if (target.contains(v)) return index_of(z, v) == y_idx ? 1.0 : 0.0;
  double h = alpha[y_idx];
  const size_t k = z.size();
  for (size_t w = 0; w < k; ++w) h += beta[y_idx * k + w] * t(v - z[w]);
  return h;
}

std::vector<double> HittingSolution::distribution(const Site& v,
                                                  const PotentialTable& t) const {
  const auto& z = target.sites();
  const size_t k = z.size();
  std::vector<double> out(k, 0.0);
  if (target.contains(v)) {
    out[index_of(z, v)] = 1.0;
    return out;
  }
  std::vector<double> av(k);
  for (size_t w = 0; w < k; ++w) av[w] = t(v - z[w]);
  for (size_t y = 0; y < k; ++y) {
    double h = alpha[y];
    for (size_t w = 0; w < k; ++w) h += beta[y * k + w] * av[w];
    out[y] = h;
  }
  return out;
}

HittingSolution solve_hitting(const Config& A, const PotentialTable& table) {
  const auto& z = A.sites();
  const size_t k = z.size();
  if (k == 0) throw std::invalid_argument("solve_hitting: empty set");
  if (k > kSolverCap) throw std::invalid_argument("solve_hitting: set exceeds solver cap");
  const size_t K = k + 1;

  Eigen::MatrixXd M = kernel_matrix(z, table);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rcond = lu.rcond();

  // Columns: RHS e_y (the delta boundary data) extended by the zero-sum row.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(long(K), long(k));
  B.topLeftCorner(long(k), long(k)).setIdentity();
  Eigen::MatrixXd X = lu.solve(B);
  X += lu.solve(B - M * X);  // one step of iterative refinement

  if (!(rcond > 1e-15) || !X.allFinite())
    throw std::runtime_error("solve_hitting: ill-conditioned system, rcond=" +
                             std::to_string(rcond));

  HittingSolution sol;
  sol.target = A;
  sol.rcond = rcond;
  sol.alpha.resize(k);
  sol.beta.resize(k * k);
  for (size_t y = 0; y < k; ++y) {
    sol.alpha[y] = X(long(k), long(y));
    for (size_t w = 0; w < k; ++w) sol.beta[y * k + w] = X(long(w), long(y));
  }
  return sol;
}

BoundaryFit solve_boundary(const Config& A, const std::vector<double>& data,
                           const PotentialTable& table) {
  const auto& z = A.sites();
  const size_t k = z.size();
  if (data.size() != k) throw std::invalid_argument("solve_boundary: data size mismatch");
  if (k == 0 || k > kSolverCap) throw std::invalid_argument("solve_boundary: bad set size");
  const size_t K = k + 1;

  Eigen::MatrixXd M = kernel_matrix(z, table);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(long(K));
  for (size_t i = 0; i < k; ++i) b(long(i)) = data[i];
  Eigen::VectorXd u = lu.solve(b);
  u += lu.solve(b - M * u);
  if (!(lu.rcond() > 1e-15) || !u.allFinite())
    throw std::runtime_error("solve_boundary: ill-conditioned system");

  BoundaryFit fit;
  fit.alpha = u(long(k));
  fit.beta.resize(k);
  for (size_t w = 0; w < k; ++w) fit.beta[w] = u(long(w));
  return fit;
}

double BoundaryFit::operator()(const Config& A, const Site& v,
                               const PotentialTable& t) const {
  const auto& z = A.sites();
  double h = alpha;
  for (size_t w = 0; w < z.size(); ++w) h += beta[w] * t(v - z[w]);
  return h;
}

std::vector<double> harmonic_measure(const Config& A, const PotentialTable& table,
                                     bool crosscheck) {
  HittingSolution sol = solve_hitting(A, table);
  const auto& z = A.sites();
  const size_t k = z.size();
  if (!crosscheck) return sol.alpha;

  // One-step identity: precompute g_w = sum_j a(z_j - z0) beta_{j,w} so each
  // E_u a(S_tau - z0) costs O(k) instead of O(k^2).
  const Site z0 = z[0];
  std::vector<double> az0(k), g(k, 0.0);
  double c0 = 0;
  // The identity is exact for the true kernel; outside the exact radius the
  // table's tail approximation is only certified to lambda/R0^2 per lookup,
  // so widen the tolerance when any lookup leaves the exact disk.
  const int64_t R0 = table.exact_radius();
  bool far = false;
  for (size_t i = 0; i < k && !far; ++i)
    for (size_t j = i + 1; j < k; ++j)
      if (linf(z[i] - z[j]) > R0 - 1) { far = true; break; }
  const double tol =
      far ? 1e-7 + 32.0 * double(k) * table.lambda_bound() / double(R0 * R0)
          : 1e-7;
  for (size_t j = 0; j < k; ++j) az0[j] = table(z[j] - z0);
  for (size_t j = 0; j < k; ++j) {
    c0 += az0[j] * sol.alpha[j];
    for (size_t w = 0; w < k; ++w) g[w] += az0[j] * sol.beta[j * k + w];
  }
  for (size_t i = 0; i < k; ++i) {
    if (sol.alpha[i] <= 1e-12) continue;
    double acc = 0;
    for (const auto& d : kNb) {
      Site u = z[i] + d;
      if (A.contains(u)) continue;
      double eu = c0;
      for (size_t w = 0; w < k; ++w) eu += g[w] * table(u - z[w]);
      acc += table(u - z0) - eu;
    }
    acc *= 0.25;
    if (std::fabs(acc - sol.alpha[i]) > tol)
      throw std::runtime_error("harmonic_measure: one-step identity disagrees by " +
                               std::to_string(std::fabs(acc - sol.alpha[i])));
  }
  return sol.alpha;
}

std::vector<Site> rasterize_circle(const Site& center, double r) {
  if (!(r >= 1)) throw std::invalid_argument("rasterize_circle: r must be >= 1");
  std::vector<Site> out;
  int64_t R = int64_t(std::ceil(r)) + 1;
  for (int64_t x = -R; x <= R; ++x)
    for (int64_t y = -R; y <= R; ++y) {
      Site s{center.x + x, center.y + y};
      if (norm(s - center) < r) continue;
      for (const auto& d : kNb)
        if (norm(s + d - center) < r) {
          out.push_back(s);
          break;
        }
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Site> fattening_boundary(const Config& A, double d) {
  if (!(d >= 1)) throw std::invalid_argument("fattening_boundary: d must be >= 1");
  const auto& z = A.sites();
  Site lo = A.min_corner(), hi = A.max_corner();
  int64_t pad = int64_t(std::ceil(d)) + 2;
  int64_t w = hi.x - lo.x + 1 + 2 * pad, h = hi.y - lo.y + 1 + 2 * pad;
  if (w * h > 40'000'000) throw std::invalid_argument("fattening_boundary: region too large");

  auto within = [&](const Site& s) {
    for (const auto& a : z)
      if (norm(s - a) <= d) return true;
    return false;
  };
  std::vector<Site> out;
  for (int64_t x = lo.x - pad; x <= hi.x + pad; ++x)
    for (int64_t y = lo.y - pad; y <= hi.y + pad; ++y) {
      Site s{x, y};
      if (within(s)) continue;
      for (const auto& dir : kNb)
        if (within(s + dir)) {
          out.push_back(s);
          break;
        }
    }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// First-step decomposition of P_x(tau_target < tau_A) for x in A: the walk
// must leave x into a non-A site and from there hit the target set first.
double escape_from(const Config& A, const Site& x, const std::vector<Site>& target,
                   const PotentialTable& table) {
  if (!A.contains(x)) throw std::invalid_argument("escape: start not in the set");
  std::vector<Site> all = A.sites();
  all.insert(all.end(), target.begin(), target.end());
  Config B(std::move(all));
  if (B.n() != A.n() + target.size())
    throw std::invalid_argument("escape: target intersects the set");

  const auto& zb = B.sites();
  std::unordered_set<uint64_t> tset;
  for (const auto& s : target) tset.insert(site_key(s));
  std::vector<double> data(zb.size(), 0.0);
  for (size_t i = 0; i < zb.size(); ++i)
    if (tset.count(site_key(zb[i]))) data[i] = 1.0;

  BoundaryFit fit = solve_boundary(B, data, table);
  double acc = 0;
  for (const auto& d : kNb) {
    Site u = x + d;
    if (A.contains(u)) continue;
    acc += tset.count(site_key(u)) ? 1.0 : fit(B, u, table);
  }
  return std::clamp(0.25 * acc, 0.0, 1.0);
}

}  // namespace

double escape_probability(const EscapeQuery& q, const PotentialTable& table) {
  return escape_from(q.set, q.start, fattening_boundary(q.set, q.distance), table);
}

double circle_escape(const Config& A, const Site& x, double r,
                     const PotentialTable& table) {
  for (const auto& s : A.sites())
    if (norm(s) >= r - 1)
      throw std::invalid_argument("circle_escape: set not strictly inside the circle");
  return escape_from(A, x, rasterize_circle(kOrigin, r), table);
}

CircleRatioReport circle_hitting_ratio(double r, double R, const PotentialTable& table,
                                       int sampled_starts) {
  Config A(rasterize_circle(kOrigin, r));
  HittingSolution sol = solve_hitting(A, table);
  const size_t k = A.n();

  CircleRatioReport rep;
  bool first = true;
  for (int s = 0; s < sampled_starts; ++s) {
    double th = 2 * std::numbers::pi * (s + 0.5) / sampled_starts;
    Site x{int64_t(std::llround((R + 2) * std::cos(th))),
           int64_t(std::llround((R + 2) * std::sin(th)))};
    std::vector<double> dist = sol.distribution(x, table);
    for (size_t y = 0; y < k; ++y) {
      if (sol.alpha[y] <= 1e-12) continue;
      double ratio = dist[y] / sol.alpha[y];
      if (first || ratio < rep.min_ratio) rep.min_ratio = ratio;
      if (first || ratio > rep.max_ratio) rep.max_ratio = ratio;
      first = false;
    }
  }
  rep.pass = !first && rep.min_ratio >= 0.93 && rep.max_ratio <= 1.04;
  return rep;
}

double two_point(const Site& x, const Site& y, const Site& z,
                 const PotentialTable& table) {
  if (x == y) throw std::invalid_argument("two_point: coincident poles");
  return (table(x - z) - table(y - z)) / (2 * table(x - y)) + 0.5;
}

double tunnel_value(int L, int i) {
  if (L < 2 || i < 1 || i > L) throw std::invalid_argument("tunnel_value: bad arguments");
  if (i == 1) return 0.0;
  if (i == L) return 1.0;
  // f(j) = f(j-1)/4 + f(j+1)/4 on the corridor, f(1)=0, f(L)=1; the other
  // half of the mass is absorbed by the walls. Thomas elimination.
  const int m = L - 2;  // unknowns f(2..L-1)
  std::vector<double> c(m, -0.25), d(m, 0.0);
  d[m - 1] = 0.25;
  double diag = 1.0;
  c[0] /= diag;
  d[0] /= diag;
  for (int j = 1; j < m; ++j) {
    double piv = 1.0 - (-0.25) * c[j - 1];
    c[j] /= piv;
    d[j] = (d[j] - (-0.25) * d[j - 1]) / piv;
  }
  std::vector<double> f(m);
  f[m - 1] = d[m - 1];
  for (int j = m - 2; j >= 0; --j) f[j] = d[j] - c[j] * f[j + 1];
  return f[i - 2];
}

namespace {

// Diamond-spiral arm, inside out. The arm walks L1 spheres counterclockwise
// in diagonal steps and moves out one unit at the N, W and S corners (pitch 3
// per turn), so the complement is a single width-2 staircase channel winding
// from the arm's tip to the origin. A *-connected chain cannot be crossed by
// a 4-path, and in the channel every site has two wall neighbors and two
// channel neighbors, so traversing it costs two steps per arm site.
std::vector<Site> spiral_sequence(size_t count) {
  std::vector<Site> seq;
  seq.reserve(count);
  Site p{1, 0};
  while (seq.size() < count) {
    seq.push_back(p);
    const int64_t r = l1(p);
    if (p.x == 0 && p.y == r)        p = {-1, r};            // N corner: out
    else if (p.x == -r && p.y == 0)  p = {-r, -1};           // W corner: out
    else if (p.x == 0 && p.y == -r)  p = {1, -r};            // S corner: out
    else if (p.x > 0 && p.y >= 0)    p = {p.x - 1, p.y + 1}; // NE face
    else if (p.x < 0 && p.y > 0)     p = {p.x - 1, p.y - 1}; // NW face
    else if (p.x < 0 && p.y <= 0)    p = {p.x + 1, p.y - 1}; // SW face
    else                             p = {p.x + 1, p.y + 1}; // SE face
  }
  return seq;
}

}  // namespace

Spiral build_spiral(int n) {
  if (n < 4) throw std::invalid_argument("build_spiral: n must be >= 4");
  std::vector<Site> sites = spiral_sequence(size_t(n) - 1);
  sites.push_back(kOrigin);
  Spiral sp;
  sp.sites = Config(std::move(sites));
  if (sp.sites.n() != size_t(n)) throw std::logic_error("build_spiral: duplicate site");

  // Shortest 4-path from far away to the origin avoiding A \ {o}, counted in
  // sites including both endpoints.
  Config blocked = sp.sites.without(kOrigin);
  Site lo = blocked.min_corner() - Site{2, 2}, hi = blocked.max_corner() + Site{2, 2};
  auto inside = [&](const Site& s) {
    return s.x >= lo.x && s.x <= hi.x && s.y >= lo.y && s.y <= hi.y;
  };
  std::unordered_map<uint64_t, long> dist;
  std::queue<Site> q;
  for (int64_t x = lo.x; x <= hi.x; ++x)
    for (int64_t y : {lo.y, hi.y}) {
      Site s{x, y};
      if (!blocked.contains(s) && dist.emplace(site_key(s), 1).second) q.push(s);
    }
  for (int64_t y = lo.y; y <= hi.y; ++y)
    for (int64_t x : {lo.x, hi.x}) {
      Site s{x, y};
      if (!blocked.contains(s) && dist.emplace(site_key(s), 1).second) q.push(s);
    }
  while (!q.empty()) {
    Site s = q.front();
    q.pop();
    long d = dist[site_key(s)];
    if (s == kOrigin) {
      sp.gamma_length = d;
      return sp;
    }
    for (const auto& dir : kNb) {
      Site u = s + dir;
      if (!inside(u) || blocked.contains(u)) continue;
      if (dist.emplace(site_key(u), d + 1).second) q.push(u);
    }
  }
  throw std::logic_error("build_spiral: origin sealed off");
}

double spiral_log_rate(const Spiral& sp) {
  const auto& z = sp.sites.sites();
  const size_t k = z.size(), K = k + 1;
  int64_t R0 = 4;
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j) R0 = std::max(R0, linf(z[i] - z[j]));

  // The measure decays like (2+sqrt(3))^{-2n}; solve with enough headroom.
  const unsigned bits = 96 + unsigned(2.6 * double(R0)) + unsigned(4 * k);
  std::vector<Big> oct = kernel_octant_big(int(R0), bits);

  std::vector<std::vector<Big>> M(K, std::vector<Big>(K + 1, Big(0)));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j)
      M[i][j] = i == j ? Big(0) : big_kernel_at(oct, z[i].x - z[j].x, z[i].y - z[j].y);
    M[i][K] = 0;
    M[i][k] = 1;
    M[k][i] = 1;
  }
  M[k][k] = 0;
  M[index_of(z, kOrigin)][K] = 1;  // RHS: delta at the origin

  // Gaussian elimination with partial pivoting on the augmented system.
  for (size_t col = 0; col < K; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < K; ++r)
      if (abs(M[r][col]) > abs(M[piv][col])) piv = r;
    std::swap(M[col], M[piv]);
    if (M[col][col] == 0) throw std::runtime_error("spiral_log_rate: singular system");
    for (size_t r = 0; r < K; ++r) {
      if (r == col) continue;
      Big f = M[r][col] / M[col][col];
      if (f == 0) continue;
      for (size_t c = col; c <= K; ++c) M[r][c] -= f * M[col][c];
    }
  }
  Big alpha = M[k][K] / M[k][k];
  if (!(alpha > 0)) throw std::runtime_error("spiral_log_rate: nonpositive measure");
  return double(-log(alpha)) / double(k);
}

double rectangle_exit(double phi, double w, double l) {
  if (!(w >= 2) || !(l >= w)) throw std::invalid_argument("rectangle_exit: need 2 <= w <= l");
  const double ex = std::cos(phi), ey = std::sin(phi), eps = 1e-9;
  auto in_rec = [&](const Site& s, double len) {
    double t = double(s.x) * ex + double(s.y) * ey;
    double u = -double(s.x) * ey + double(s.y) * ex;
    return t >= -w - eps && t <= len + eps && std::fabs(u) <= w / 2 + eps;
  };

  int64_t box = int64_t(std::ceil(l + 2 * w)) + 2;
  std::vector<Site> rec;
  for (int64_t x = -box; x <= box; ++x)
    for (int64_t y = -box; y <= box; ++y)
      if (in_rec({x, y}, l)) rec.push_back({x, y});
  std::unordered_map<uint64_t, long> idx;
  for (size_t i = 0; i < rec.size(); ++i) idx[site_key(rec[i])] = long(i);
  if (!idx.count(site_key(kOrigin))) throw std::logic_error("rectangle_exit: origin outside");

  // Absorbing-chain solve of (4I - A) h = (# success neighbors), success
  // being the extension sites of Rec+ \ Rec adjacent to Rec; exits through
  // shared boundary sites of Rec and Rec+ end both excursions at once and
  // fail the strict comparison.
  const long m = long(rec.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (long i = 0; i < m; ++i) {
    trip.emplace_back(i, i, 4.0);
    for (const auto& d : kNb) {
      Site u = rec[size_t(i)] + d;
      auto it = idx.find(site_key(u));
      if (it != idx.end())
        trip.emplace_back(i, it->second, -1.0);
      else if (in_rec(u, l + w))
        b(i) += 1.0;
    }
  }
  Eigen::SparseMatrix<double> S(m, m);
  S.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(S);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("rectangle_exit: factorization failed");
  Eigen::VectorXd h = solver.solve(b);
  return std::clamp(h(idx[site_key(kOrigin)]), 0.0, 1.0);
}

}  // namespace hatlab
