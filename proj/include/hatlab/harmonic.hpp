#pragma once
// Exact finite-linear-algebra solvers for hitting distributions, harmonic
// measure from infinity, escape probabilities, and closed-form special cases.

#include <cstdint>
#include <vector>

#include "hatlab/lattice.hpp"
#include "hatlab/potential.hpp"

namespace hatlab {

inline constexpr size_t kSolverCap = 2000;

// Representation of P_v(S_{tau_A} = y) as the bounded combination
//   h_y(v) = alpha_y + sum_w beta_{y,w} a(v - w),  sum_w beta_{y,w} = 0,
// pinned by h_y(z) = delta_{z=y} on A. alpha_y is the harmonic measure of A
// from infinity.
struct HittingSolution {
  Config target;                 // indexed sites z_1..z_k = target.sites()
  std::vector<double> alpha;     // k
  std::vector<double> beta;      // k*k, row y: beta[y*k + w]
  double rcond = 0;              // reciprocal condition estimate of the LU

  // P_v(S_{tau_A} = y_idx); returns the exact delta when v is in A.
  double evaluate(size_t y_idx, const Site& v, const PotentialTable& t) const;
  // Full hitting distribution from v (length k).
  std::vector<double> distribution(const Site& v, const PotentialTable& t) const;
};

HittingSolution solve_hitting(const Config& A, const PotentialTable& table);

// alpha from solve_hitting; when crosscheck is set, every positive entry is
// recomputed through the one-step identity
//   H_A(x) = (1/4) sum_{u ~ x, u not in A} (a(u - z0) - E_u a(S_{tau_A} - z0))
// and the two must agree within 1e-7.
std::vector<double> harmonic_measure(const Config& A, const PotentialTable& table,
                                     bool crosscheck = true);

// Generic single-boundary-value solve: h(z) = data_z on A, bounded at
// infinity. Returns alpha plus the beta coefficients of the combination.
struct BoundaryFit {
  double alpha = 0;
  std::vector<double> beta;  // per site of A
  double operator()(const Config& A, const Site& v, const PotentialTable& t) const;
};
BoundaryFit solve_boundary(const Config& A, const std::vector<double>& data,
                           const PotentialTable& table);

struct EscapeQuery {
  Config set;       // A
  Site start;       // x in A
  double distance;  // d >= 1
};

// P_x(tau_{boundary of the d-fattening} < tau_A), exact.
double escape_probability(const EscapeQuery& q, const PotentialTable& table);

// P_x(tau_{C(r)} < tau_A), exact; x in A, C(r) disjoint from A.
double circle_escape(const Config& A, const Site& x, double r,
                     const PotentialTable& table);

// First-exit layer of the open disk of radius r about `center`: the sites
// with |s - center| >= r having a neighbor strictly inside. Separating.
std::vector<Site> rasterize_circle(const Site& center, double r);

// Exterior boundary sites of the Euclidean d-fattening of A.
std::vector<Site> fattening_boundary(const Config& A, double d);

struct CircleRatioReport {
  double min_ratio = 0;
  double max_ratio = 0;
  bool pass = false;  // all ratios within [0.93, 1.04]
};
// Ratios H_{C(r)}(x, y) / H_{C(r)}(y) over sampled far starts x near C(R).
CircleRatioReport circle_hitting_ratio(double r, double R,
                                       const PotentialTable& table,
                                       int sampled_starts = 16);

// Closed form P_z(sigma_y < sigma_x) = (a(x-z) - a(y-z)) / (2 a(x-y)) + 1/2.
double two_point(const Site& x, const Site& y, const Site& z,
                 const PotentialTable& table);

// Tridiagonal solve of f(1) = 0, f(L) = 1, f(i) = f(i+1)/4 + f(i-1)/4.
double tunnel_value(int L, int i);

struct Spiral {
  Config sites;          // A_n, origin included
  long gamma_length = 0; // sites on the shortest admissible path, by BFS
};
Spiral build_spiral(int n);

// -(1/n) log H_{A_n}(o) for a spiral, solved in extended precision (the
// measure decays like (2+sqrt(3))^{-2n} and underflows the double solver).
double spiral_log_rate(const Spiral& sp);

// Exact absorbing-chain solve for the rotated-rectangle exit probability
// P_o(tau_{dRec} < tau_{dRec+}), Rec = Rec(phi, w, l), Rec+ = Rec(phi, w, l+w).
double rectangle_exit(double phi, double w, double l);

}  // namespace hatlab
