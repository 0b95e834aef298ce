#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Sparse>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hatlab/lattice.hpp"
#include "hatlab/potential.hpp"
#include "hatlab/rng.hpp"

using namespace hatlab;

namespace {

const PotentialTable& table32() {
  static PotentialTable t = PotentialTable::build(32);
  return t;
}

// Independent construction of the kernel: discrete Poisson problem on a box
// with the asymptotic values pinned on the rim. The rim error is O(1/M^2), so
// interior agreement to ~1e-4 validates the column-recursion build.
std::vector<double> grid_oracle(int64_t M, const std::vector<Site>& probes) {
  auto id = [&](int64_t x, int64_t y) {
    return int((x + M - 1) + (2 * M - 1) * (y + M - 1));
  };
  const int m = int((2 * M - 1) * (2 * M - 1));
  const double kappa = table32().kappa();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int64_t x = -M + 1; x <= M - 1; ++x)
    for (int64_t y = -M + 1; y <= M - 1; ++y) {
      int i = id(x, y);
      trip.emplace_back(i, i, 4.0);
      if (x == 0 && y == 0) b(i) -= 4.0;
      static const Site nb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& d : nb) {
        int64_t ux = x + d.x, uy = y + d.y;
        if (std::llabs(ux) <= M - 1 && std::llabs(uy) <= M - 1)
          trip.emplace_back(i, id(ux, uy), -1.0);
        else
          b(i) += 2.0 / std::numbers::pi * std::log(std::hypot(double(ux), double(uy))) +
                  kappa;
      }
    }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  Eigen::VectorXd u = solver.solve(b);
  std::vector<double> out;
  for (const auto& p : probes) out.push_back(u(id(p.x, p.y)));
  return out;
}

}  // namespace

TEST_CASE("closed-form values near the origin") {
  const PotentialTable& t = table32();
  const double pi = std::numbers::pi;
  CHECK(t(kOrigin) == 0.0);
  CHECK(t({1, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t({1, 1}) == doctest::Approx(4.0 / pi).epsilon(1e-14));
  CHECK(t({2, 0}) == doctest::Approx(4.0 - 8.0 / pi).epsilon(1e-14));
  CHECK(t({2, 2}) == doctest::Approx(4.0 / pi * (1.0 + 1.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("dihedral symmetry of lookups") {
  const PotentialTable& t = table32();
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Site s{int64_t(rng.below(61)) - 30, int64_t(rng.below(61)) - 30};
    for (int d = 1; d < 8; ++d) CHECK(t(apply_dihedral(d, s)) == t(s));
  }
}

TEST_CASE("discrete harmonicity with a unit source at the origin") {
  const PotentialTable& t = table32();
  static const Site nb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int64_t x = -15; x <= 15; ++x)
    for (int64_t y = -15; y <= 15; ++y) {
      double avg = 0;
      for (const auto& d : nb) avg += 0.25 * t(Site{x, y} + d);
      double target = (x == 0 && y == 0) ? 1.0 : 0.0;
      CHECK(std::fabs(avg - t({x, y}) - target) < 1e-11);
    }
}

TEST_CASE("exact values match an independent grid solve") {
  std::vector<Site> probes;
  for (int64_t x = 0; x <= 8; ++x)
    for (int64_t y = 0; y <= x; ++y) probes.push_back({x, y});
  auto oracle = grid_oracle(48, probes);
  for (size_t i = 0; i < probes.size(); ++i)
    CHECK(table32()(probes[i]) == doctest::Approx(oracle[i]).epsilon(5e-4).scale(1.0));
}

TEST_CASE("tail constant and certified asymptotic error") {
  const PotentialTable& t = table32();
  const double gamma = 0.57721566490153286;
  CHECK(t.kappa() ==
        doctest::Approx((2 * gamma + 3 * std::log(2.0)) / std::numbers::pi)
            .epsilon(1e-12));
  CHECK(t.lambda_bound() == doctest::Approx(0.06882));
  for (const Site& s : {Site{30, 0}, Site{25, 17}, Site{22, 22}, Site{31, 5}}) {
    double tail = 2.0 / std::numbers::pi * std::log(norm(s)) + t.kappa();
    CHECK(std::fabs(t(s) - tail) <= t.lambda_bound() / (norm(s) * norm(s)));
  }
}

TEST_CASE("lookups are continuous across the exact radius") {
  // Just outside the exact disk the tail formula takes over; the jump is
  // bounded by the certified asymptotic error.
  const PotentialTable& t = table32();
  double lam = t.lambda_bound();
  for (int64_t y = 0; y <= 32; ++y) {
    double inside = t({32, y});
    double tail = 2.0 / std::numbers::pi * std::log(norm({32, y})) + t.kappa();
    CHECK(std::fabs(inside - tail) <= lam / (norm({32, y}) * norm({32, y})));
  }
}

TEST_CASE("save and load round-trip") {
  const PotentialTable& t = table32();
  std::string path = "potential_roundtrip.bin";
  t.save(path);
  PotentialTable u = PotentialTable::load(path);
  CHECK(u.exact_radius() == t.exact_radius());
  CHECK(u.kappa() == t.kappa());
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Site s{int64_t(rng.below(81)) - 40, int64_t(rng.below(81)) - 40};
    CHECK(u(s) == t(s));
  }
  std::remove(path.c_str());
  CHECK_THROWS(PotentialTable::load("no_such_table.bin"));
}

TEST_CASE("build rejects out-of-range radii") {
  CHECK_THROWS(PotentialTable::build(3));
  CHECK_THROWS(PotentialTable::build(5000));
}

TEST_CASE("inequality audits pass on sampled inputs") {
  auto items = audit_kernel_bounds(table32(), 500, 3);
  CHECK(items.size() == 7);
  for (const auto& it : items) {
    INFO(it.name);
    CHECK(it.pass);
    CHECK(it.samples > 0);
  }
}
