#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>

#include "doctest.h"
#include "hatlab/lattice.hpp"
#include "hatlab/rng.hpp"

using namespace hatlab;

namespace {

Config random_config(Rng& rng, int n, int64_t box) {
  std::vector<Site> s;
  while (int(s.size()) < n) {
    Site c{int64_t(rng.below(uint64_t(2 * box + 1))) - box,
           int64_t(rng.below(uint64_t(2 * box + 1))) - box};
    if (std::find(s.begin(), s.end(), c) == s.end()) s.push_back(c);
  }
  return Config(s);
}

}  // namespace

TEST_CASE("site metrics and ordering") {
  CHECK(norm({3, 4}) == doctest::Approx(5.0));
  CHECK(linf({-3, 2}) == 3);
  CHECK(l1({-3, 2}) == 5);
  CHECK(Site{0, 1} < Site{1, -5});
  CHECK(site_key({7, -9}) != site_key({-9, 7}));
}

TEST_CASE("config construction dedups, sorts, and guards") {
  Config u({{1, 0}, {0, 0}, {1, 0}});
  CHECK(u.n() == 2);
  CHECK(u.sites()[0] == Site{0, 0});
  CHECK(u.contains({1, 0}));
  CHECK(!u.contains({2, 0}));
  CHECK(u.with({2, 2}).n() == 3);
  CHECK(u.without({1, 0}).n() == 1);
  CHECK(u.translated({5, -5}).contains({6, -5}));
  CHECK(u.min_corner() == Site{0, 0});
  CHECK(u.max_corner() == Site{1, 0});
  CHECK_THROWS(Config({{kCoordGuard + 1, 0}}));
}

TEST_CASE("make_line shape") {
  Config l = make_line(4);
  CHECK(l.n() == 4);
  for (int64_t j = 0; j < 4; ++j) CHECK(l.contains({0, j}));
  CHECK(diameter(l) == doctest::Approx(3.0));
}

TEST_CASE("boundaries agree with the direct definition") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Config u = random_config(rng, 2 + int(rng.below(5)), 6);
    Boundaries b = boundaries(u);
    CHECK(std::is_sorted(b.exterior.begin(), b.exterior.end()));
    CHECK(std::is_sorted(b.interior.begin(), b.interior.end()));
    static const Site nb[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    std::set<Site> ext, in;
    for (const auto& s : u.sites())
      for (const auto& d : nb) {
        if (!u.contains(s + d)) {
          ext.insert(s + d);
          in.insert(s);
        }
      }
    CHECK(std::vector<Site>(ext.begin(), ext.end()) == b.exterior);
    CHECK(std::vector<Site>(in.begin(), in.end()) == b.interior);
  }
}

TEST_CASE("exposed sites: full square hides the center") {
  std::vector<Site> sq;
  for (int64_t x = 0; x < 3; ++x)
    for (int64_t y = 0; y < 3; ++y) sq.push_back({x, y});
  Config u(sq);
  auto ex = exposed_sites(u);
  CHECK(ex.size() == 8);
  CHECK(std::find(ex.begin(), ex.end(), Site{1, 1}) == ex.end());
}

TEST_CASE("exposed sites: a line is fully exposed") {
  Config l = make_line(5);
  CHECK(exposed_sites(l).size() == 5);
}

TEST_CASE("classify: line is NonIso, scattered singletons are Iso") {
  CHECK(classify(make_line(3)) == IsoClass::NonIso);
  CHECK(classify(Config({{0, 0}, {10, 0}, {-10, 3}})) == IsoClass::Iso);
  // A pair of adjacent sites among far singletons still has a non-singleton
  // exposed component.
  CHECK(classify(Config({{0, 0}, {0, 1}, {10, 0}})) == IsoClass::NonIso);
}

TEST_CASE("dihedral maps compose with their inverses") {
  Rng rng(3);
  for (int d = 0; d < 8; ++d)
    for (int trial = 0; trial < 20; ++trial) {
      Site s{int64_t(rng.below(41)) - 20, int64_t(rng.below(41)) - 20};
      CHECK(apply_dihedral(inverse_dihedral(d), apply_dihedral(d, s)) == s);
    }
}

TEST_CASE("canonicalize is invariant under translation and symmetry") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    Config u = random_config(rng, 2 + int(rng.below(5)), 8);
    CanonicalClass base = canonicalize(u);
    CHECK(base.representative.min_corner() == Site{0, 0});
    for (int d = 0; d < 8; ++d) {
      std::vector<Site> mapped;
      for (const auto& s : u.sites()) mapped.push_back(apply_dihedral(d, s));
      Config v = Config(mapped).translated(
          {int64_t(rng.below(31)) - 15, int64_t(rng.below(31)) - 15});
      CanonicalClass cc = canonicalize(v);
      CHECK(cc.hash == base.hash);
      CHECK(cc.representative == base.representative);
    }
  }
}

TEST_CASE("canonical hashes separate distinct small classes") {
  std::set<uint64_t> hashes;
  hashes.insert(canonicalize(make_line(2)).hash);
  hashes.insert(canonicalize(make_line(3)).hash);
  hashes.insert(canonicalize(Config({{0, 0}, {1, 1}})).hash);
  hashes.insert(canonicalize(Config({{0, 0}, {0, 1}, {1, 0}})).hash);
  CHECK(hashes.size() == 4);
}

TEST_CASE("star exterior boundary of a singleton and a diagonal pair") {
  auto single = star_exterior_boundary(Config({{0, 0}}));
  CHECK(single.size() == 8);
  // A diagonal chain is *-connected, so its star boundary never includes
  // enclosed sites; for a 2-chain every 8-neighbor reaches infinity.
  auto pair = star_exterior_boundary(Config({{0, 0}, {1, 1}}));
  CHECK(pair.size() == 12);
  for (const auto& s : pair) {
    CHECK(!(s == Site{0, 0}));
    CHECK(!(s == Site{1, 1}));
  }
}

TEST_CASE("text and json serialization round-trip") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    Config u = random_config(rng, 1 + int(rng.below(6)), 9);
    CHECK(config_from_text(config_to_text(u)) == u);
    CHECK(config_from_json(config_to_json(u)) == u);
  }
  CHECK_THROWS(config_from_text("1 2\nbogus"));
  CHECK_THROWS(config_from_json("[[1,2],[3]]"));
}
