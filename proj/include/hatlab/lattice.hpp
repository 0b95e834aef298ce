#pragma once
// Lattice geometry: sites, configurations, boundaries, exposure, canonical
// classes under the symmetries of Z^2.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace hatlab {

struct Site {
  int64_t x = 0;
  int64_t y = 0;

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;  // lexicographic
  Site operator+(const Site& o) const { return {x + o.x, y + o.y}; }
  Site operator-(const Site& o) const { return {x - o.x, y - o.y}; }
};

inline constexpr Site kOrigin{0, 0};
// Runaway-simulation guard; exceeding it is a reported error.
inline constexpr int64_t kCoordGuard = int64_t(1) << 30;

double norm(const Site& s);                 // Euclidean |s|
int64_t linf(const Site& s);                // max(|x|,|y|)
int64_t l1(const Site& s);                  // |x|+|y|
uint64_t site_key(const Site& s);           // injective within the guard

// Finite, duplicate-free set of sites. Immutable after construction.
class Config {
 public:
  Config() = default;
  explicit Config(std::vector<Site> sites);   // dedups, sorts, guards

  const std::vector<Site>& sites() const { return sites_; }
  size_t n() const { return sites_.size(); }
  bool contains(const Site& s) const { return set_.count(site_key(s)) != 0; }
  bool empty() const { return sites_.empty(); }

  Config with(const Site& s) const;       // U ∪ {s}
  Config without(const Site& s) const;    // U \ {s}
  Config translated(const Site& v) const;

  // Bounding box [min_x..max_x] x [min_y..max_y].
  Site min_corner() const;
  Site max_corner() const;

  friend bool operator==(const Config& a, const Config& b) {
    return a.sites_ == b.sites_;
  }

 private:
  std::vector<Site> sites_;                  // sorted
  std::unordered_set<uint64_t> set_;
};

struct CanonicalClass {
  Config representative;  // canonical position
  uint64_t hash = 0;      // stable digest of the representative
  // Index d (0..7) of the dihedral map and the shift such that
  // representative = dihedral(d, U + shift_pre) translated to min corner 0.
  int dihedral_index = 0;

  friend bool operator==(const CanonicalClass& a, const CanonicalClass& b) {
    return a.representative == b.representative;
  }
};

Site apply_dihedral(int d, const Site& s);   // d in 0..7
int inverse_dihedral(int d);

Config make_line(int64_t n);
double diameter(const Config& U);

struct Boundaries {
  std::vector<Site> exterior;  // non-members adjacent to U
  std::vector<Site> interior;  // members adjacent to U^c
};
Boundaries boundaries(const Config& U);

// Sites of U reachable from outside the padded bounding box through
// (U \ {x})^c; equals the support of harmonic measure.
std::vector<Site> exposed_sites(const Config& U);

enum class IsoClass { NonIso, Iso };
IsoClass classify(const Config& U);

CanonicalClass canonicalize(const Config& U);

// Sites 8-adjacent to B and joined to infinity by a 4-path avoiding B.
std::vector<Site> star_exterior_boundary(const Config& B);

// Plain-text ("x y" per line) and JSON array-of-pairs round trips.
std::string config_to_text(const Config& U);
Config config_from_text(const std::string& text);
std::string config_to_json(const Config& U);
Config config_from_json(const std::string& text);

}  // namespace hatlab
