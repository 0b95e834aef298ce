#include "hatlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "json.hpp"

namespace hatlab {

double norm(const Site& s) { return std::hypot(double(s.x), double(s.y)); }
int64_t linf(const Site& s) { return std::max(std::llabs(s.x), std::llabs(s.y)); }
int64_t l1(const Site& s) { return std::llabs(s.x) + std::llabs(s.y); }

uint64_t site_key(const Site& s) {
  return (uint64_t(uint32_t(int32_t(s.x))) << 32) | uint64_t(uint32_t(int32_t(s.y)));
}

static void guard(const Site& s) {
  if (std::llabs(s.x) > kCoordGuard || std::llabs(s.y) > kCoordGuard)
    throw std::runtime_error("lattice: coordinate guard (2^30) exceeded");
}

Config::Config(std::vector<Site> sites) : sites_(std::move(sites)) {
  for (const auto& s : sites_) guard(s);
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  set_.reserve(sites_.size() * 2);
  for (const auto& s : sites_) set_.insert(site_key(s));
}

Config Config::with(const Site& s) const {
  auto v = sites_;
  v.push_back(s);
  return Config(std::move(v));
}

Config Config::without(const Site& s) const {
  std::vector<Site> v;
  v.reserve(sites_.size());
  for (const auto& t : sites_)
    if (!(t == s)) v.push_back(t);
  return Config(std::move(v));
}

Config Config::translated(const Site& v) const {
  std::vector<Site> out;
  out.reserve(sites_.size());
  for (const auto& s : sites_) out.push_back(s + v);
  return Config(std::move(out));
}

Site Config::min_corner() const {
  Site m{INT64_MAX, INT64_MAX};
  for (const auto& s : sites_) {
    m.x = std::min(m.x, s.x);
    m.y = std::min(m.y, s.y);
  }
  return m;
}

Site Config::max_corner() const {
  Site m{INT64_MIN, INT64_MIN};
  for (const auto& s : sites_) {
    m.x = std::max(m.x, s.x);
    m.y = std::max(m.y, s.y);
  }
  return m;
}

Site apply_dihedral(int d, const Site& s) {
  // d = r + 4f: rotation by r*90 degrees, then reflection across x-axis if f.
  Site t = s;
  switch (d & 3) {
    case 0: break;
    case 1: t = {-s.y, s.x}; break;
    case 2: t = {-s.x, -s.y}; break;
    case 3: t = {s.y, -s.x}; break;
  }
  if (d & 4) t = {t.x, -t.y};
  return t;
}

int inverse_dihedral(int d) {
  for (int e = 0; e < 8; ++e) {
    Site probe{3, 1};
    if (apply_dihedral(e, apply_dihedral(d, probe)) == probe &&
        apply_dihedral(e, apply_dihedral(d, Site{1, 2})) == Site{1, 2})
      return e;
  }
  return 0;  // unreachable
}

Config make_line(int64_t n) {
  if (n < 1) throw std::invalid_argument("make_line: n must be positive");
  std::vector<Site> v;
  v.reserve(size_t(n));
  for (int64_t y = 0; y < n; ++y) v.push_back({0, y});
  return Config(std::move(v));
}

double diameter(const Config& U) {
  if (U.empty()) throw std::invalid_argument("diameter: empty configuration");
  double best = 0;
  const auto& s = U.sites();
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = i + 1; j < s.size(); ++j)
      best = std::max(best, norm(s[i] - s[j]));
  return best;
}

static const Site kNbr[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
static const Site kNbr8[8] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                              {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};

Boundaries boundaries(const Config& U) {
  if (U.empty()) throw std::invalid_argument("boundaries: empty configuration");
  Boundaries b;
  std::unordered_set<uint64_t> ext;
  for (const auto& s : U.sites()) {
    bool interior_bd = false;
    for (const auto& d : kNbr) {
      Site t = s + d;
      if (!U.contains(t)) {
        interior_bd = true;
        if (ext.insert(site_key(t)).second) b.exterior.push_back(t);
      }
    }
    if (interior_bd) b.interior.push_back(s);
  }
  std::sort(b.exterior.begin(), b.exterior.end());
  return b;
}

namespace {

// Flood fill over the complement of `blocked` inside the bounding box of U
// padded by `pad`, seeded from the whole box border. Returns the visited set.
std::unordered_set<uint64_t> flood_from_infinity(const Config& blocked,
                                                 int64_t pad) {
  Site lo = blocked.min_corner(), hi = blocked.max_corner();
  lo.x -= pad; lo.y -= pad; hi.x += pad; hi.y += pad;
  std::unordered_set<uint64_t> seen;
  std::deque<Site> q;
  auto push = [&](const Site& s) {
    if (s.x < lo.x || s.x > hi.x || s.y < lo.y || s.y > hi.y) return;
    if (blocked.contains(s)) return;
    if (seen.insert(site_key(s)).second) q.push_back(s);
  };
  for (int64_t x = lo.x; x <= hi.x; ++x) {
    push({x, lo.y});
    push({x, hi.y});
  }
  for (int64_t y = lo.y; y <= hi.y; ++y) {
    push({lo.x, y});
    push({hi.x, y});
  }
  while (!q.empty()) {
    Site s = q.front();
    q.pop_front();
    for (const auto& d : kNbr) push(s + d);
  }
  return seen;
}

}  // namespace

std::vector<Site> exposed_sites(const Config& U) {
  if (U.empty()) throw std::invalid_argument("exposed_sites: empty configuration");
  auto reach = flood_from_infinity(U, 2);
  std::vector<Site> out;
  for (const auto& s : U.sites()) {
    for (const auto& d : kNbr) {
      if (reach.count(site_key(s + d))) {
        out.push_back(s);
        break;
      }
    }
  }
  return out;
}

IsoClass classify(const Config& U) {
  for (const auto& s : exposed_sites(U))
    for (const auto& d : kNbr)
      if (U.contains(s + d)) return IsoClass::NonIso;
  return IsoClass::Iso;
}

static uint64_t fnv1a(const std::vector<Site>& v) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&](int64_t a) {
    for (int i = 0; i < 8; ++i) {
      h ^= uint64_t(a >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const auto& s : v) {
    mix(s.x);
    mix(s.y);
  }
  return h;
}

CanonicalClass canonicalize(const Config& U) {
  if (U.empty()) throw std::invalid_argument("canonicalize: empty configuration");
  std::vector<Site> best;
  int best_d = 0;
  for (int d = 0; d < 8; ++d) {
    std::vector<Site> img;
    img.reserve(U.n());
    for (const auto& s : U.sites()) img.push_back(apply_dihedral(d, s));
    Site lo{INT64_MAX, INT64_MAX};
    for (const auto& s : img) {
      lo.x = std::min(lo.x, s.x);
      lo.y = std::min(lo.y, s.y);
    }
    for (auto& s : img) s = s - lo;
    std::sort(img.begin(), img.end());
    if (d == 0 || img < best) {
      best = std::move(img);
      best_d = d;
    }
  }
  CanonicalClass c;
  c.hash = fnv1a(best);
  c.representative = Config(std::move(best));
  c.dihedral_index = best_d;
  return c;
}

std::vector<Site> star_exterior_boundary(const Config& B) {
  if (B.empty())
    throw std::invalid_argument("star_exterior_boundary: empty configuration");
  auto reach = flood_from_infinity(B, 2);
  std::unordered_set<uint64_t> out_set;
  std::vector<Site> out;
  for (const auto& s : B.sites()) {
    for (const auto& d : kNbr8) {
      Site t = s + d;
      if (B.contains(t)) continue;
      if (!reach.count(site_key(t))) continue;
      if (out_set.insert(site_key(t)).second) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string config_to_text(const Config& U) {
  std::ostringstream os;
  for (const auto& s : U.sites()) os << s.x << " " << s.y << "\n";
  return os.str();
}

Config config_from_text(const std::string& text) {
  std::istringstream is(text);
  std::vector<Site> v;
  int64_t x, y;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (!(ls >> x >> y)) throw std::runtime_error("config_from_text: bad line: " + line);
    v.push_back({x, y});
  }
  return Config(std::move(v));
}

std::string config_to_json(const Config& U) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : U.sites()) j.push_back({s.x, s.y});
  return j.dump();
}

Config config_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::vector<Site> v;
  for (const auto& p : j) v.push_back({p.at(0).get<int64_t>(), p.at(1).get<int64_t>()});
  return Config(std::move(v));
}

}  // namespace hatlab
