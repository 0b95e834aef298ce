#pragma once
// Experiment orchestration: schema-checked configs, replica parallelism,
// deterministic CSV/JSON/SVG emission.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "hatlab/lattice.hpp"
#include "hatlab/potential.hpp"

namespace hatlab {

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json params = nlohmann::json::object();
  uint64_t seed = 1;
  int threads = 1;
  std::string out_prefix = "hatlab";
  std::string format = "csv";  // csv | json
};

std::vector<std::string> experiment_names();

// Validates params against the experiment's schema (unknown keys and type
// mismatches are errors), runs, and writes PREFIX.* files. Returns 0 on
// success, 2 when an audit reports a violated bound; throws on bad input.
int run_experiment(const ExperimentConfig& cfg);

// "line:N", "pair:N:D" (N-1 stacked sites plus one at distance D), or an
// explicit "x,y;x,y;..." list.
Config parse_set_spec(const std::string& spec);

// Escape lower bound P_x(tau_{C(kb)} < tau_A) >= H_A(x) / (4 log(kb)) on
// random sets with n <= 6; one exact solve per set.
AuditItem audit_escape_lower_bound(const PotentialTable& table, int sets,
                                   uint64_t seed);
// Near-uniformity of hitting C(10) from afar, ratios within [0.93, 1.04].
AuditItem audit_circle_ratio(const PotentialTable& table);
// (log P)/(l/w) spread across aspect ratios at most a factor 3.
AuditItem audit_rectangle_exit();
// Conditional entrance measure on C(10) dominates c * uniform for a fitted
// c > 0, sampled at eps = 1/100, R = 10 eps^-2 by accelerated walks.
AuditItem audit_entrance_measure(uint64_t seed, long walks_per_start);

}  // namespace hatlab
