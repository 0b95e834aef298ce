// hatlab <experiment> [--config FILE] [--seed S] [--threads K]
//        [--out PREFIX] [--format csv|json] [per-experiment flags]
// Exit codes: 0 success, 2 audit failure, 1 error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hatlab/lab.hpp"

using nlohmann::json;

namespace {

struct FlagSpec {
  std::string name;   // CLI flag, e.g. "--steps"
  std::string key;    // params key, e.g. "steps"
  char kind;          // 'i' integer, 'r' real, 's' string
  std::string help;
};

std::vector<FlagSpec> flags_for(const std::string& exp) {
  if (exp == "simulate")
    return {{"--init", "init", 's', "line:N, pair:D, pair:N,D, or x,y;x,y;..."},
            {"--steps", "steps", 'i', "chain steps"},
            {"--thin", "thin", 'i', "record every thin-th step"},
            {"--radius", "radius", 'i', "exact kernel table radius"}};
  if (exp == "collapse-scaling")
    return {{"--n", "n", 'i', "particles"},
            {"--d-list", "d_list", 's', "comma-separated separations"},
            {"--replicas", "replicas", 'i', "replicas per separation"},
            {"--r-stop", "r_stop", 'i', "collapse diameter (0 = max(5,2n))"},
            {"--step-cap", "step_cap", 'i', "per-replica step budget"},
            {"--radius", "radius", 'i', "exact kernel table radius"}};
  if (exp == "stationary-tail")
    return {{"--n", "n", 'i', "particles"},
            {"--steps", "steps", 'i', "chain steps"},
            {"--radius", "radius", 'i', "exact kernel table radius"}};
  if (exp == "diffusivity")
    return {{"--n", "n", 'i', "particles"},
            {"--steps", "steps", 'i', "chain steps"},
            {"--bootstrap", "bootstrap", 'i', "bootstrap resamples"},
            {"--radius", "radius", 'i', "exact kernel table radius"}};
  if (exp == "spiral-sweep")
    return {{"--n-list", "n_list", 's', "comma-separated spiral sizes"}};
  if (exp == "audit-bounds")
    return {{"--samples", "samples", 'i', "kernel bound samples"},
            {"--sets", "sets", 'i', "random sets for the escape bound"},
            {"--entrance-walks", "entrance_walks", 'i', "walks per start"},
            {"--radius", "radius", 'i', "exact kernel table radius"}};
  if (exp == "kernel-table")
    return {{"--radius", "radius", 'i', "exact kernel table radius"}};
  if (exp == "hm")
    return {{"--set", "set", 's', "configuration spec"},
            {"--radius", "radius", 'i', "exact kernel table radius"}};
  if (exp == "escape")
    return {{"--set", "set", 's', "configuration spec"},
            {"--start", "start", 's', "start site x,y (in the set)"},
            {"--r", "r", 'r', "circle radius"},
            {"--radius", "radius", 'i', "exact kernel table radius"}};
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HAT chain simulation laboratory"};
  app.require_subcommand(1);

  struct SubState {
    std::string config_file;
    uint64_t seed = 1;
    int threads = 0;
    std::string out;
    std::string format = "csv";
    std::map<std::string, long long> ints;
    std::map<std::string, double> reals;
    std::map<std::string, std::string> strs;
    std::map<std::string, CLI::Option*> opts;
  };
  std::map<std::string, std::shared_ptr<SubState>> states;

  for (const std::string& exp : hatlab::experiment_names()) {
    auto* sub = app.add_subcommand(exp, "run the " + exp + " experiment");
    auto st = std::make_shared<SubState>();
    states[exp] = st;
    st->opts["--config"] = sub->add_option("--config", st->config_file, "JSON config file");
    st->opts["--seed"] = sub->add_option("--seed", st->seed, "base RNG seed");
    st->opts["--threads"] = sub->add_option("--threads", st->threads, "worker threads");
    st->opts["--out"] = sub->add_option("--out", st->out, "output path prefix");
    st->opts["--format"] =
        sub->add_option("--format", st->format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    for (const FlagSpec& f : flags_for(exp)) {
      switch (f.kind) {
        case 'i': st->opts[f.name] = sub->add_option(f.name, st->ints[f.key], f.help); break;
        case 'r': st->opts[f.name] = sub->add_option(f.name, st->reals[f.key], f.help); break;
        case 's': st->opts[f.name] = sub->add_option(f.name, st->strs[f.key], f.help); break;
      }
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    auto* sub = app.get_subcommands().at(0);
    const std::string exp = sub->get_name();
    const auto& st = *states.at(exp);

    hatlab::ExperimentConfig cfg;
    cfg.experiment = exp;
    cfg.out_prefix = "hatlab_" + exp;

    // Config file first, command-line flags override.
    if (!st.config_file.empty()) {
      std::ifstream in(st.config_file);
      if (!in) throw std::runtime_error("cannot read config file " + st.config_file);
      json doc = json::parse(in);
      if (doc.contains("seed")) cfg.seed = doc["seed"].get<uint64_t>();
      if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
      if (doc.contains("output")) cfg.out_prefix = doc["output"].get<std::string>();
      if (doc.contains("format")) cfg.format = doc["format"].get<std::string>();
      if (doc.contains("experiment") && doc["experiment"].get<std::string>() != exp)
        throw std::runtime_error("config file is for experiment " +
                                 doc["experiment"].get<std::string>());
      if (doc.contains("params")) cfg.params = doc["params"];
    }

    if (st.opts.at("--seed")->count()) cfg.seed = st.seed;
    if (st.opts.at("--out")->count()) cfg.out_prefix = st.out;
    if (st.opts.at("--format")->count()) cfg.format = st.format;
    if (st.opts.at("--threads")->count()) {
      cfg.threads = st.threads;
    } else if (cfg.threads == 0) {
      const char* env = std::getenv("HATLAB_THREADS");
      cfg.threads = env ? std::atoi(env) : 1;
      if (cfg.threads < 1) cfg.threads = 1;
    }

    for (const FlagSpec& f : flags_for(exp)) {
      if (!st.opts.at(f.name)->count()) continue;
      switch (f.kind) {
        case 'i': cfg.params[f.key] = st.ints.at(f.key); break;
        case 'r': cfg.params[f.key] = st.reals.at(f.key); break;
        case 's': cfg.params[f.key] = st.strs.at(f.key); break;
      }
    }

    int rc = hatlab::run_experiment(cfg);
    if (rc == 2) std::cerr << "audit failure (see " << cfg.out_prefix << ".csv)\n";
    return rc;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
