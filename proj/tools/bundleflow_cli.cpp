#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "bundleflow/runs.hpp"
#include "bundleflow/version.hpp"

namespace {

struct FlagSet {
  std::string config_path;
  std::map<std::string, std::string> values;
};

void add_common(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--config", f.config_path,
                  "config file (JSON object or key = value lines)");
  auto opt = [&](const std::string& flag, const std::string& key,
                 const std::string& help) {
    cmd->add_option(flag, f.values[key], help);
  };
  opt("--manifold", "manifold", "torus2 or sphere2");
  opt("--nu", "nu", "viscosity");
  opt("--T", "T", "physical horizon");
  opt("--modes", "modes", "spectral truncation (torus K / sphere L)");
  opt("--paths", "paths", "Monte Carlo paths per grid point");
  opt("--mc-dt", "mc_dt", "Monte Carlo step size");
  opt("--seed", "seed", "RNG seed");
  opt("--workers", "workers", "worker thread count");
  opt("--time-nodes", "time_nodes", "number of time grid nodes");
  opt("--picard-iters", "picard_iters", "Picard iteration cap");
  opt("--picard-tol", "picard_tol", "Picard stopping tolerance");
  opt("--p", "p", "Sobolev exponent (> 2)");
  opt("--laplacian", "laplacian", "bochner or hodge");
  opt("--out", "out_dir", "output directory");
  opt("--compare-reference", "compare_reference",
      "compare against the classical reference solver (true/false)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Navier-Stokes solver on the flat torus and unit "
               "sphere via frame-bundle Monte Carlo"};
  app.set_version_flag("--version", std::string(bundleflow::kVersion));
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const bundleflow::RunConfig&);
  };
  const Cmd cmds[] = {
      {"validate-geometry", "geometry and frame identity report",
       bundleflow::run_validate_geometry},
      {"heat", "linear backward solve against the exact heat flow",
       bundleflow::run_heat},
      {"ns-solve", "Picard fixed-point Navier-Stokes solve",
       bundleflow::run_ns_solve},
      {"ns-validate", "Navier-Stokes solve with reference comparison",
       bundleflow::run_ns_validate},
      {"flow-diagnostics", "variational flow moment and Jacobian reports",
       bundleflow::run_flow_diagnostics},
      {"contraction-probe", "fixed-point map contraction ratios",
       bundleflow::run_contraction_probe},
  };

  std::map<std::string, FlagSet> flags;
  std::map<std::string, const Cmd*> dispatch;
  for (const auto& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, flags[c.name]);
    dispatch[c.name] = &c;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const FlagSet& f = flags[sub->get_name()];

  static const std::map<std::string, std::string> kFlagOf = {
      {"manifold", "--manifold"},     {"nu", "--nu"},
      {"T", "--T"},                   {"modes", "--modes"},
      {"paths", "--paths"},           {"mc_dt", "--mc-dt"},
      {"seed", "--seed"},             {"workers", "--workers"},
      {"time_nodes", "--time-nodes"}, {"picard_iters", "--picard-iters"},
      {"picard_tol", "--picard-tol"}, {"p", "--p"},
      {"laplacian", "--laplacian"},   {"out_dir", "--out"},
      {"compare_reference", "--compare-reference"}};

  bundleflow::RunConfig cfg;
  try {
    if (const char* env = std::getenv("BUNDLEFLOW_OUT"))
      cfg.set("out_dir", env, "env");
    if (!f.config_path.empty()) bundleflow::load_config_file(cfg, f.config_path);
    for (const auto& [key, value] : f.values)
      if (sub->count(kFlagOf.at(key))) cfg.set(key, value, "flag");
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    return dispatch[sub->get_name()]->run(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  }
}
