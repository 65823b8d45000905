#pragma once

// Run configuration with per-key provenance. Resolution order is
// defaults < config file < command-line flags; the run manifest records the
// winning source for every key. Config files are either a JSON object or
// flat `key = value` lines; unknown keys are rejected.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bundleflow {

struct RunConfig {
  std::string manifold = "torus2";  // torus2 | sphere2
  double nu = 0.1;
  double T = 0.1;
  int modes = 0;          // torus max mode K or sphere degree L; 0 = command default
  int paths = 20000;
  double mc_dt = 5e-3;
  uint64_t seed = 1;
  int workers = 1;
  int time_nodes = 3;
  int picard_iters = 12;
  double picard_tol = 1e-3;
  double p = 4.0;
  std::string laplacian = "bochner";  // bochner | hodge
  std::string out_dir = ".";
  bool compare_reference = true;

  std::map<std::string, std::string> provenance;

  // Applies one key; throws std::invalid_argument for unknown keys or
  // malformed/invalid values.
  void set(const std::string& key, const std::string& value,
           const std::string& source);
  void validate() const;

  bool is_sphere() const { return manifold == "sphere2"; }
  bool is_hodge() const { return laplacian == "hodge"; }
};

// Parses a JSON object or `key = value` lines and applies all entries with
// source "file".
void load_config_file(RunConfig& cfg, const std::string& path);

}  // namespace bundleflow
