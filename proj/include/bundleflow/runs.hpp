#pragma once

// CLI run drivers: each writes CSV artifacts plus a run manifest into the
// configured output directory and returns a process exit code
// (0 pass, 1 tolerance failure, 2 usage/config error, 3 numerical abort).

#include "bundleflow/config.hpp"

namespace bundleflow {

int run_validate_geometry(const RunConfig& cfg);
int run_heat(const RunConfig& cfg);
int run_ns_solve(const RunConfig& cfg);
int run_ns_validate(const RunConfig& cfg);
int run_flow_diagnostics(const RunConfig& cfg);
int run_contraction_probe(const RunConfig& cfg);

}  // namespace bundleflow
