#pragma once

#include "netsbm/panel.hpp"
#include "netsbm/report.hpp"
#include "netsbm/robust.hpp"
#include "netsbm/solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsbm {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every DMU of one family failed to solve; carries the family diagnostic.
class FamilyAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct UncertaintyConfig {
    std::vector<double> layer_fractions = {0.10, 0.20};
    // One radius/budget per constraint family; the CLI default copies a
    // single global value everywhere.
    double omega_inputs = 1.0, omega_intermediates = 1.0, omega_desirable = 1.0,
           omega_undesirable = 1.0;
    double gamma_inputs = 1.0, gamma_intermediates = 1.0, gamma_desirable = 1.0,
           gamma_undesirable = 1.0;
    PolyhedralSpec polyhedral;
};

struct RunConfig {
    std::string panel_path;
    PanelSchema schema;
    ImputeOptions impute;
    double epsilon_shift = 1.0;
    std::vector<ModelFamily> families = {ModelFamily::Crisp};
    UncertaintyConfig uncertainty;
    SolveParams solver;
    double tol_eff = kDefaultTolEff;
    std::string output_dir = ".";
    int parallelism = 1;
    std::string friedman_scope = "overall";
};

/// Parse the JSON run config (see README for the schema).
RunConfig load_run_config(const std::string& path);

/// Cheap validation: config invariants plus a full load+preprocess of the
/// panel. Returns a human-readable summary.
std::string check_config(const RunConfig& config);

/// Solve the (DMU x family x stage) grid, possibly in parallel, and
/// aggregate deterministically in DMU order.
EfficiencyReport run_batch(const RunConfig& config);

} // namespace netsbm
