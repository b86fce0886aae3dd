#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "firming/design.hpp"
#include "firming/dynamics.hpp"
#include "firming/evaluate.hpp"
#include "firming/objectives.hpp"
#include "firming/solver.hpp"

namespace firming {

// Parsed and validated run configuration. The JSON schema is strict: unknown
// keys are rejected, cross-field consistency (duration vs capacity) is
// enforced at load time, and referenced files must exist.
struct RunConfig {
    // model
    bool use_jacobi = true;
    double jacobi_alpha = 0.5;
    double jacobi_m = 5.0;
    double jacobi_sigma = 0.2;
    double x_max = 10.0;
    double x0 = 5.0;
    std::string calibrated_file;          // calibrated mode
    std::vector<double> forecast;         // per-step forecast / dispatch target source

    // battery
    BatterySpec battery;
    double i_cap = 0.0;
    double soc_min = 0.0;
    double soc_max = 1.0;
    double i0 = 0.0;

    // objective
    ObjectiveKind objective_kind = ObjectiveKind::Quadratic;
    double lambda_bl = 0.0;
    double lambda_cm = 0.0;
    double lq_c1 = 0.0;
    double lq_c2 = 0.0;
    double threshold_factor = 1.05;
    std::vector<double> target;           // empty: defaults to forecast / mean level

    // design
    DesignConfig design;

    // run
    int K = 24;
    double dt = 1.0;
    int n_paths = 2000;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    nlohmann::json canonical;             // post-default normal form, hashed into artifacts

    static RunConfig load(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j);

    std::string config_hash() const;      // fnv-1a of the canonical form
    WindModel wind_model() const;         // loads the calibrated model file when needed
    Objective objective() const;
    std::vector<double> target_or_default() const;
};

// Subcommand runners; each writes its artifact tree under cfg.out_dir (or the
// given paths) and returns the primary artifact path.
std::string run_calibrate(const std::string& data_csv, const std::string& out_path, int bins);
std::string run_solve(const RunConfig& cfg, const std::string& out_path);
MetricsReport run_rollout(const RunConfig& cfg, const std::string& policy_path,
                          int n_paths, const std::optional<std::string>& replay_csv,
                          const std::string& out_dir);
std::string run_lq(const RunConfig& cfg, bool sweep_c, bool fine_grid,
                   const std::string& out_dir);

struct SweepRow {
    double grid_value = 0.0;
    MetricsReport metrics;
};
std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::string& param,
                                const std::vector<double>& grid, const std::string& out_dir);

}  // namespace firming
