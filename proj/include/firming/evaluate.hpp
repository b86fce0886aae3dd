#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "firming/dynamics.hpp"
#include "firming/objectives.hpp"

namespace firming {

// feedback rate before projection: (k, x, i) -> MW
using ControlMap = std::function<double(int, double, double)>;

struct Trajectory {
    std::vector<double> x;       // generation per step, length K
    std::vector<double> b;       // applied (projected) rate, length K
    std::vector<double> i;       // SoC, length K+1
    std::vector<double> o;       // net output x - b, length K
    std::vector<double> costs;   // stepwise cost * dt, length K
    double terminal = 0.0;       // terminal SoC penalty
    double total = 0.0;
    std::uint64_t seed_id = 0;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

struct BandReport {
    std::vector<double> x_lo, x_hi;  // hourly quantiles of X - F
    std::vector<double> o_lo, o_hi;  // hourly quantiles of O - F
};

struct MetricsReport {
    Estimate value;
    std::optional<double> dr;       // replay-mode deviation reduction
    std::optional<double> ecr;      // coverage of replay actuals by scenarios
    Estimate edr;                   // mean of per-path deviation reductions
    Estimate ebl;                   // years
    Estimate ecv;
    BandReport bands;
    int n_paths = 0;
};

// Monte Carlo rollout of a feedback policy: the rate is projected into the
// admissible window at every step, SoC advances through soc_step, and costs
// accumulate as sum_k f dt + terminal penalty. Path p uses RNG stream
// (seed, p).
std::vector<Trajectory> rollout(const ControlMap& policy, const WindModel& model,
                                const BatterySpec& battery, const Objective& objective,
                                double x0, double i0, int n_paths, int K,
                                std::uint64_t seed);

// Deterministic replay of a recorded generation path through the policy.
Trajectory replay(const ControlMap& policy, const std::vector<double>& actual,
                  const BatterySpec& battery, const Objective& objective, double i0,
                  double dt);

Estimate value_estimate(const std::vector<Trajectory>& trajectories);

// (sum|A-F| - sum|O-F|) / sum|A-F| * 100; empty when the baseline deviation is 0
std::optional<double> deviation_reduction(const std::vector<double>& actual,
                                          const std::vector<double>& firmed,
                                          const std::vector<double>& forecast);

// mean over paths of the per-path deviation reduction of O against the
// unfirmed X baseline
Estimate expected_deviation_reduction(const std::vector<Trajectory>& trajectories,
                                      const std::vector<double>& forecast);

// mean over paths of the rainflow-implied lifetime in years; non-cycling paths
// contribute the 100-year cap
Estimate expected_battery_life(const std::vector<Trajectory>& trajectories, double i_cap);

// mean over paths of sum_k max(O_k - Mbar_k, 0)
Estimate expected_cumulative_violation(const std::vector<Trajectory>& trajectories,
                                       const std::vector<double>& thresholds);

// hourly empirical quantile bands of X - F and O - F
BandReport quantile_bands(const std::vector<Trajectory>& trajectories,
                          const std::vector<double>& forecast, double lo_level = 0.1,
                          double hi_level = 0.9);

MetricsReport compute_metrics(const std::vector<Trajectory>& trajectories,
                              const std::vector<double>& forecast, double i_cap,
                              const std::vector<double>& thresholds);

}  // namespace firming
