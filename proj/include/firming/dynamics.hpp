#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>
#include <vector>

#include "firming/rng.hpp"

namespace firming {

// Per-step coefficients of the bounded mean-reverting generation SDE
//   dX = alpha (m - X) dt + sigma sqrt(X (x_max - X)) dW,  X in [0, x_max],
// discretized by Euler-Maruyama with post-step clipping to the domain.
struct JacobiParams {
    std::vector<double> alpha;  // mean-reversion rate per step, > 0
    std::vector<double> m;      // mean-reversion level per step
    std::vector<double> sigma;  // volatility per step, > 0
    double x_max = 0.0;         // generation cap
    double dt = 0.0;            // step length, hours

    static JacobiParams constant(double alpha, double m, double sigma, double x_max,
                                 double dt, int steps);
    void validate() const;
    int steps() const { return static_cast<int>(alpha.size()); }
};

// Hourly model fitted from actual/forecast generation-ratio data: forecast-decile
// bins with per-bin mean-reversion and volatility, bootstrap residual banks, and
// point masses for boundary forecasts (F = 0 and F = 1).
struct CalibratedModel {
    std::vector<double> bin_edges;                    // 11 nondecreasing edges spanning [0,1]
    std::vector<double> alpha_r;                      // per-bin mean reversion
    std::vector<double> sigma_r;                      // per-bin residual volatility
    std::vector<std::vector<double>> residual_banks;  // standardized residuals per bin
    std::optional<double> p_zero;                     // P(stay at 0 | forecast 0)
    std::optional<double> p_one;                      // P(stay at 1 | forecast 1)

    void validate() const;
    int n_bins() const { return static_cast<int>(alpha_r.size()); }
    // nondecreasing forecast-to-bin map, ties assigned to the lower bin; 1-based
    int bin_of(double forecast) const;
};

// Storage constraints: SoC capacity window, power rating, efficiency, and the
// terminal SoC target with its quadratic penalty weight.
struct BatterySpec {
    double i_min = 0.0;            // MWh
    double i_max = 0.0;            // MWh
    double b_min = 0.0;            // MW, < 0
    double b_max = 0.0;            // MW, > 0
    double eta = 1.0;              // charge/discharge efficiency, (0, 1]
    double i_target = 0.0;         // terminal SoC target, MWh
    double terminal_penalty = 0.0; // >= 0

    static BatterySpec from_capacity(double i_cap, double soc_min, double soc_max,
                                     double b_min, double b_max, double eta,
                                     double i_target, double terminal_penalty);
    void validate() const;
    double i_mid() const { return (i_max - i_min) / 2.0; }
};

struct ControlRange {
    double lo = 0.0;
    double hi = 0.0;
};

// One Euler step of the generation SDE; result clipped to [0, x_max].
double jacobi_step(double x, int k, const JacobiParams& p, double z);

// Feasible charge/discharge rates at SoC i such that the next SoC stays in
// [i_min, i_max]; always contains 0.
ControlRange admissible_range(double i, const BatterySpec& spec, double dt);

// SoC transition i -> i + (eta b 1{b>0} + b/eta 1{b<0}) dt. Rejects rates outside
// the admissible range by more than 1e-9; result clamped into [i_min, i_max].
double soc_step(double i, double b, const BatterySpec& spec, double dt);

// The raw SoC transition without feasibility checks, used when probing
// unconstrained controls.
inline double soc_transition(double i, double b, double eta, double dt) {
    return b > 0.0 ? i + eta * b * dt : i + b / eta * dt;
}

// One step of the calibrated hourly model given the hour's forecast. Bootstraps
// a residual from the forecast's bin; boundary forecasts use the point-mass
// mixture (exactly 0 or 1 with the estimated probability, otherwise a residual
// pushing inward). Result clipped to [0, 1].
double calibrated_step(double x, double forecast, const CalibratedModel& model,
                       RandomStream& rng);

// Exogenous generation dynamics over one operating day: either the stationary
// (or per-step) Jacobi parameters or a calibrated model paired with the day's
// hourly forecast trajectory.
struct WindModel {
    struct Calibrated {
        CalibratedModel model;
        std::vector<double> forecast;  // one value per step
    };
    std::variant<JacobiParams, Calibrated> dyn;
    double dt = 1.0;

    static WindModel jacobi(JacobiParams p);
    static WindModel calibrated(CalibratedModel m, std::vector<double> forecast);

    int steps() const;
    double x_max() const;
    double step(double x, int k, RandomStream& rng) const;
    bool is_calibrated() const { return std::holds_alternative<Calibrated>(dyn); }
    const std::vector<double>& forecast() const { return std::get<Calibrated>(dyn).forecast; }
};

// n_paths independent trajectories of length K+1, row per path. Path p uses the
// RNG stream (seed, p), so the matrix is reproducible and independent of
// evaluation order.
Eigen::MatrixXd simulate_paths(const WindModel& model, double x0, int n_paths, int K,
                               std::uint64_t seed);

}  // namespace firming
