#pragma once

#include <optional>
#include <string>
#include <vector>

#include "firming/design.hpp"
#include "firming/dynamics.hpp"
#include "firming/gp.hpp"
#include "firming/objectives.hpp"

namespace firming {

// Continuation value at one step: either the fitted q-value surrogate or, at
// the last step, the terminal SoC penalty evaluated analytically.
struct Continuation {
    const gp::GPModel* surrogate = nullptr;
    const BatterySpec* terminal = nullptr;

    double value(double x, double i) const;
    double dvalue_di(double x, double i) const;
};

struct StepDiagnostics {
    double control_lml = 0.0;
    double control_rmse = 0.0;
    double q_lml = 0.0;
    double q_rmse = 0.0;
    int mle_iterations = 0;
};

// Output of the backward pass: per-step control-map emulators, per-step
// q-value emulators (the last step's continuation is the terminal penalty and
// is not emulated), the training domains used, and solve metadata.
struct Policy {
    int K = 0;
    double dt = 0.0;
    BatterySpec battery;
    Objective objective;
    std::vector<gp::GPModel> control;   // size K, Matern-3/2
    std::vector<gp::GPModel> q_value;   // size K-1 (index k -> q at step k), Matern-5/2
    std::vector<Interval> domains;      // size K+1 step X-ranges
    std::uint64_t seed = 0;
    std::vector<StepDiagnostics> diagnostics;
    double solve_seconds = 0.0;

    // projected feedback rate at step k
    double control_at(int k, double x, double i) const;
    // raw emulator output before projection
    double raw_control_at(int k, double x, double i) const;
    Continuation continuation_at(int k) const;
    // one-step Bellman value at the initial state through the step-0 q-value
    double bellman_value(double x0, double i0) const;
};

// Clip into the admissible rate window; idempotent.
double project_control(double b_raw, double i, const BatterySpec& battery, double dt);

// Realized one-step target f dt + continuation, using the projected emulated
// control at (x_next, i_next).
double q_target(double x_next, double i_next, int k, const gp::GPModel& control_map,
                const Continuation& cont, const Objective& objective,
                const BatterySpec& battery, double dt);

// Unconstrained minimizer of f(x, b, M_k) dt + continuation(x, I(b)) over
// [2 b_min, 2 b_max]. Smooth objectives solve the first-order condition per
// efficiency branch (roots bracketed by a sign scan, refined by Brent) with
// b = 0 as the third candidate; kinked objectives fall back to a dense grid
// with local refinement.
double pointwise_control(double x, double i, int k, const Continuation& cont,
                         const Objective& objective, const BatterySpec& battery, double dt);

struct EmulatorFit {
    gp::GPModel model;
    gp::MleResult mle;
};

// MLE-fitted GP regression of unconstrained optimized rates on the control design.
EmulatorFit fit_control_emulator(const Eigen::MatrixXd& design, const Eigen::VectorXd& b_dagger,
                                 const gp::KernelSpec& init, double init_noise2,
                                 int n_restarts, int max_iters = 60);

// Backward dynamic programming pass: for k = K-1..0 build the control design,
// optimize pointwise against the current continuation, fit the control map,
// then (k > 0) simulate the replicated value design one step forward, evaluate
// realized targets with the projected emulated control, pre-average replicates
// and fit the next q-value surrogate. GP hyperparameters warm-start from the
// previous step.
Policy backward_solve(const WindModel& model, double x0, const BatterySpec& battery,
                      const Objective& objective, const DesignConfig& cfg, int K);

}  // namespace firming
