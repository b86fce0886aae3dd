#pragma once

#include <array>
#include <vector>

#include "firming/dynamics.hpp"

namespace firming {

// Soft-constrained linear-quadratic approximation: quadratic firming cost plus
// c1 b^2 + c2 (i - i_mid)^2 penalties, 100%-efficient storage, and the same
// generation SDE coefficients as the full problem.
struct LQParams {
    double c1 = 0.0;
    double c2 = 0.0;
    double m = 0.0;                 // constant mean-reversion level
    std::vector<double> target;     // M_k per control step
    std::vector<double> alpha;      // per control step
    std::vector<double> sigma;      // per control step
    double x_max = 0.0;
    double dt = 0.0;
    double i_mid = 0.0;
    double i_target = 0.0;
    double terminal_penalty = 0.0;

    static LQParams from(const JacobiParams& wind, const BatterySpec& battery, double c1,
                         double c2, std::vector<double> target);
    void validate() const;
    double kappa() const { return 1.0 / (1.0 + c1); }
    int steps() const { return static_cast<int>(target.size()); }
    double horizon() const { return steps() * dt; }
    int step_of(double t) const;
    double target_at(double t) const { return target[static_cast<std::size_t>(step_of(t))]; }
};

// Grids of the six backward-ODE coefficient functions on [0, T].
struct RiccatiSolution {
    double T = 0.0;
    double h = 0.0;                       // grid spacing
    int sub_per_step = 0;                 // grid nodes per control step
    std::array<std::vector<double>, 6> p; // node values, index 0 -> P1

    int nodes() const { return static_cast<int>(p[0].size()); }
    double node_time(int j) const { return j * h; }
    // linear interpolation of P_{i+1} at time t
    double value(int i, double t) const;
    // dP/dt from the stored grid, 4th-order central differences (one-sided
    // stencils near the ends of each smooth piece)
    double node_deriv(int i, int j) const;
};

// Fixed-step fourth-order backward integration of the six coefficient ODEs
// from their terminal conditions, piecewise per control step so the
// step-constant coefficients never straddle a stage. Throws on blow-up
// (|P_i| > 1e8).
RiccatiSolution solve_riccati(const LQParams& params, int sub_per_step = 200);

// Closed-loop feedback rate, unconstrained.
double lq_control(double t, double x, double i, const RiccatiSolution& sol,
                  const LQParams& params);

// Feedback policy with the rate clipped into the hard admissible set.
struct LQPolicy {
    LQParams params;
    RiccatiSolution sol;
    BatterySpec battery;

    double control(int k, double x, double i) const;
};

LQPolicy lq_policy(const LQParams& params, const RiccatiSolution& sol,
                   const BatterySpec& battery);

// Max substitution residual of all six ODEs over piece-interior grid midpoints.
double riccati_residual(const RiccatiSolution& sol, const LQParams& params);

// Residual of the unconstrained HJB equation at (t, x, i) with the infimum
// evaluated at its first-order condition; t snaps to the nearest grid node so
// the time derivative uses exact node values.
double hjb_residual(const RiccatiSolution& sol, const LQParams& params, double t, double x,
                    double i);

// Quadratic ansatz value assembled from the solved coefficients.
double lq_value(const RiccatiSolution& sol, const LQParams& params, double t, double x,
                double i);

}  // namespace firming
