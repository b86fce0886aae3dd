#pragma once

#include <Eigen/Dense>
#include <vector>

#include "firming/dynamics.hpp"
#include "firming/rng.hpp"

namespace firming {

// Training-design sizes and the per-step domain rule for the backward solver.
struct DesignConfig {
    int n_loc = 200;          // distinct value-design sites (including fence)
    int n_rep = 20;           // replicates per site
    int n_fence = 40;         // boundary points, divisible by 4
    int n_b = 0;              // control-design size; 0 means n_loc
    double domain_width_sd = 3.0;
    int pilot_paths = 10000;
    std::uint64_t seed = 0;

    void validate() const;
    int control_design_size() const { return n_b > 0 ? n_b : n_loc; }
};

struct Rect {
    double x_lo = 0.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 1.0;
};

// Latin hypercube sample over the rectangle: one point per axis stratum in
// each dimension.
Eigen::MatrixXd lhs(int n, const Rect& bounds, RandomStream& rng);

// Evenly spaced boundary layer: n_fence/4 points per edge placed cyclically so
// each corner appears exactly once.
Eigen::MatrixXd fence(const Rect& bounds, int n_fence);

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// Per-step X-ranges [mean_k - w sd_k, mean_k + w sd_k] estimated from
// uncontrolled pilot paths and intersected with the state domain. Degenerate
// steps are widened to a floor of 1% of the state range.
std::vector<Interval> training_domains(const WindModel& model, double x0, int K,
                                       const DesignConfig& cfg);

struct StepDesigns {
    Eigen::MatrixXd value_sites;       // n_loc x 2 reduced design (X_k, I_{k+1})
    Eigen::MatrixXd value_replicated;  // n_loc*n_rep x 2, sites repeated n_rep times
    Eigen::MatrixXd control_sites;     // n_b x 2 design (X_k, I_k)
};

// Designs for one step: fenced LHS over [x_lo_k, x_hi_k] x [i_min, i_max] for
// the value regression plus an independent LHS for the control regression.
StepDesigns build_designs(int k, const std::vector<Interval>& domains,
                          const BatterySpec& battery, const DesignConfig& cfg,
                          RandomStream& rng);

}  // namespace firming
