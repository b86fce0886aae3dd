#pragma once

#include <vector>

#include "firming/dynamics.hpp"

namespace firming {

enum class ObjectiveKind { Quadratic, L1, Degradation, Curtailment, LQPenalized };

// Stepwise dispatch criterion. All variants firm the net output x - b toward the
// target m_k; Degradation adds a discharge-stress penalty, Curtailment an
// over-threshold penalty, LQPenalized the soft control/SoC penalties used by the
// closed-form baseline.
struct Objective {
    ObjectiveKind kind = ObjectiveKind::Quadratic;
    std::vector<double> target;     // M_k, one per step
    std::vector<double> threshold;  // Mbar_k, Curtailment only
    double lambda_bl = 0.0;
    double lambda_cm = 0.0;
    double c1 = 0.0;  // LQPenalized control weight
    double c2 = 0.0;  // LQPenalized SoC weight
    double i_max = 0.0;  // SoC normalizer for the discharge stress term
    double i_mid = 0.0;  // SoC anchor for the LQPenalized term

    static Objective quadratic(std::vector<double> target);
    static Objective l1(std::vector<double> target);
    static Objective degradation(std::vector<double> target, double lambda_bl, double i_max);
    // threshold defaults to factor * target when no explicit trajectory is given
    static Objective curtailment(std::vector<double> target, double lambda_cm,
                                 double threshold_factor = 1.05,
                                 std::vector<double> threshold = {});
    static Objective lq_penalized(std::vector<double> target, double c1, double c2,
                                  double i_mid);

    void validate() const;
    double target_at(int k) const { return target[static_cast<std::size_t>(k)]; }
    double threshold_at(int k) const { return threshold[static_cast<std::size_t>(k)]; }
    int steps() const { return static_cast<int>(target.size()); }
    // true when the pointwise optimizer cannot rely on smooth first-order
    // conditions (absolute-value and max kinks away from b = 0)
    bool smooth() const {
        return kind != ObjectiveKind::L1 && kind != ObjectiveKind::Curtailment;
    }
};

// Discharge stress (1 - 0.5 (i/i_max)^2) max(-b, 0): discharging near-empty
// batteries is the most damaging move.
double discharge_stress(double b, double i, double i_max);

double step_cost(const Objective& obj, double x, double b, int k, double i);

// terminal_penalty * (i_T - i_target)^2
double terminal_cost(const BatterySpec& battery, double i_terminal);

// Half-cycle depths extracted from a SoC path, normalized to fractions of i_cap.
struct HalfCycleSet {
    std::vector<double> charge_depths;
    std::vector<double> discharge_depths;
    double total_depth() const;
};

// Four-point (ASTM-style) rainflow decomposition of the SoC series. Closed
// cycles contribute one charge and one discharge half-cycle of equal depth;
// the unclosed residual is counted as half-cycles. The summed depths equal the
// total variation of the normalized series exactly.
HalfCycleSet rainflow(const std::vector<double>& soc_series, double i_cap);

// Wear fraction of one half-cycle of the given depth.
double halfcycle_wear(double depth);

// Daily degradation fraction: sum of halfcycle_wear over all half-cycles, each
// weighted 1/2.
double degradation(const HalfCycleSet& cycles);

}  // namespace firming
