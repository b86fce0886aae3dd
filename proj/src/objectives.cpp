#include "firming/objectives.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace firming {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Objective Objective::quadratic(std::vector<double> target) {
    Objective o;
    o.kind = ObjectiveKind::Quadratic;
    o.target = std::move(target);
    o.validate();
    return o;
}

Objective Objective::l1(std::vector<double> target) {
    Objective o;
    o.kind = ObjectiveKind::L1;
    o.target = std::move(target);
    o.validate();
    return o;
}

Objective Objective::degradation(std::vector<double> target, double lambda_bl, double i_max) {
    Objective o;
    o.kind = ObjectiveKind::Degradation;
    o.target = std::move(target);
    o.lambda_bl = lambda_bl;
    o.i_max = i_max;
    o.validate();
    return o;
}

Objective Objective::curtailment(std::vector<double> target, double lambda_cm,
                                 double threshold_factor, std::vector<double> threshold) {
    Objective o;
    o.kind = ObjectiveKind::Curtailment;
    o.target = std::move(target);
    o.lambda_cm = lambda_cm;
    if (threshold.empty()) {
        o.threshold.reserve(o.target.size());
        for (double m : o.target) o.threshold.push_back(threshold_factor * m);
    } else {
        o.threshold = std::move(threshold);
    }
    o.validate();
    return o;
}

Objective Objective::lq_penalized(std::vector<double> target, double c1, double c2,
                                  double i_mid) {
    Objective o;
    o.kind = ObjectiveKind::LQPenalized;
    o.target = std::move(target);
    o.c1 = c1;
    o.c2 = c2;
    o.i_mid = i_mid;
    o.validate();
    return o;
}

void Objective::validate() const {
    require(!target.empty(), "Objective: target trajectory required");
    require(lambda_bl >= 0.0 && lambda_cm >= 0.0 && c1 >= 0.0 && c2 >= 0.0,
            "Objective: weights must be >= 0");
    if (kind == ObjectiveKind::Degradation)
        require(i_max > 0.0, "Objective: degradation needs i_max > 0");
    if (kind == ObjectiveKind::Curtailment) {
        require(threshold.size() == target.size(), "Objective: threshold length mismatch");
        for (std::size_t k = 0; k < target.size(); ++k)
            require(threshold[k] >= target[k], "Objective: threshold below target");
    }
}

double discharge_stress(double b, double i, double i_max) {
    const double soc = i / i_max;
    return (1.0 - 0.5 * soc * soc) * std::max(-b, 0.0);
}

double step_cost(const Objective& obj, double x, double b, int k, double i) {
    const double m = obj.target_at(k);
    const double dev = x - b - m;
    switch (obj.kind) {
        case ObjectiveKind::Quadratic:
            return dev * dev;
        case ObjectiveKind::L1:
            return std::abs(dev);
        case ObjectiveKind::Degradation:
            return dev * dev + obj.lambda_bl * discharge_stress(b, i, obj.i_max);
        case ObjectiveKind::Curtailment:
            return dev * dev + obj.lambda_cm * std::max(x - b - obj.threshold_at(k), 0.0);
        case ObjectiveKind::LQPenalized: {
            const double di = i - obj.i_mid;
            return dev * dev + obj.c1 * b * b + obj.c2 * di * di;
        }
    }
    return 0.0;
}

double terminal_cost(const BatterySpec& battery, double i_terminal) {
    const double d = i_terminal - battery.i_target;
    return battery.terminal_penalty * d * d;
}

double HalfCycleSet::total_depth() const {
    return std::accumulate(charge_depths.begin(), charge_depths.end(), 0.0) +
           std::accumulate(discharge_depths.begin(), discharge_depths.end(), 0.0);
}

namespace {

// turning points of the series (endpoints kept, strictly alternating interior
// extrema; flats collapsed)
std::vector<double> turning_points(const std::vector<double>& s) {
    std::vector<double> tp;
    tp.reserve(s.size());
    for (double v : s) {
        if (!tp.empty() && v == tp.back()) continue;
        if (tp.size() >= 2) {
            const double a = tp[tp.size() - 2];
            const double b = tp.back();
            if ((b - a > 0.0) == (v - b > 0.0)) {
                tp.back() = v;  // same direction, extend the excursion
                continue;
            }
        }
        tp.push_back(v);
    }
    return tp;
}

}  // namespace

HalfCycleSet rainflow(const std::vector<double>& soc_series, double i_cap) {
    require(soc_series.size() >= 2, "rainflow: series needs at least two samples");
    require(i_cap > 0.0, "rainflow: i_cap must be positive");

    HalfCycleSet out;
    auto count = [&](double from, double to, bool full_cycle) {
        const double depth = std::abs(to - from) / i_cap;
        if (depth == 0.0) return;
        if (full_cycle) {
            out.charge_depths.push_back(depth);
            out.discharge_depths.push_back(depth);
        } else if (to > from) {
            out.charge_depths.push_back(depth);
        } else {
            out.discharge_depths.push_back(depth);
        }
    };

    std::vector<double> buf;  // open turning points, oldest first
    for (double v : turning_points(soc_series)) {
        buf.push_back(v);
        while (buf.size() >= 3) {
            const std::size_t n = buf.size();
            const double range_x = std::abs(buf[n - 1] - buf[n - 2]);
            const double range_y = std::abs(buf[n - 2] - buf[n - 3]);
            if (range_x < range_y) break;
            if (n == 3) {
                // Y touches the series start: count a half-cycle, drop the start
                count(buf[0], buf[1], false);
                buf.erase(buf.begin());
            } else {
                // interior closed cycle
                count(buf[n - 3], buf[n - 2], true);
                buf.erase(buf.begin() + static_cast<std::ptrdiff_t>(n - 3),
                          buf.begin() + static_cast<std::ptrdiff_t>(n - 1));
            }
        }
    }
    // residual: each remaining range is a half-cycle
    for (std::size_t i = 0; i + 1 < buf.size(); ++i) count(buf[i], buf[i + 1], false);
    return out;
}

double halfcycle_wear(double depth) {
    require(depth >= 0.0 && depth <= 1.0 + 1e-12, "halfcycle_wear: depth outside [0,1]");
    return 5.24e-4 * std::pow(depth, 2.03);
}

double degradation(const HalfCycleSet& cycles) {
    double total = 0.0;
    for (double c : cycles.charge_depths) total += halfcycle_wear(c) / 2.0;
    for (double d : cycles.discharge_depths) total += halfcycle_wear(d) / 2.0;
    return total;
}

}  // namespace firming
