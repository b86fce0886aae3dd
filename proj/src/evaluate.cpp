#include "firming/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "firming/calibration.hpp"
#include "firming/solver.hpp"

namespace firming {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

Estimate mean_se(const std::vector<double>& v) {
    Estimate e;
    const auto n = static_cast<double>(v.size());
    for (double x : v) e.mean += x;
    e.mean /= n;
    if (v.size() >= 2) {
        double ss = 0.0;
        for (double x : v) ss += (x - e.mean) * (x - e.mean);
        e.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

Trajectory run_path(const ControlMap& policy, const BatterySpec& battery,
                    const Objective& objective, double i0, double dt, int K,
                    const std::function<double(int, double, RandomStream&)>& advance,
                    double x0, RandomStream& rng, std::uint64_t seed_id) {
    Trajectory t;
    t.seed_id = seed_id;
    t.x.reserve(static_cast<std::size_t>(K));
    t.b.reserve(static_cast<std::size_t>(K));
    t.o.reserve(static_cast<std::size_t>(K));
    t.costs.reserve(static_cast<std::size_t>(K));
    t.i.reserve(static_cast<std::size_t>(K) + 1);

    double x = x0;
    double soc = i0;
    t.i.push_back(soc);
    for (int k = 0; k < K; ++k) {
        const double b = project_control(policy(k, x, soc), soc, battery, dt);
        const double cost = step_cost(objective, x, b, k, soc) * dt;
        t.x.push_back(x);
        t.b.push_back(b);
        t.o.push_back(x - b);
        t.costs.push_back(cost);
        soc = soc_step(soc, b, battery, dt);
        t.i.push_back(soc);
        if (k + 1 < K) x = advance(k, x, rng);
    }
    t.terminal = terminal_cost(battery, soc);
    t.total = t.terminal;
    for (double c : t.costs) t.total += c;
    return t;
}

}  // namespace

std::vector<Trajectory> rollout(const ControlMap& policy, const WindModel& model,
                                const BatterySpec& battery, const Objective& objective,
                                double x0, double i0, int n_paths, int K,
                                std::uint64_t seed) {
    require(n_paths >= 1, "rollout: n_paths must be >= 1");
    require(K >= 1 && K <= model.steps(), "rollout: K outside the model horizon");
    require(objective.steps() >= K, "rollout: objective shorter than horizon");
    require(i0 >= battery.i_min && i0 <= battery.i_max, "rollout: i0 outside SoC window");

    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(n_paths));
    auto advance = [&](int k, double x, RandomStream& rng) { return model.step(x, k, rng); };
    for (int p = 0; p < n_paths; ++p) {
        RandomStream rng(seed, static_cast<std::uint64_t>(p));
        out.push_back(run_path(policy, battery, objective, i0, model.dt, K, advance, x0, rng,
                               static_cast<std::uint64_t>(p)));
    }
    return out;
}

Trajectory replay(const ControlMap& policy, const std::vector<double>& actual,
                  const BatterySpec& battery, const Objective& objective, double i0,
                  double dt) {
    require(actual.size() >= 1, "replay: empty actual path");
    const int K = static_cast<int>(actual.size());
    require(objective.steps() >= K, "replay: objective shorter than path");
    RandomStream rng(0);
    auto advance = [&](int k, double, RandomStream&) {
        return actual[static_cast<std::size_t>(k) + 1];
    };
    return run_path(policy, battery, objective, i0, dt, K, advance, actual.front(), rng, 0);
}

Estimate value_estimate(const std::vector<Trajectory>& trajectories) {
    require(trajectories.size() >= 2, "value_estimate: need at least two paths");
    std::vector<double> totals;
    totals.reserve(trajectories.size());
    for (const auto& t : trajectories) totals.push_back(t.total);
    return mean_se(totals);
}

std::optional<double> deviation_reduction(const std::vector<double>& actual,
                                          const std::vector<double>& firmed,
                                          const std::vector<double>& forecast) {
    require(actual.size() == firmed.size() && actual.size() == forecast.size(),
            "deviation_reduction: length mismatch");
    double dev_a = 0.0, dev_o = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        dev_a += std::abs(actual[k] - forecast[k]);
        dev_o += std::abs(firmed[k] - forecast[k]);
    }
    if (dev_a == 0.0) return std::nullopt;
    return (dev_a - dev_o) / dev_a * 100.0;
}

Estimate expected_deviation_reduction(const std::vector<Trajectory>& trajectories,
                                      const std::vector<double>& forecast) {
    std::vector<double> drs;
    drs.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        const auto dr = deviation_reduction(t.x, t.o, forecast);
        if (dr) drs.push_back(*dr);
    }
    require(!drs.empty(), "expected_deviation_reduction: no path with nonzero deviation");
    return mean_se(drs);
}

Estimate expected_battery_life(const std::vector<Trajectory>& trajectories, double i_cap) {
    require(!trajectories.empty(), "expected_battery_life: no trajectories");
    constexpr double cap_years = 100.0;
    std::vector<double> years;
    years.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        const double daily = degradation(rainflow(t.i, i_cap));
        if (daily <= 0.0) {
            years.push_back(cap_years);
        } else {
            years.push_back(std::min(1.0 / daily / 365.0, cap_years));
        }
    }
    return mean_se(years);
}

Estimate expected_cumulative_violation(const std::vector<Trajectory>& trajectories,
                                       const std::vector<double>& thresholds) {
    require(!trajectories.empty(), "expected_cumulative_violation: no trajectories");
    std::vector<double> viols;
    viols.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        require(thresholds.size() >= t.o.size(),
                "expected_cumulative_violation: thresholds shorter than horizon");
        double v = 0.0;
        for (std::size_t k = 0; k < t.o.size(); ++k)
            v += std::max(t.o[k] - thresholds[k], 0.0);
        viols.push_back(v);
    }
    return mean_se(viols);
}

BandReport quantile_bands(const std::vector<Trajectory>& trajectories,
                          const std::vector<double>& forecast, double lo_level,
                          double hi_level) {
    require(trajectories.size() >= 100, "quantile_bands: need at least 100 paths");
    const std::size_t K = trajectories.front().x.size();
    require(forecast.size() >= K, "quantile_bands: forecast shorter than horizon");
    BandReport bands;
    bands.x_lo.resize(K);
    bands.x_hi.resize(K);
    bands.o_lo.resize(K);
    bands.o_hi.resize(K);
    std::vector<double> dev(trajectories.size());
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t p = 0; p < trajectories.size(); ++p)
            dev[p] = trajectories[p].x[k] - forecast[k];
        bands.x_lo[k] = quantile(dev, lo_level);
        bands.x_hi[k] = quantile(dev, hi_level);
        for (std::size_t p = 0; p < trajectories.size(); ++p)
            dev[p] = trajectories[p].o[k] - forecast[k];
        bands.o_lo[k] = quantile(dev, lo_level);
        bands.o_hi[k] = quantile(dev, hi_level);
    }
    return bands;
}

MetricsReport compute_metrics(const std::vector<Trajectory>& trajectories,
                              const std::vector<double>& forecast, double i_cap,
                              const std::vector<double>& thresholds) {
    MetricsReport r;
    r.n_paths = static_cast<int>(trajectories.size());
    r.value = value_estimate(trajectories);
    r.edr = expected_deviation_reduction(trajectories, forecast);
    r.ebl = expected_battery_life(trajectories, i_cap);
    r.ecv = expected_cumulative_violation(trajectories, thresholds);
    if (trajectories.size() >= 100) r.bands = quantile_bands(trajectories, forecast);
    return r;
}

}  // namespace firming
