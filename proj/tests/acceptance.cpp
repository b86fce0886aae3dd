// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier end-to-end checks than the unit tests; the full-horizon
// benchmark comparison runs last.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "firming/calibration.hpp"
#include "firming/evaluate.hpp"
#include "firming/lq.hpp"
#include "firming/optim.hpp"
#include "firming/rng.hpp"
#include "firming/serialize.hpp"
#include "firming/solver.hpp"

using namespace firming;

namespace {

struct Result {
    int id = 0;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

JacobiParams table1_wind(int K, double dt) {
    return JacobiParams::constant(0.5, 5.0, 0.2, 10.0, dt, K);
}

BatterySpec table1_battery() {
    BatterySpec b;
    b.i_min = 0.0;
    b.i_max = 3.0;
    b.b_min = -1.0;
    b.b_max = 1.0;
    b.eta = 1.0;
    b.i_target = 1.5;
    b.terminal_penalty = 10.0;
    return b;
}

char buf[512];

// ---------------------------------------------------------------------------
// synthetic hourly asset: known binned dynamics -> one year of profiles ->
// calibrated model shared by the degradation / curtailment / L1 criteria
// ---------------------------------------------------------------------------

CalibratedModel truth_model(double sigma_base, double sigma_hump) {
    CalibratedModel m;
    m.bin_edges = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    m.residual_banks.resize(10);
    RandomStream rng(404);
    for (int r = 1; r <= 10; ++r) {
        m.alpha_r.push_back(0.25 + 0.04 * r);
        m.sigma_r.push_back(sigma_base +
                            sigma_hump * std::sin(3.14159265358979 * (r - 0.5) / 10.0));
        auto& bank = m.residual_banks[static_cast<std::size_t>(r - 1)];
        for (int i = 0; i < 3000; ++i) bank.push_back(rng.normal());
    }
    m.p_zero = 0.75;
    m.p_one = 0.35;
    return m;
}

ProfileSeries synthetic_year(const CalibratedModel& truth, std::uint64_t seed,
                             bool interior_only) {
    ProfileSeries s;
    RandomStream rng(seed);
    for (int d = 0; d < 365; ++d) {
        std::vector<double> f(24);
        if (interior_only) {
            for (int k = 0; k < 24; ++k) f[static_cast<std::size_t>(k)] = rng.uniform();
        } else {
            const double c = 0.3 + 0.4 * rng.uniform();
            const double a = 0.2 + 0.35 * rng.uniform();
            const double phase = 6.2831853 * rng.uniform();
            for (int k = 0; k < 24; ++k)
                f[static_cast<std::size_t>(k)] = std::clamp(
                    c + a * std::sin(6.2831853 * k / 24.0 + phase), 0.0, 1.0);
        }
        double a_cur = std::clamp(f[0] + 0.05 * rng.normal(), 0.0, 1.0);
        for (int k = 0; k < 24; ++k) {
            s.records.push_back({d, k, a_cur, f[static_cast<std::size_t>(k)]});
            a_cur = calibrated_step(a_cur, f[static_cast<std::size_t>(k)], truth, rng);
        }
    }
    return s;
}

struct Asset {
    CalibratedModel model;
    std::vector<double> forecast;  // evaluation day
    BatterySpec battery;
    double x0 = 0.0;
    double i0 = 0.0;
};

// hump-shaped per-bin volatility keeps the hourly forecast-error spread in a
// band a three-hour battery can meaningfully firm; steep forecast profiles
// would turn the mean-reversion lag into a structural imbalance that saturates
// the battery and masks the noise-firming trade-offs the criteria measure
Asset build_asset(double sigma_base, double sigma_hump, double day_amplitude,
                  double terminal_penalty) {
    Asset a;
    const CalibratedModel truth = truth_model(sigma_base, sigma_hump);
    const ProfileSeries year = synthetic_year(truth, 71, false);
    a.model = calibrate(year, 10).model;
    a.forecast.resize(24);
    for (int k = 0; k < 24; ++k)
        a.forecast[static_cast<std::size_t>(k)] =
            0.35 + day_amplitude * std::sin(6.2831853 * k / 24.0 + 1.0);
    a.battery = BatterySpec::from_capacity(0.3, 0.05, 0.95, -0.1, 0.1, 0.95, 0.15,
                                           terminal_penalty);
    a.x0 = a.forecast.front();
    a.i0 = 0.15;
    return a;
}

DesignConfig asset_design(std::uint64_t seed) {
    DesignConfig cfg;
    cfg.n_loc = 160;
    cfg.n_rep = 16;
    cfg.n_fence = 40;
    cfg.n_b = 160;
    cfg.pilot_paths = 4000;
    cfg.seed = seed;
    return cfg;
}

struct AssetRun {
    Policy policy;
    std::vector<Trajectory> trajs;
    MetricsReport metrics;
};

AssetRun solve_and_roll(const Asset& asset, const Objective& obj, int n_paths,
                        std::uint64_t roll_seed) {
    AssetRun run;
    const WindModel model = WindModel::calibrated(asset.model, asset.forecast);
    run.policy = backward_solve(model, asset.x0, asset.battery, obj, asset_design(11), 24);
    const Policy& pol = run.policy;
    run.trajs = rollout([&pol](int k, double x, double i) { return pol.raw_control_at(k, x, i); },
                        model, asset.battery, obj, asset.x0, asset.i0, n_paths, 24, roll_seed);
    std::vector<double> thresholds;
    for (double m : asset.forecast) thresholds.push_back(1.05 * m);
    run.metrics = compute_metrics(run.trajs, asset.forecast, asset.battery.i_max, thresholds);
    return run;
}

// zero tolerance on the admissible window, 1e-9 on the SoC bounds
bool feasible(const std::vector<Trajectory>& trajs, const BatterySpec& bat, double dt,
              std::string& why) {
    for (const auto& t : trajs) {
        for (std::size_t k = 0; k < t.b.size(); ++k) {
            const ControlRange r = admissible_range(t.i[k], bat, dt);
            if (t.b[k] < r.lo || t.b[k] > r.hi) {
                why = "control outside the admissible window";
                return false;
            }
        }
        for (double i : t.i)
            if (i < bat.i_min - 1e-9 || i > bat.i_max + 1e-9) {
                why = "SoC outside its bounds";
                return false;
            }
    }
    return true;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

Result criterion_1() {
    Result r{1};
    const double t0 = now_seconds();
    const auto battery = table1_battery();
    const auto params = LQParams::from(table1_wind(96, 0.25), battery, 0.08, 0.06,
                                       std::vector<double>(96, 5.0));
    const auto sol = solve_riccati(params, 200);

    // closed-form scalar comparison for P1
    const double kappa = params.kappa();
    const double b = std::sqrt(params.c2 / kappa);
    const double a = std::sqrt(params.c2 * kappa);
    double p1_err = 0.0;
    for (double t = 0.0; t <= params.horizon(); t += 0.1) {
        const double th = std::tanh(a * (params.horizon() - t));
        const double want = b * (10.0 + b * th) / (b + 10.0 * th);
        p1_err = std::max(p1_err, std::abs(sol.value(0, t) - want));
    }
    const double ode_resid = riccati_residual(sol, params);
    RandomStream rng(13);
    double hjb = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = rng.uniform() * params.horizon();
        const double x = rng.uniform() * 10.0;
        const double soc = rng.uniform() * 3.0;
        hjb = std::max(hjb, std::abs(hjb_residual(sol, params, t, x, soc)));
    }
    r.seconds = now_seconds() - t0;
    r.pass = p1_err < 1e-6 && ode_resid < 1e-6 && hjb < 1e-4 && r.seconds < 10.0;
    std::snprintf(buf, sizeof buf,
                  "P1 vs closed form %.2e, ODE residual %.2e, HJB residual %.2e (%.1fs)",
                  p1_err, ode_resid, hjb, r.seconds);
    r.detail = buf;
    return r;
}

Result criterion_3() {
    Result r{3};
    const double t0 = now_seconds();
    const auto wind = table1_wind(2, 0.25);
    const auto bat = table1_battery();
    const auto model = WindModel::jacobi(wind);
    const auto obj = Objective::quadratic(std::vector<double>(2, 5.0));
    DesignConfig cfg;
    cfg.n_loc = 100;
    cfg.n_rep = 50;
    cfg.n_fence = 24;
    cfg.n_b = 200;
    cfg.pilot_paths = 8000;
    cfg.seed = 11;
    const double x0 = 5.6, i0 = 1.2;
    const auto policy = backward_solve(model, x0, bat, obj, cfg, 2);

    // exact DP: dense control grid + trapezoid quadrature over the transition
    const auto v1 = [&](double x, double i) {
        const auto range = admissible_range(i, bat, 0.25);
        return brent_minimize(
                   [&](double rate) {
                       const double dev = x - rate - 5.0;
                       const double nxt = soc_transition(i, rate, bat.eta, 0.25);
                       return dev * dev * 0.25 + terminal_cost(bat, nxt);
                   },
                   range.lo, range.hi, 1e-12)
            .value;
    };
    const int n_nodes = 400;
    const auto expect_v1 = [&](double i1) {
        double num = 0.0, den = 0.0;
        for (int j = 0; j <= n_nodes; ++j) {
            const double z = -8.0 + 16.0 * j / n_nodes;
            const double w = std::exp(-0.5 * z * z) * ((j == 0 || j == n_nodes) ? 0.5 : 1.0);
            num += w * v1(jacobi_step(x0, 0, wind, z), i1);
            den += w;
        }
        return num / den;
    };
    const auto range0 = admissible_range(i0, bat, 0.25);
    double exact = 1e300;
    for (int j = 0; j <= 400; ++j) {
        const double rate = range0.lo + (range0.hi - range0.lo) * j / 400.0;
        const double dev = x0 - rate - 5.0;
        exact = std::min(exact,
                         dev * dev * 0.25 + expect_v1(soc_transition(i0, rate, bat.eta, 0.25)));
    }

    // quadrature value of the learned policy
    const double b0 = policy.control_at(0, x0, i0);
    const double i1 = soc_transition(i0, b0, bat.eta, 0.25);
    double num = 0.0, den = 0.0;
    for (int j = 0; j <= n_nodes; ++j) {
        const double z = -8.0 + 16.0 * j / n_nodes;
        const double w = std::exp(-0.5 * z * z) * ((j == 0 || j == n_nodes) ? 0.5 : 1.0);
        const double x1 = jacobi_step(x0, 0, wind, z);
        const double b1 = policy.control_at(1, x1, i1);
        const double i2 = soc_step(i1, b1, bat, 0.25);
        num += w * ((x1 - b1 - 5.0) * (x1 - b1 - 5.0) * 0.25 + terminal_cost(bat, i2));
        den += w;
    }
    const double dev0 = x0 - b0 - 5.0;
    const double learned = dev0 * dev0 * 0.25 + num / den;
    r.seconds = now_seconds() - t0;
    r.pass = learned >= exact - 1e-9 && learned <= exact * 1.02;
    std::snprintf(buf, sizeof buf, "exact DP %.6f, learned policy %.6f (+%.2f%%) (%.1fs)",
                  exact, learned, (learned / exact - 1.0) * 100.0, r.seconds);
    r.detail = buf;
    return r;
}

Result criterion_4() {
    Result r{4};
    const double t0 = now_seconds();
    RandomStream rng(47);
    // noise-free interpolation
    Eigen::MatrixXd xs(40, 2);
    Eigen::VectorXd ys(40);
    for (int i = 0; i < 40; ++i) {
        xs(i, 0) = rng.uniform() * 2.0;
        xs(i, 1) = rng.uniform() * 2.0;
        ys[i] = std::sin(2.5 * xs(i, 0)) + 0.4 * std::cos(3.0 * xs(i, 1));
    }
    const gp::KernelSpec spec{gp::KernelFamily::Matern52, 1.0, {0.6, 0.6}};
    const auto model = gp::fit(xs, ys, spec, 0.0);
    double interp = 0.0;
    for (int i = 0; i < 40; ++i)
        interp = std::max(interp, std::abs(model.mean(xs.row(i).transpose()) - ys[i]));

    // analytic gradient vs central differences at 100 points
    double grad_err = 0.0;
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Vector2d p(2.0 * rng.uniform(), 2.0 * rng.uniform());
        for (int dim = 0; dim < 2; ++dim) {
            Eigen::Vector2d lo = p, hi = p;
            lo[dim] -= h;
            hi[dim] += h;
            const double fd = (model.mean(hi) - model.mean(lo)) / (2.0 * h);
            const double an = model.grad(p, dim);
            grad_err = std::max(grad_err, std::abs(an - fd) / std::max(std::abs(fd), 1e-4));
        }
    }

    // MLE never below its initialization, on three data sets
    bool mle_ok = true;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        RandomStream drng(seed);
        Eigen::MatrixXd dx(60, 2);
        Eigen::VectorXd dy(60);
        for (int i = 0; i < 60; ++i) {
            dx(i, 0) = drng.uniform();
            dx(i, 1) = drng.uniform();
            dy[i] = std::sin(4.0 * dx(i, 0)) * dx(i, 1) + 0.05 * drng.normal();
        }
        const gp::KernelSpec init{gp::KernelFamily::Matern52, 0.7, {0.4, 0.9}};
        const auto fit1 = gp::mle_fit(dx, dy, init, 1e-3);
        const auto fit2 = gp::mle_fit(dx, dy, fit1.kernel, fit1.noise2, {}, 0);
        if (fit2.log_marginal < fit1.log_marginal - 1e-6) mle_ok = false;
    }
    r.seconds = now_seconds() - t0;
    r.pass = interp <= 1e-6 && grad_err <= 1e-4 && mle_ok && r.seconds < 10.0;
    std::snprintf(buf, sizeof buf,
                  "interpolation %.2e, gradient rel err %.2e, MLE monotone %s (%.1fs)",
                  interp, grad_err, mle_ok ? "yes" : "no", r.seconds);
    r.detail = buf;
    return r;
}

Result criterion_8() {
    Result r{8};
    const double t0 = now_seconds();
    const CalibratedModel truth = truth_model(0.015, 0.045);
    // interior forecasts: the boundary mixture is outside the (alpha, sigma)
    // recovery statement
    const ProfileSeries series = synthetic_year(truth, 909, true);  // 8760 records
    const auto fitted = calibrate(series, 10);
    const auto bins = assign_bins(series, 10);
    const auto pairs = bin_pairs(series, bins);

    // compare each fitted alpha with the truth governing the bulk of its bin
    int misses = 0;
    double worst_z = 0.0;
    for (int r_bin = 0; r_bin < 10; ++r_bin) {
        const auto& ps = pairs[static_cast<std::size_t>(r_bin)];
        double gap2 = 0.0;
        for (const auto& p : ps) gap2 += p.gap * p.gap;
        const double se = fitted.model.sigma_r[static_cast<std::size_t>(r_bin)] /
                          std::sqrt(gap2);
        const double mid = 0.5 * (fitted.model.bin_edges[static_cast<std::size_t>(r_bin)] +
                                  fitted.model.bin_edges[static_cast<std::size_t>(r_bin + 1)]);
        const double want = truth.alpha_r[static_cast<std::size_t>(truth.bin_of(mid) - 1)];
        const double z =
            std::abs(fitted.model.alpha_r[static_cast<std::size_t>(r_bin)] - want) / se;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) ++misses;
    }

    // nominal coverage of the generating model by its own scenario bands
    std::vector<double> profile(24);
    for (int k = 0; k < 24; ++k)
        profile[static_cast<std::size_t>(k)] =
            0.5 + 0.32 * std::sin(6.2831853 * k / 24.0 + 0.7);
    const auto model = WindModel::calibrated(truth, profile);
    double total = 0.0;
    const int n_days = 100;
    for (int d = 0; d < n_days; ++d) {
        const auto scen = simulate_paths(model, profile[0], 10000, 23,
                                         2000 + static_cast<std::uint64_t>(d));
        const auto act = simulate_paths(model, profile[0], 1, 23,
                                        900000 + static_cast<std::uint64_t>(d));
        std::vector<double> day(24);
        for (int k = 0; k < 24; ++k) day[static_cast<std::size_t>(k)] = act(0, k);
        total += ecr(day, scen);
    }
    const double coverage = total / n_days;
    r.seconds = now_seconds() - t0;
    r.pass = misses == 0 && std::abs(coverage - 0.80) <= 0.03;
    std::snprintf(buf, sizeof buf,
                  "alpha recovery worst |z| %.2f (3.0 allowed), ECR %.4f (0.80 +- 0.03) (%.1fs)",
                  worst_z, coverage, r.seconds);
    r.detail = buf;
    return r;
}

struct SharedRuns {
    Asset asset;       // criteria 5, 6, 7
    Asset calm_asset;  // criteria 9, 10: the rating constraint rarely binds
    std::map<std::string, AssetRun> runs;
};

Result criterion_5(SharedRuns& shared, const Policy& desk_policy,
                   const std::vector<Trajectory>& desk_trajs) {
    Result r{5};
    const double t0 = now_seconds();
    std::string why;
    bool ok = feasible(desk_trajs, desk_policy.battery, desk_policy.dt, why);
    for (const auto& [name, run] : shared.runs) {
        if (!ok) break;
        ok = feasible(run.trajs, run.policy.battery, 1.0, why);
        if (!ok) why += " (" + name + ")";
    }
    r.seconds = now_seconds() - t0;
    r.pass = ok;
    std::snprintf(buf, sizeof buf,
                  "%zu rollouts x 10^4 paths across all objectives: %s (%.1fs)",
                  shared.runs.size() + 1, ok ? "no violations" : why.c_str(), r.seconds);
    r.detail = buf;
    return r;
}

Result criterion_6(SharedRuns& shared) {
    Result r{6};
    const double t0 = now_seconds();
    // exact single-cycle lifetime
    const double daily = degradation(rainflow({0.0, 1.0, 0.0}, 1.0));
    const double years = 1.0 / daily / 365.0;

    const double ebl0 = shared.runs.at("quad").metrics.ebl.mean;
    const double ebl1 = shared.runs.at("bl_0.1").metrics.ebl.mean;
    const double ebl2 = shared.runs.at("bl_0.2").metrics.ebl.mean;
    const double edr0 = shared.runs.at("quad").metrics.edr.mean;
    const double edr1 = shared.runs.at("bl_0.1").metrics.edr.mean;
    const double edr2 = shared.runs.at("bl_0.2").metrics.edr.mean;

    const bool lifetime_ok = std::abs(years - 5.2288) < 0.1;
    const bool factor_ok = ebl2 >= 1.5 * ebl0;
    const bool ebl_up = ebl1 >= ebl0 && ebl2 >= ebl1;
    const bool edr_down = edr1 < edr0 && edr2 < edr1;
    r.seconds = now_seconds() - t0;
    r.pass = lifetime_ok && factor_ok && ebl_up && edr_down;
    std::snprintf(buf, sizeof buf,
                  "full-cycle life %.2fy; EBL %.1f/%.1f/%.1fy, EDR %.1f/%.1f/%.1f%% over "
                  "lambda {0, 0.1, 0.2} (%.1fs)",
                  years, ebl0, ebl1, ebl2, edr0, edr1, edr2, r.seconds);
    r.detail = buf;
    return r;
}

Result criterion_7(SharedRuns& shared) {
    Result r{7};
    const double t0 = now_seconds();
    const auto& m0 = shared.runs.at("quad").metrics;
    const auto& m1 = shared.runs.at("cm_0.2").metrics;
    const auto& m2 = shared.runs.at("cm_1.0").metrics;
    const double tie = 1e-12;
    const bool ecv_down = m1.ecv.mean <= m0.ecv.mean + tie && m2.ecv.mean <= m1.ecv.mean + tie;
    const bool edr_down = m1.edr.mean <= m0.edr.mean + tie && m2.edr.mean <= m1.edr.mean + tie;
    const double ecv_drop = (m0.ecv.mean - m2.ecv.mean) / m0.ecv.mean;
    const double edr_drop = (m0.edr.mean - m2.edr.mean) / m0.edr.mean;
    r.seconds = now_seconds() - t0;
    r.pass = ecv_down && edr_down && ecv_drop >= 4.0 * edr_drop && ecv_drop > 0.0;
    std::snprintf(buf, sizeof buf,
                  "ECV %.4f/%.4f/%.4f (-%.0f%%), EDR %.1f/%.1f/%.1f%% (-%.1f%%) over "
                  "lambda {0, 0.2, 1} (%.1fs)",
                  m0.ecv.mean, m1.ecv.mean, m2.ecv.mean, ecv_drop * 100.0, m0.edr.mean,
                  m1.edr.mean, m2.edr.mean, edr_drop * 100.0, r.seconds);
    r.detail = buf;
    return r;
}

Result criterion_9(SharedRuns& shared) {
    Result r{9};
    const double t0 = now_seconds();
    const Asset& asset = shared.calm_asset;
    const Policy& pol = shared.runs.at("l1").policy;
    RandomStream rng(505);
    const double b_max = asset.battery.b_max;
    int sampled = 0, satisfied = 0;
    int guard = 0;
    while (sampled < 1000 && ++guard < 200000) {
        const int k = static_cast<int>(rng.uniform_index(24));
        const auto dom = pol.domains[static_cast<std::size_t>(k)];
        const double x = dom.lo + rng.uniform() * (dom.hi - dom.lo);
        const double i = asset.battery.i_min +
                         (0.05 + 0.9 * rng.uniform()) * (asset.battery.i_max -
                                                         asset.battery.i_min);
        const double b = pol.control_at(k, x, i);
        const auto range = admissible_range(i, asset.battery, 1.0);
        // interior states only: projection inactive
        if (b <= range.lo + 1e-9 || b >= range.hi - 1e-9) continue;
        ++sampled;
        const double m = asset.forecast[static_cast<std::size_t>(k)];
        if (std::min(std::abs(b), std::abs(b - (x - m))) < 0.05 * b_max) ++satisfied;
    }
    const double frac = sampled > 0 ? static_cast<double>(satisfied) / sampled : 0.0;
    r.seconds = now_seconds() - t0;
    r.pass = sampled == 1000 && frac >= 0.95;
    std::snprintf(buf, sizeof buf,
                  "bang-off-bang structure at %.1f%% of %d interior states (>= 95%%) (%.1fs)",
                  frac * 100.0, sampled, r.seconds);
    r.detail = buf;
    return r;
}

Result criterion_10(SharedRuns& shared) {
    Result r{10};
    const double t0 = now_seconds();
    const auto& bands = shared.runs.at("quad_calm").metrics.bands;
    const double b_max = shared.calm_asset.battery.b_max;
    bool contained = true, narrow = true;
    double worst_gap = 0.0;
    // containment is checked where the raw band has width (the hour-0 bands
    // are single atoms at the deterministic start); the slack covers
    // emulator-scale edge noise, the B_max bound below stays exact
    const double slack = 0.05 * b_max;
    for (std::size_t k = 0; k < bands.x_lo.size(); ++k) {
        const bool has_width = bands.x_hi[k] > bands.x_lo[k];
        if (has_width &&
            (bands.o_lo[k] < bands.x_lo[k] - slack || bands.o_hi[k] > bands.x_hi[k] + slack))
            contained = false;
        const double lo_gap = bands.o_lo[k] - bands.x_lo[k];
        const double hi_gap = bands.x_hi[k] - bands.o_hi[k];
        worst_gap = std::max({worst_gap, lo_gap, hi_gap});
        if (lo_gap > b_max + 1e-9 || hi_gap > b_max + 1e-9) narrow = false;
    }
    r.seconds = now_seconds() - t0;
    r.pass = contained && narrow;
    std::snprintf(buf, sizeof buf,
                  "firmed band %s in raw band, max per-side shift %.4f (B_max %.2f) (%.1fs)",
                  contained ? "contained" : "NOT contained", worst_gap, b_max, r.seconds);
    r.detail = buf;
    return r;
}

struct BenchOutcome {
    double gp = 0.0, lq = 0.0, tstat = 0.0, seconds = 0.0;
    double gp_edr = 0.0;
    bool ordered = false;
};

BenchOutcome run_benchmark(int K, double dt, const DesignConfig& cfg, int n_paths,
                           std::uint64_t roll_seed) {
    BenchOutcome out;
    const double t0 = now_seconds();
    const auto wind = table1_wind(K, dt);
    const auto bat = table1_battery();
    const auto model = WindModel::jacobi(wind);
    const std::vector<double> target(static_cast<std::size_t>(K), 5.0);
    const auto obj = Objective::quadratic(target);

    const Policy pol = backward_solve(model, 5.0, bat, obj, cfg, K);
    const auto gp_trajs =
        rollout([&pol](int k, double x, double i) { return pol.raw_control_at(k, x, i); },
                model, bat, obj, 5.0, 1.5, n_paths, K, roll_seed);

    const auto params = LQParams::from(wind, bat, 0.08, 0.06, target);
    const auto sol = solve_riccati(params);
    const auto lqp = lq_policy(params, sol, bat);
    const auto lq_trajs =
        rollout([&lqp](int k, double x, double i) { return lqp.control(k, x, i); }, model,
                bat, obj, 5.0, 1.5, n_paths, K, roll_seed);

    out.gp = value_estimate(gp_trajs).mean;
    out.lq = value_estimate(lq_trajs).mean;
    out.gp_edr = expected_deviation_reduction(gp_trajs, target).mean;
    // paired one-sided test on common random numbers
    double dbar = 0.0;
    for (int p = 0; p < n_paths; ++p)
        dbar += lq_trajs[static_cast<std::size_t>(p)].total -
                gp_trajs[static_cast<std::size_t>(p)].total;
    dbar /= n_paths;
    double ss = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        const double d = lq_trajs[static_cast<std::size_t>(p)].total -
                         gp_trajs[static_cast<std::size_t>(p)].total - dbar;
        ss += d * d;
    }
    const double se = std::sqrt(ss / (n_paths - 1.0) / n_paths);
    out.tstat = dbar / se;
    out.ordered = out.tstat > 1.645;
    out.seconds = now_seconds() - t0;
    return out;
}

Result criterion_2() {
    Result r{2};
    const double t0 = now_seconds();

    DesignConfig desk;
    desk.n_loc = 200;
    desk.n_rep = 20;
    desk.n_fence = 40;
    desk.n_b = 200;
    desk.pilot_paths = 10000;
    desk.seed = 7;
    const BenchOutcome d = run_benchmark(24, 1.0, desk, 10000, 1234);

    DesignConfig paper;
    paper.n_loc = 640;
    paper.n_rep = 50;
    paper.n_fence = 40;
    paper.n_b = 640;
    paper.pilot_paths = 10000;
    paper.seed = 7;
    const BenchOutcome p = run_benchmark(96, 0.25, paper, 10000, 1234);

    const double ratio = p.lq / p.gp;
    r.seconds = now_seconds() - t0;
    // firming must help at all (deviation reduction strictly positive)
    const bool desk_ok = d.ordered && d.seconds <= 300.0 && d.gp_edr > 0.0;
    const bool paper_ok = p.ordered && ratio >= 1.02 && ratio <= 1.10 &&
                          p.seconds <= 1800.0 && p.gp_edr > 0.0;
    r.pass = desk_ok && paper_ok;
    std::snprintf(buf, sizeof buf,
                  "K=96: LQ/GP %.4f (need 1.02-1.10), t=%.1f, EDR %.0f%% (%.0fs); "
                  "K=24 ordering t=%.1f, EDR %.0f%% (%.0fs)",
                  ratio, p.tstat, p.gp_edr, p.seconds, d.tstat, d.gp_edr, d.seconds);
    r.detail = buf;
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    // optional filter: acceptance --only 1,3,4
    std::vector<bool> wanted(11, true);
    if (argc == 3 && std::string(argv[1]) == "--only") {
        wanted.assign(11, false);
        const std::string list = argv[2];
        std::size_t pos = 0;
        while (pos < list.size()) {
            const std::size_t comma = list.find(',', pos);
            const int id = std::stoi(list.substr(pos, comma - pos));
            if (id >= 1 && id <= 10) wanted[static_cast<std::size_t>(id)] = true;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    std::vector<Result> results;
    auto run = [&](const std::function<Result()>& fn, int id) {
        if (!wanted[static_cast<std::size_t>(id)]) return;
        std::printf("[ run  ] criterion %d\n", id);
        std::fflush(stdout);
        results.push_back(fn());
    };

    run(criterion_1, 1);
    run(criterion_3, 3);
    run(criterion_4, 4);
    run(criterion_8, 8);

    // shared synthetic-asset solves for criteria 5, 6, 7, 9, 10
    const bool need_asset = wanted[5] || wanted[6] || wanted[7] || wanted[9] || wanted[10];
    SharedRuns shared;
    if (need_asset) {
        std::printf("[ run  ] shared asset solves (criteria 5, 6, 7, 9, 10)\n");
        std::fflush(stdout);
        shared.asset = build_asset(0.015, 0.045, 0.10, 1.0);
        // gentle terminal weight: a hard end-of-day SoC restoration is the one
        // move that legitimately dispatches against the firming direction
        shared.calm_asset = build_asset(0.006, 0.018, 0.03, 0.3);
        const Asset& asset = shared.asset;
        const auto target = asset.forecast;
        shared.runs.emplace("quad",
                            solve_and_roll(asset, Objective::quadratic(target), 10000, 99));
        shared.runs.emplace("bl_0.1",
                            solve_and_roll(asset,
                                           Objective::degradation(target, 0.1,
                                                                  asset.battery.i_max),
                                           10000, 99));
        shared.runs.emplace("bl_0.2",
                            solve_and_roll(asset,
                                           Objective::degradation(target, 0.2,
                                                                  asset.battery.i_max),
                                           10000, 99));
        shared.runs.emplace("cm_0.2",
                            solve_and_roll(asset, Objective::curtailment(target, 0.2), 10000,
                                           99));
        shared.runs.emplace("cm_1.0",
                            solve_and_roll(asset, Objective::curtailment(target, 1.0), 10000,
                                           99));
        shared.runs.emplace("l1", solve_and_roll(shared.calm_asset,
                                                 Objective::l1(shared.calm_asset.forecast),
                                                 10000, 99));
        shared.runs.emplace("quad_calm",
                            solve_and_roll(shared.calm_asset,
                                           Objective::quadratic(shared.calm_asset.forecast),
                                           10000, 99));

    }

    // an LQ-penalized desk run on the stationary benchmark rounds out the
    // feasibility matrix
    if (wanted[5]) {
        const auto wind = table1_wind(24, 1.0);
        const auto bat = table1_battery();
        const auto model = WindModel::jacobi(wind);
        const auto obj = Objective::lq_penalized(std::vector<double>(24, 5.0), 0.08, 0.06,
                                                 bat.i_mid());
        DesignConfig cfg;
        cfg.n_loc = 160;
        cfg.n_rep = 16;
        cfg.n_fence = 40;
        cfg.n_b = 160;
        cfg.pilot_paths = 4000;
        cfg.seed = 11;
        const Policy pol = backward_solve(model, 5.0, bat, obj, cfg, 24);
        const auto trajs = rollout(
            [&pol](int k, double x, double i) { return pol.raw_control_at(k, x, i); }, model,
            bat, obj, 5.0, 1.5, 10000, 24, 99);
        run([&] { return criterion_5(shared, pol, trajs); }, 5);
    }
    run([&] { return criterion_6(shared); }, 6);
    run([&] { return criterion_7(shared); }, 7);
    run([&] { return criterion_9(shared); }, 9);
    run([&] { return criterion_10(shared); }, 10);
    run(criterion_2, 2);

    std::sort(results.begin(), results.end(),
              [](const Result& a, const Result& b) { return a.id < b.id; });
    bool all_pass = true;
    std::printf("\n");
    for (const auto& r : results) {
        std::printf("[%s] criterion %2d: %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.detail.c_str());
        all_pass &= r.pass;
    }
    std::printf("\n%s\n", all_pass ? "ACCEPTANCE: ALL CRITERIA PASS"
                                   : "ACCEPTANCE: FAILURES PRESENT");
    return all_pass ? 0 : 1;
}
