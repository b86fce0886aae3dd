#include "firming/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "firming/optim.hpp"

namespace firming {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double step_cost_db(const Objective& obj, double x, double b, int k, double i) {
    // derivative of the stepwise cost in b away from its kinks
    const double m = obj.target_at(k);
    double d = -2.0 * (x - b - m);
    switch (obj.kind) {
        case ObjectiveKind::Degradation:
            if (b < 0.0) d -= obj.lambda_bl * (1.0 - 0.5 * (i / obj.i_max) * (i / obj.i_max));
            break;
        case ObjectiveKind::LQPenalized:
            d += 2.0 * obj.c1 * b;
            break;
        default:
            break;
    }
    return d;
}

struct Candidate {
    double b = 0.0;
    double value = 0.0;
};

}  // namespace

double Continuation::value(double x, double i) const {
    if (surrogate) return surrogate->mean(Eigen::Vector2d(x, i));
    const double d = i - terminal->i_target;
    return terminal->terminal_penalty * d * d;
}

double Continuation::dvalue_di(double x, double i) const {
    if (surrogate) return surrogate->grad(Eigen::Vector2d(x, i), 1);
    return 2.0 * terminal->terminal_penalty * (i - terminal->i_target);
}

double project_control(double b_raw, double i, const BatterySpec& battery, double dt) {
    const ControlRange r = admissible_range(i, battery, dt);
    return std::clamp(b_raw, r.lo, r.hi);
}

double q_target(double x_next, double i_next, int k, const gp::GPModel& control_map,
                const Continuation& cont, const Objective& objective,
                const BatterySpec& battery, double dt) {
    const double b_hat =
        project_control(control_map.mean(Eigen::Vector2d(x_next, i_next)), i_next, battery, dt);
    const double i_after = soc_transition(i_next, b_hat, battery.eta, dt);
    return step_cost(objective, x_next, b_hat, k, i_next) * dt + cont.value(x_next, i_after);
}

double pointwise_control(double x, double i, int k, const Continuation& cont,
                         const Objective& objective, const BatterySpec& battery, double dt) {
    const double lo = 2.0 * battery.b_min;
    const double hi = 2.0 * battery.b_max;
    auto h = [&](double b) {
        return step_cost(objective, x, b, k, i) * dt +
               cont.value(x, soc_transition(i, b, battery.eta, dt));
    };

    std::vector<Candidate> cands;
    cands.push_back({0.0, h(0.0)});

    if (objective.smooth()) {
        // derivative of h on each efficiency branch
        auto dh = [&](double b) {
            const double rate = b > 0.0 ? battery.eta : 1.0 / battery.eta;
            return step_cost_db(objective, x, b, k, i) * dt +
                   rate * dt * cont.dvalue_di(x, soc_transition(i, b, battery.eta, dt));
        };
        constexpr int n_scan = 32;
        for (const auto& [blo, bhi] :
             {std::pair{1e-9 * hi, hi}, std::pair{lo, 1e-9 * lo}}) {
            double prev_b = blo;
            double prev_d = dh(blo);
            for (int j = 1; j <= n_scan; ++j) {
                const double b = blo + (bhi - blo) * j / n_scan;
                const double d = dh(b);
                if (prev_d == 0.0) {
                    cands.push_back({prev_b, h(prev_b)});
                } else if (prev_d * d < 0.0) {
                    const double root = brent_root(dh, prev_b, b);
                    cands.push_back({root, h(root)});
                }
                prev_b = b;
                prev_d = d;
            }
            // branch endpoints cover boundary minima the sign scan cannot see
            cands.push_back({blo, h(blo)});
            cands.push_back({bhi, h(bhi)});
        }
    } else {
        // kinked objective: dense scan plus local refinement and the exact
        // kink locations
        constexpr int n_grid = 400;
        int best_j = 0;
        double best_v = h(lo);
        for (int j = 1; j <= n_grid; ++j) {
            const double b = lo + (hi - lo) * j / n_grid;
            const double v = h(b);
            if (v < best_v) {
                best_v = v;
                best_j = j;
            }
        }
        const double step = (hi - lo) / n_grid;
        const double center = lo + step * best_j;
        cands.push_back({center, best_v});
        cands.push_back({lo, h(lo)});
        cands.push_back({hi, h(hi)});
        const ScalarMin refined =
            brent_minimize(h, std::max(lo, center - step), std::min(hi, center + step));
        cands.push_back({refined.x, refined.value});
        for (double kink : {x - objective.target_at(k),
                            objective.kind == ObjectiveKind::Curtailment
                                ? x - objective.threshold_at(k)
                                : x - objective.target_at(k)}) {
            if (kink >= lo && kink <= hi) cands.push_back({kink, h(kink)});
        }
    }

    const auto best = std::min_element(cands.begin(), cands.end(),
                                       [](const Candidate& a, const Candidate& b) {
                                           return a.value < b.value;
                                       });
    return best->b;
}

EmulatorFit fit_control_emulator(const Eigen::MatrixXd& design, const Eigen::VectorXd& b_dagger,
                                 const gp::KernelSpec& init, double init_noise2,
                                 int n_restarts, int max_iters) {
    require(design.rows() == b_dagger.size(),
            "fit_control_emulator: design/target size mismatch");
    EmulatorFit out;
    out.mle = gp::mle_fit(design, b_dagger, init, init_noise2, {}, n_restarts, max_iters);
    out.model = gp::fit(design, b_dagger, out.mle.kernel, out.mle.noise2);
    return out;
}

double Policy::control_at(int k, double x, double i) const {
    return project_control(raw_control_at(k, x, i), i, battery, dt);
}

double Policy::raw_control_at(int k, double x, double i) const {
    require(k >= 0 && k < K, "Policy: step out of range");
    return control[static_cast<std::size_t>(k)].mean(Eigen::Vector2d(x, i));
}

Continuation Policy::continuation_at(int k) const {
    require(k >= 0 && k < K, "Policy: step out of range");
    Continuation c;
    if (k == K - 1) {
        c.terminal = &battery;
    } else {
        c.surrogate = &q_value[static_cast<std::size_t>(k)];
    }
    return c;
}

double Policy::bellman_value(double x0, double i0) const {
    require(K >= 2, "Policy: bellman_value needs K >= 2");
    const double b0 = control_at(0, x0, i0);
    const double i1 = soc_transition(i0, b0, battery.eta, dt);
    return step_cost(objective, x0, b0, 0, i0) * dt +
           q_value.front().mean(Eigen::Vector2d(x0, i1));
}

namespace {

void sanity_check(const gp::GPModel& model, const Eigen::VectorXd& targets, int k,
                  const char* what) {
    const double mean = targets.mean();
    const double sd = std::sqrt((targets.array() - mean).square().mean());
    // the fitted observation noise is irreducible residual, not misfit
    const double noise_sd = std::sqrt(model.noise2) * model.y_scale;
    const double limit = 0.1 * sd + noise_sd + 1e-9 * (1.0 + std::abs(mean));
    if (model.train_rmse > limit)
        throw std::runtime_error(std::string(what) + " emulator failed its training sanity "
                                 "check at step " + std::to_string(k) + ": rmse " +
                                 std::to_string(model.train_rmse) + " exceeds " +
                                 std::to_string(limit));
}

}  // namespace

Policy backward_solve(const WindModel& model, double x0, const BatterySpec& battery,
                      const Objective& objective, const DesignConfig& cfg, int K) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();
    battery.validate();
    objective.validate();
    require(K >= 2, "backward_solve: K must be >= 2");
    require(objective.steps() >= K, "backward_solve: objective shorter than horizon");
    require(model.steps() >= K, "backward_solve: model horizon shorter than K");

    Policy pol;
    pol.K = K;
    pol.dt = model.dt;
    pol.battery = battery;
    pol.objective = objective;
    pol.seed = cfg.seed;
    pol.domains = training_domains(model, x0, K, cfg);
    pol.control.resize(static_cast<std::size_t>(K));
    pol.q_value.resize(static_cast<std::size_t>(K - 1));
    pol.diagnostics.resize(static_cast<std::size_t>(K));

    auto designs_for = [&](int k) {
        RandomStream rng(cfg.seed, 0xD0000 + static_cast<std::uint64_t>(k));
        return build_designs(k, pol.domains, battery, cfg, rng);
    };

    gp::KernelSpec b_warm{gp::KernelFamily::Matern32, 1.0, {1.0, 1.0}};
    gp::KernelSpec q_warm{gp::KernelFamily::Matern52, 1.0, {1.0, 1.0}};
    double b_warm_noise = 1e-3;
    double q_warm_noise = 1e-3;

    for (int k = K - 1; k >= 0; --k) {
        auto& diag = pol.diagnostics[static_cast<std::size_t>(k)];
        const Continuation cont = k == K - 1
                                      ? Continuation{nullptr, &battery}
                                      : Continuation{&pol.q_value[static_cast<std::size_t>(k)],
                                                     nullptr};

        // pointwise unconstrained optimization over the control design
        const StepDesigns designs = designs_for(k);
        const int n_b = static_cast<int>(designs.control_sites.rows());
        Eigen::VectorXd b_dagger(n_b);
        for (int i = 0; i < n_b; ++i)
            b_dagger[i] = pointwise_control(designs.control_sites(i, 0),
                                            designs.control_sites(i, 1), k, cont, objective,
                                            battery, model.dt);

        // warm-started steps still try the canonical start as insurance
        const int restarts = k == K - 1 ? 3 : 1;
        EmulatorFit ctrl = fit_control_emulator(designs.control_sites, b_dagger, b_warm,
                                                b_warm_noise, restarts, k == K - 1 ? 60 : 40);
        sanity_check(ctrl.model, b_dagger, k, "control");
        diag.control_lml = ctrl.mle.log_marginal;
        diag.control_rmse = ctrl.model.train_rmse;
        diag.mle_iterations += ctrl.mle.iterations;
        b_warm = ctrl.mle.kernel;
        b_warm_noise = ctrl.mle.noise2;
        pol.control[static_cast<std::size_t>(k)] = std::move(ctrl.model);
        const gp::GPModel& control_map = pol.control[static_cast<std::size_t>(k)];

        if (k == 0) break;

        // replicated value design at step k-1, simulated one step forward
        const StepDesigns prev = designs_for(k - 1);
        const int n_loc = static_cast<int>(prev.value_sites.rows());
        RandomStream sim_rng(cfg.seed, 0x51000 + static_cast<std::uint64_t>(k));
        Eigen::VectorXd averaged(n_loc);
        for (int i = 0; i < n_loc; ++i) {
            const double x_prev = prev.value_sites(i, 0);
            const double i_k = prev.value_sites(i, 1);
            double acc = 0.0;
            for (int j = 0; j < cfg.n_rep; ++j) {
                const double x_next = model.step(x_prev, k - 1, sim_rng);
                acc += q_target(x_next, i_k, k, control_map, cont, objective, battery,
                                model.dt);
            }
            averaged[i] = acc / cfg.n_rep;
        }

        gp::MleResult qm = gp::mle_fit(prev.value_sites, averaged, q_warm, q_warm_noise, {},
                                       restarts, k == K - 1 ? 60 : 40);
        gp::GPModel q_model = gp::fit(prev.value_sites, averaged, qm.kernel, qm.noise2);
        sanity_check(q_model, averaged, k - 1, "q-value");
        diag.q_lml = qm.log_marginal;
        diag.q_rmse = q_model.train_rmse;
        diag.mle_iterations += qm.iterations;
        q_warm = qm.kernel;
        q_warm_noise = qm.noise2;
        pol.q_value[static_cast<std::size_t>(k - 1)] = std::move(q_model);
    }

    pol.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return pol;
}

}  // namespace firming
