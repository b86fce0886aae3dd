#include "firming/lq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace firming {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

using State = std::array<double, 6>;

// time derivatives of (P1..P6) for step-constant coefficients
State rhs(const State& p, double kappa, double c2, double alpha, double sigma, double m,
          double target, double x_max) {
    const double dm = m - target;
    const double s2 = sigma * sigma;
    State d;
    d[0] = kappa * p[0] * p[0] - c2;
    d[1] = alpha * p[1] + kappa * p[0] * p[1] - 2.0 * kappa * p[0];
    d[2] = -(1.0 - kappa) + (2.0 * alpha + s2) * p[2] - kappa * p[1] +
           0.25 * kappa * p[1] * p[1];
    d[3] = -2.0 * kappa * dm * p[0] + kappa * p[0] * p[3];
    d[4] = -2.0 * (1.0 - kappa) * dm + alpha * p[4] - kappa * p[3] - kappa * dm * p[1] +
           0.5 * kappa * p[1] * p[3] - (s2 * x_max - 2.0 * s2 * m) * p[2];
    // the constant part of the diffusion term sigma^2 P3 x (x_max - x) lands
    // here; without it the assembled ansatz does not satisfy the HJB equation
    d[5] = -(1.0 - kappa) * dm * dm - kappa * dm * p[3] + 0.25 * kappa * p[3] * p[3] -
           s2 * m * (x_max - m) * p[2];
    return d;
}

State axpy(const State& a, double s, const State& b) {
    State r;
    for (int i = 0; i < 6; ++i) r[i] = a[i] + s * b[i];
    return r;
}

}  // namespace

LQParams LQParams::from(const JacobiParams& wind, const BatterySpec& battery, double c1,
                        double c2, std::vector<double> target) {
    LQParams p;
    p.c1 = c1;
    p.c2 = c2;
    p.m = wind.m.front();
    p.target = std::move(target);
    p.alpha = wind.alpha;
    p.sigma = wind.sigma;
    p.x_max = wind.x_max;
    p.dt = wind.dt;
    p.i_mid = battery.i_mid();
    p.i_target = battery.i_target;
    p.terminal_penalty = battery.terminal_penalty;
    p.validate();
    return p;
}

void LQParams::validate() const {
    require(c1 >= 0.0 && c2 >= 0.0, "LQParams: penalties must be >= 0");
    require(!target.empty(), "LQParams: target trajectory required");
    require(alpha.size() == target.size() && sigma.size() == target.size(),
            "LQParams: coefficient arrays must match the target length");
    require(dt > 0.0 && x_max > 0.0, "LQParams: dt and x_max must be positive");
    require(terminal_penalty >= 0.0, "LQParams: terminal penalty must be >= 0");
}

int LQParams::step_of(double t) const {
    const int k = static_cast<int>(std::floor(t / dt + 1e-12));
    return std::clamp(k, 0, steps() - 1);
}

double RiccatiSolution::value(int i, double t) const {
    const auto& grid = p[static_cast<std::size_t>(i)];
    const double s = std::clamp(t / h, 0.0, static_cast<double>(nodes() - 1));
    const int j = std::min(static_cast<int>(s), nodes() - 2);
    const double w = s - j;
    return (1.0 - w) * grid[static_cast<std::size_t>(j)] +
           w * grid[static_cast<std::size_t>(j + 1)];
}

double RiccatiSolution::node_deriv(int i, int j) const {
    const auto& g = p[static_cast<std::size_t>(i)];
    const int n = nodes();
    // keep the stencil inside one smooth piece (coefficients jump at control
    // steps); shift to a one-sided stencil near piece edges
    const int piece = std::min(j / sub_per_step, (n - 2) / sub_per_step);
    const int lo = piece * sub_per_step;
    const int hi = std::min(lo + sub_per_step, n - 1);
    int s = std::clamp(j - 2, lo, hi - 4);
    const double off = j - s;
    // 5-point finite-difference weights for the derivative at offset `off`
    const auto w = [&](int idx) { return g[static_cast<std::size_t>(s + idx)]; };
    std::array<double, 5> c{};
    if (off == 0) c = {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -1.0 / 4};
    else if (off == 1) c = {-1.0 / 4, -5.0 / 6, 3.0 / 2, -1.0 / 2, 1.0 / 12};
    else if (off == 2) c = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    else if (off == 3) c = {-1.0 / 12, 1.0 / 2, -3.0 / 2, 5.0 / 6, 1.0 / 4};
    else c = {1.0 / 4, -4.0 / 3, 3.0, -4.0, 25.0 / 12};
    double d = 0.0;
    for (int idx = 0; idx < 5; ++idx) d += c[static_cast<std::size_t>(idx)] * w(idx);
    return d / h;
}

RiccatiSolution solve_riccati(const LQParams& params, int sub_per_step) {
    params.validate();
    require(sub_per_step >= 8, "solve_riccati: need at least 8 grid nodes per control step");
    const int K = params.steps();
    const double kappa = params.kappa();

    RiccatiSolution sol;
    sol.T = params.horizon();
    sol.sub_per_step = sub_per_step;
    sol.h = params.dt / sub_per_step;
    const int n_nodes = K * sub_per_step + 1;
    for (auto& g : sol.p) g.assign(static_cast<std::size_t>(n_nodes), 0.0);

    const double dimid = params.i_mid - params.i_target;
    State y{params.terminal_penalty, 0.0, 0.0,
            2.0 * params.terminal_penalty * dimid, 0.0,
            params.terminal_penalty * dimid * dimid};
    auto store = [&](int node, const State& v) {
        for (int i = 0; i < 6; ++i) {
            if (std::abs(v[static_cast<std::size_t>(i)]) > 1e8)
                throw std::runtime_error("solve_riccati: coefficient blow-up at node " +
                                         std::to_string(node));
            sol.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(node)] =
                v[static_cast<std::size_t>(i)];
        }
    };
    store(n_nodes - 1, y);

    const double hstep = -sol.h;  // backward in time
    for (int k = K - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        const double a = params.alpha[ku];
        const double s = params.sigma[ku];
        const double tgt = params.target[ku];
        for (int j = sub_per_step - 1; j >= 0; --j) {
            const State k1 = rhs(y, kappa, params.c2, a, s, params.m, tgt, params.x_max);
            const State k2 = rhs(axpy(y, hstep / 2.0, k1), kappa, params.c2, a, s, params.m,
                                 tgt, params.x_max);
            const State k3 = rhs(axpy(y, hstep / 2.0, k2), kappa, params.c2, a, s, params.m,
                                 tgt, params.x_max);
            const State k4 = rhs(axpy(y, hstep, k3), kappa, params.c2, a, s, params.m, tgt,
                                 params.x_max);
            for (int i = 0; i < 6; ++i)
                y[static_cast<std::size_t>(i)] +=
                    hstep / 6.0 *
                    (k1[static_cast<std::size_t>(i)] + 2.0 * k2[static_cast<std::size_t>(i)] +
                     2.0 * k3[static_cast<std::size_t>(i)] + k4[static_cast<std::size_t>(i)]);
            store(k * sub_per_step + j, y);
        }
    }
    return sol;
}

double lq_control(double t, double x, double i, const RiccatiSolution& sol,
                  const LQParams& params) {
    const double kappa = params.kappa();
    const double p1 = sol.value(0, t);
    const double p2 = sol.value(1, t);
    const double p4 = sol.value(3, t);
    return kappa * (x - params.target_at(t)) - kappa * p1 * (i - params.i_mid) -
           0.5 * kappa * p2 * (x - params.m) - 0.5 * kappa * p4;
}

double LQPolicy::control(int k, double x, double i) const {
    const double raw = lq_control(k * params.dt, x, i, sol, params);
    const ControlRange r = admissible_range(i, battery, params.dt);
    return std::clamp(raw, r.lo, r.hi);
}

LQPolicy lq_policy(const LQParams& params, const RiccatiSolution& sol,
                   const BatterySpec& battery) {
    return LQPolicy{params, sol, battery};
}

double riccati_residual(const RiccatiSolution& sol, const LQParams& params) {
    const double kappa = params.kappa();
    double worst = 0.0;
    const int K = params.steps();
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double a = params.alpha[ku];
        const double s = params.sigma[ku];
        const double tgt = params.target[ku];
        // midpoints whose 4-node interpolation stencil stays inside the piece
        for (int j = 1; j + 2 <= sol.sub_per_step - 1; ++j) {
            const int base = k * sol.sub_per_step + j;
            State pm, dm;
            for (int i = 0; i < 6; ++i) {
                const auto& g = sol.p[static_cast<std::size_t>(i)];
                const double pm1 = g[static_cast<std::size_t>(base - 1)];
                const double p0 = g[static_cast<std::size_t>(base)];
                const double p1 = g[static_cast<std::size_t>(base + 1)];
                const double p2 = g[static_cast<std::size_t>(base + 2)];
                // 4th-order midpoint interpolation and derivative
                pm[static_cast<std::size_t>(i)] = (-pm1 + 9.0 * p0 + 9.0 * p1 - p2) / 16.0;
                dm[static_cast<std::size_t>(i)] =
                    (pm1 - 27.0 * p0 + 27.0 * p1 - p2) / (24.0 * sol.h);
            }
            const State f = rhs(pm, kappa, params.c2, a, s, params.m, tgt, params.x_max);
            for (int i = 0; i < 6; ++i)
                worst = std::max(worst, std::abs(dm[static_cast<std::size_t>(i)] -
                                                 f[static_cast<std::size_t>(i)]));
        }
    }
    return worst;
}

double lq_value(const RiccatiSolution& sol, const LQParams& params, double t, double x,
                double i) {
    const double di = i - params.i_mid;
    const double dx = x - params.m;
    return sol.value(0, t) * di * di + sol.value(1, t) * di * dx + sol.value(2, t) * dx * dx +
           sol.value(3, t) * di + sol.value(4, t) * dx + sol.value(5, t);
}

double hjb_residual(const RiccatiSolution& sol, const LQParams& params, double t, double x,
                    double i) {
    // snap to the nearest grid node for an accurate time derivative
    const int j = std::clamp(static_cast<int>(std::lround(t / sol.h)), 0, sol.nodes() - 1);
    const double ts = sol.node_time(j);
    State pv, pd;
    for (int q = 0; q < 6; ++q) {
        pv[static_cast<std::size_t>(q)] = sol.p[static_cast<std::size_t>(q)][static_cast<std::size_t>(j)];
        pd[static_cast<std::size_t>(q)] = sol.node_deriv(q, j);
    }
    const double di = i - params.i_mid;
    const double dx = x - params.m;
    const double dt_v = pd[0] * di * di + pd[1] * di * dx + pd[2] * dx * dx + pd[3] * di +
                        pd[4] * dx + pd[5];
    const double v_x = pv[1] * di + 2.0 * pv[2] * dx + pv[4];
    const double v_i = 2.0 * pv[0] * di + pv[1] * dx + pv[3];
    const double v_xx = 2.0 * pv[2];

    const int k = params.step_of(std::min(ts, params.horizon() - 0.5 * sol.h));
    const auto ku = static_cast<std::size_t>(k);
    const double alpha = params.alpha[ku];
    const double sigma = params.sigma[ku];
    const double target = params.target[ku];
    const double kappa = params.kappa();
    const double b = kappa * (x - target) - 0.5 * kappa * v_i;  // infimum via the FOC
    const double dev = x - b - target;
    return dt_v + alpha * (params.m - x) * v_x + b * v_i +
           0.5 * sigma * sigma * x * (params.x_max - x) * v_xx + dev * dev +
           params.c1 * b * b + params.c2 * di * di;
}

}  // namespace firming
