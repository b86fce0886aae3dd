#include "firming/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace firming {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

JacobiParams JacobiParams::constant(double alpha, double m, double sigma, double x_max,
                                    double dt, int steps) {
    JacobiParams p;
    p.alpha.assign(static_cast<std::size_t>(steps), alpha);
    p.m.assign(static_cast<std::size_t>(steps), m);
    p.sigma.assign(static_cast<std::size_t>(steps), sigma);
    p.x_max = x_max;
    p.dt = dt;
    p.validate();
    return p;
}

void JacobiParams::validate() const {
    require(!alpha.empty(), "JacobiParams: empty coefficient arrays");
    require(alpha.size() == m.size() && alpha.size() == sigma.size(),
            "JacobiParams: coefficient arrays must share one length");
    require(x_max > 0.0, "JacobiParams: x_max must be positive");
    require(dt > 0.0, "JacobiParams: dt must be positive");
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        require(alpha[k] > 0.0 && std::isfinite(alpha[k]), "JacobiParams: alpha_k must be > 0");
        // sigma = 0 is admitted for deterministic-drift runs
        require(sigma[k] >= 0.0 && std::isfinite(sigma[k]), "JacobiParams: sigma_k must be >= 0");
        require(std::isfinite(m[k]), "JacobiParams: m_k must be finite");
    }
}

void CalibratedModel::validate() const {
    const int nb = n_bins();
    require(nb >= 1, "CalibratedModel: needs at least one bin");
    require(static_cast<int>(bin_edges.size()) == nb + 1, "CalibratedModel: edge count mismatch");
    require(bin_edges.front() >= 0.0 && bin_edges.back() <= 1.0,
            "CalibratedModel: edges must lie in [0,1]");
    require(std::is_sorted(bin_edges.begin(), bin_edges.end()),
            "CalibratedModel: edges must be nondecreasing");
    require(static_cast<int>(sigma_r.size()) == nb &&
            static_cast<int>(residual_banks.size()) == nb,
            "CalibratedModel: per-bin array size mismatch");
    for (double s : sigma_r) require(s >= 0.0, "CalibratedModel: sigma_r must be >= 0");
    for (const auto& bank : residual_banks)
        require(!bank.empty(), "CalibratedModel: empty residual bank");
    if (p_zero) require(*p_zero >= 0.0 && *p_zero <= 1.0, "CalibratedModel: p_zero outside [0,1]");
    if (p_one) require(*p_one >= 0.0 && *p_one <= 1.0, "CalibratedModel: p_one outside [0,1]");
}

int CalibratedModel::bin_of(double forecast) const {
    // interior edges bin_edges[1..nb-1]; ties go to the lower bin
    int r = 1;
    const int nb = n_bins();
    for (int j = 1; j < nb; ++j) {
        if (forecast > bin_edges[static_cast<std::size_t>(j)]) r = j + 1;
    }
    return r;
}

BatterySpec BatterySpec::from_capacity(double i_cap, double soc_min, double soc_max,
                                       double b_min, double b_max, double eta,
                                       double i_target, double terminal_penalty) {
    BatterySpec s;
    require(i_cap > 0.0, "BatterySpec: capacity must be positive");
    require(soc_min >= 0.0 && soc_max <= 1.0 && soc_min < soc_max,
            "BatterySpec: SoC bounds must satisfy 0 <= min < max <= 1");
    s.i_min = soc_min * i_cap;
    s.i_max = soc_max * i_cap;
    s.b_min = b_min;
    s.b_max = b_max;
    s.eta = eta;
    s.i_target = i_target;
    s.terminal_penalty = terminal_penalty;
    s.validate();
    return s;
}

void BatterySpec::validate() const {
    require(i_min < i_max, "BatterySpec: i_min must be < i_max");
    require(b_min < 0.0 && b_max > 0.0, "BatterySpec: need b_min < 0 < b_max");
    require(eta > 0.0 && eta <= 1.0, "BatterySpec: eta must be in (0, 1]");
    require(terminal_penalty >= 0.0, "BatterySpec: terminal penalty must be >= 0");
    require(i_target >= i_min && i_target <= i_max, "BatterySpec: i_target outside SoC window");
}

double jacobi_step(double x, int k, const JacobiParams& p, double z) {
    require(std::isfinite(x) && std::isfinite(z), "jacobi_step: non-finite input");
    require(x >= 0.0 && x <= p.x_max, "jacobi_step: x outside [0, x_max]");
    require(k >= 0 && k < p.steps(), "jacobi_step: step index out of range");
    const auto ku = static_cast<std::size_t>(k);
    const double drift = p.alpha[ku] * (p.m[ku] - x) * p.dt;
    const double diff = p.sigma[ku] * std::sqrt(x * (p.x_max - x)) * std::sqrt(p.dt) * z;
    return std::clamp(x + drift + diff, 0.0, p.x_max);
}

ControlRange admissible_range(double i, const BatterySpec& spec, double dt) {
    require(dt > 0.0, "admissible_range: dt must be positive");
    require(i >= spec.i_min - 1e-9 && i <= spec.i_max + 1e-9,
            "admissible_range: SoC outside capacity window");
    ControlRange r;
    r.lo = std::max(spec.b_min, spec.eta * (spec.i_min - i) / dt);
    r.hi = std::min(spec.b_max, (spec.i_max - i) / (spec.eta * dt));
    // guard against round-off when i sits exactly on a bound
    r.lo = std::min(r.lo, 0.0);
    r.hi = std::max(r.hi, 0.0);
    return r;
}

double soc_step(double i, double b, const BatterySpec& spec, double dt) {
    const ControlRange r = admissible_range(i, spec, dt);
    if (b < r.lo - 1e-9 || b > r.hi + 1e-9)
        throw std::invalid_argument("soc_step: rate outside admissible range");
    return std::clamp(soc_transition(i, b, spec.eta, dt), spec.i_min, spec.i_max);
}

double calibrated_step(double x, double forecast, const CalibratedModel& model,
                       RandomStream& rng) {
    require(std::isfinite(x) && x >= 0.0 && x <= 1.0, "calibrated_step: x outside [0,1]");
    require(std::isfinite(forecast) && forecast >= 0.0 && forecast <= 1.0,
            "calibrated_step: forecast outside [0,1]");
    const int r = model.bin_of(forecast);
    const auto& bank = model.residual_banks[static_cast<std::size_t>(r - 1)];
    if (bank.empty()) throw std::runtime_error("calibrated_step: empty residual bank");
    const double alpha = model.alpha_r[static_cast<std::size_t>(r - 1)];
    const double sigma = model.sigma_r[static_cast<std::size_t>(r - 1)];

    auto draw = [&]() { return bank[rng.uniform_index(bank.size())]; };
    // rejection-sample a residual of the wanted sign; fall back to folding the
    // magnitude when the bank has none
    auto draw_signed = [&](double sign) {
        for (int attempt = 0; attempt < 256; ++attempt) {
            const double e = draw();
            if (sign * e > 0.0) return e;
        }
        return sign * std::abs(draw());
    };

    double eps;
    if (forecast == 0.0 && model.p_zero) {
        if (rng.uniform() < *model.p_zero) return 0.0;
        eps = draw_signed(+1.0);
    } else if (forecast == 1.0 && model.p_one) {
        if (rng.uniform() < *model.p_one) return 1.0;
        eps = draw_signed(-1.0);
    } else {
        eps = draw();
    }
    const double next = x + alpha * (forecast - x) + sigma * eps;
    return std::clamp(next, 0.0, 1.0);
}

WindModel WindModel::jacobi(JacobiParams p) {
    p.validate();
    WindModel m;
    m.dt = p.dt;
    m.dyn = std::move(p);
    return m;
}

WindModel WindModel::calibrated(CalibratedModel model, std::vector<double> forecast) {
    model.validate();
    require(!forecast.empty(), "WindModel: forecast trajectory required");
    for (double f : forecast)
        require(f >= 0.0 && f <= 1.0, "WindModel: forecast outside [0,1]");
    WindModel m;
    m.dt = 1.0;  // calibrated coefficients absorb the hourly step
    m.dyn = Calibrated{std::move(model), std::move(forecast)};
    return m;
}

int WindModel::steps() const {
    if (const auto* p = std::get_if<JacobiParams>(&dyn)) return p->steps();
    return static_cast<int>(std::get<Calibrated>(dyn).forecast.size());
}

double WindModel::x_max() const {
    if (const auto* p = std::get_if<JacobiParams>(&dyn)) return p->x_max;
    return 1.0;
}

double WindModel::step(double x, int k, RandomStream& rng) const {
    if (const auto* p = std::get_if<JacobiParams>(&dyn)) return jacobi_step(x, k, *p, rng.normal());
    const auto& c = std::get<Calibrated>(dyn);
    require(k >= 0 && k < static_cast<int>(c.forecast.size()),
            "WindModel: step index out of range");
    return calibrated_step(x, c.forecast[static_cast<std::size_t>(k)], c.model, rng);
}

Eigen::MatrixXd simulate_paths(const WindModel& model, double x0, int n_paths, int K,
                               std::uint64_t seed) {
    require(n_paths >= 1, "simulate_paths: n_paths must be >= 1");
    require(K >= 1 && K <= model.steps(), "simulate_paths: K outside the model horizon");
    require(x0 >= 0.0 && x0 <= model.x_max(), "simulate_paths: x0 outside the state domain");
    Eigen::MatrixXd paths(n_paths, K + 1);
    for (int p = 0; p < n_paths; ++p) {
        RandomStream rng(seed, static_cast<std::uint64_t>(p));
        double x = x0;
        paths(p, 0) = x;
        for (int k = 0; k < K; ++k) {
            x = model.step(x, k, rng);
            paths(p, k + 1) = x;
        }
    }
    return paths;
}

}  // namespace firming
