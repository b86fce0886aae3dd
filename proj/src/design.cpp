#include "firming/design.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace firming {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::vector<int> permutation(int n, RandomStream& rng) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

}  // namespace

void DesignConfig::validate() const {
    require(n_loc > n_fence, "DesignConfig: n_loc must exceed n_fence");
    require(n_fence >= 0 && n_fence % 4 == 0, "DesignConfig: n_fence must be divisible by 4");
    require(n_rep >= 1, "DesignConfig: n_rep must be >= 1");
    require(n_b >= 0, "DesignConfig: n_b must be >= 0");
    require(domain_width_sd > 0.0, "DesignConfig: domain_width_sd must be > 0");
    require(pilot_paths >= 2, "DesignConfig: pilot_paths must be >= 2");
}

Eigen::MatrixXd lhs(int n, const Rect& bounds, RandomStream& rng) {
    require(n >= 1, "lhs: n must be >= 1");
    require(bounds.x_hi > bounds.x_lo && bounds.y_hi > bounds.y_lo,
            "lhs: degenerate rectangle");
    Eigen::MatrixXd pts(n, 2);
    const auto perm_x = permutation(n, rng);
    const auto perm_y = permutation(n, rng);
    for (int i = 0; i < n; ++i) {
        const double ux = (perm_x[static_cast<std::size_t>(i)] + rng.uniform()) / n;
        const double uy = (perm_y[static_cast<std::size_t>(i)] + rng.uniform()) / n;
        pts(i, 0) = bounds.x_lo + ux * (bounds.x_hi - bounds.x_lo);
        pts(i, 1) = bounds.y_lo + uy * (bounds.y_hi - bounds.y_lo);
    }
    return pts;
}

Eigen::MatrixXd fence(const Rect& bounds, int n_fence) {
    require(n_fence >= 4 && n_fence % 4 == 0, "fence: n_fence must be a positive multiple of 4");
    const int per_edge = n_fence / 4;
    Eigen::MatrixXd pts(n_fence, 2);
    int row = 0;
    // each edge carries its starting corner; walking the perimeter
    // counterclockwise dedups corners
    for (int j = 0; j < per_edge; ++j) {
        const double t = static_cast<double>(j) / per_edge;
        pts.row(row++) << bounds.x_lo + t * (bounds.x_hi - bounds.x_lo), bounds.y_lo;
    }
    for (int j = 0; j < per_edge; ++j) {
        const double t = static_cast<double>(j) / per_edge;
        pts.row(row++) << bounds.x_hi, bounds.y_lo + t * (bounds.y_hi - bounds.y_lo);
    }
    for (int j = 0; j < per_edge; ++j) {
        const double t = static_cast<double>(j) / per_edge;
        pts.row(row++) << bounds.x_hi - t * (bounds.x_hi - bounds.x_lo), bounds.y_hi;
    }
    for (int j = 0; j < per_edge; ++j) {
        const double t = static_cast<double>(j) / per_edge;
        pts.row(row++) << bounds.x_lo, bounds.y_hi - t * (bounds.y_hi - bounds.y_lo);
    }
    return pts;
}

std::vector<Interval> training_domains(const WindModel& model, double x0, int K,
                                       const DesignConfig& cfg) {
    cfg.validate();
    require(K >= 1 && K <= model.steps(), "training_domains: K outside the model horizon");
    const Eigen::MatrixXd pilot = simulate_paths(model, x0, cfg.pilot_paths, K, cfg.seed);
    const double x_max = model.x_max();
    const double floor_width = 0.01 * x_max;

    std::vector<Interval> domains(static_cast<std::size_t>(K + 1));
    for (int k = 0; k <= K; ++k) {
        const double mean = pilot.col(k).mean();
        const double sd = std::sqrt((pilot.col(k).array() - mean).square().mean());
        double width = 2.0 * cfg.domain_width_sd * sd;
        if (width < floor_width) width = floor_width;
        width = std::min(width, x_max);
        double lo = mean - width / 2.0;
        double hi = mean + width / 2.0;
        if (lo < 0.0) {
            hi -= lo;
            lo = 0.0;
        }
        if (hi > x_max) {
            lo -= hi - x_max;
            hi = x_max;
        }
        domains[static_cast<std::size_t>(k)] = {std::max(lo, 0.0), std::min(hi, x_max)};
    }
    return domains;
}

StepDesigns build_designs(int k, const std::vector<Interval>& domains,
                          const BatterySpec& battery, const DesignConfig& cfg,
                          RandomStream& rng) {
    cfg.validate();
    require(k >= 0 && k < static_cast<int>(domains.size()), "build_designs: step out of range");
    const Interval dom = domains[static_cast<std::size_t>(k)];
    const Rect rect{dom.lo, dom.hi, battery.i_min, battery.i_max};

    StepDesigns d;
    const int n_inner = cfg.n_loc - cfg.n_fence;
    d.value_sites.resize(cfg.n_loc, 2);
    d.value_sites.topRows(n_inner) = lhs(n_inner, rect, rng);
    if (cfg.n_fence > 0) d.value_sites.bottomRows(cfg.n_fence) = fence(rect, cfg.n_fence);

    d.value_replicated.resize(cfg.n_loc * cfg.n_rep, 2);
    for (int i = 0; i < cfg.n_loc; ++i)
        for (int j = 0; j < cfg.n_rep; ++j)
            d.value_replicated.row(i * cfg.n_rep + j) = d.value_sites.row(i);

    d.control_sites = lhs(cfg.control_design_size(), rect, rng);
    return d;
}

}  // namespace firming
