#include "firming/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace firming {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void ProfileSeries::validate() const {
    require(!records.empty(), "ProfileSeries: no records");
    std::map<int, std::vector<bool>> seen;
    for (const auto& r : records) {
        require(r.hour >= 0 && r.hour < 24, "ProfileSeries: hour outside 0..23");
        require(r.actual >= 0.0 && r.actual <= 1.0, "ProfileSeries: actual outside [0,1]");
        require(r.forecast >= 0.0 && r.forecast <= 1.0, "ProfileSeries: forecast outside [0,1]");
        auto& hours = seen[r.day];
        if (hours.empty()) hours.assign(24, false);
        require(!hours[static_cast<std::size_t>(r.hour)], "ProfileSeries: duplicate day-hour");
        hours[static_cast<std::size_t>(r.hour)] = true;
    }
    for (const auto& [day, hours] : seen)
        require(std::all_of(hours.begin(), hours.end(), [](bool b) { return b; }),
                "ProfileSeries: day missing hours");
}

int BinAssignment::bin_of(double forecast) const {
    int r = 1;
    const int nb = static_cast<int>(edges.size()) - 1;
    for (int j = 1; j < nb; ++j)
        if (forecast > edges[static_cast<std::size_t>(j)]) r = j + 1;
    return r;
}

BinAssignment assign_bins(const ProfileSeries& series, int n_bins) {
    require(n_bins >= 1, "assign_bins: n_bins must be >= 1");
    require(series.size() >= static_cast<std::size_t>(n_bins),
            "assign_bins: fewer records than bins");
    const std::size_t n = series.size();
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = series.records[i].forecast;
    std::sort(sorted.begin(), sorted.end());

    BinAssignment out;
    out.degenerate = sorted.front() == sorted.back();
    out.edges.resize(static_cast<std::size_t>(n_bins) + 1);
    out.edges.front() = 0.0;
    out.edges.back() = 1.0;
    for (int j = 1; j < n_bins; ++j) {
        // largest member of bin j under an equi-count split
        const std::size_t idx = n * static_cast<std::size_t>(j) / static_cast<std::size_t>(n_bins);
        out.edges[static_cast<std::size_t>(j)] = sorted[idx - 1];
    }
    for (std::size_t j = 1; j + 1 < out.edges.size(); ++j)
        out.edges[j] = std::clamp(out.edges[j], 0.0, 1.0);

    out.bin.reserve(n);
    for (const auto& r : series.records) out.bin.push_back(out.bin_of(r.forecast));
    return out;
}

AlphaFit fit_bin_alpha(const std::vector<IncrementPair>& pairs) {
    double num = 0.0, den = 0.0;
    for (const auto& p : pairs) {
        num += p.delta_actual * p.gap;
        den += p.gap * p.gap;
    }
    if (den == 0.0) return {0.0, false};
    return {num / den, true};
}

SigmaFit fit_bin_sigma(const std::vector<IncrementPair>& pairs, double alpha) {
    SigmaFit out;
    if (pairs.empty()) return out;
    std::vector<double> resid;
    resid.reserve(pairs.size());
    double mean = 0.0;
    for (const auto& p : pairs) {
        resid.push_back(p.delta_actual - alpha * p.gap);
        mean += resid.back();
    }
    mean /= static_cast<double>(resid.size());
    double var = 0.0;
    for (double e : resid) var += (e - mean) * (e - mean);
    out.sigma = std::sqrt(var / static_cast<double>(resid.size()));
    out.residual_bank = std::move(resid);
    if (out.sigma > 0.0)
        for (double& e : out.residual_bank) e /= out.sigma;
    else
        std::fill(out.residual_bank.begin(), out.residual_bank.end(), 0.0);
    return out;
}

std::optional<double> estimate_point_mass(const ProfileSeries& series, Boundary boundary) {
    const double b = boundary == Boundary::Zero ? 0.0 : 1.0;
    std::map<std::pair<int, int>, double> forecast_at;
    for (const auto& r : series.records) forecast_at[{r.day, r.hour}] = r.forecast;
    int at_boundary = 0, stays = 0;
    for (const auto& [key, f] : forecast_at) {
        if (key.second == 23 || f != b) continue;
        const auto next = forecast_at.find({key.first, key.second + 1});
        if (next == forecast_at.end()) continue;
        ++at_boundary;
        if (next->second == b) ++stays;
    }
    if (at_boundary == 0) return std::nullopt;
    return static_cast<double>(stays) / at_boundary;
}

double quantile(std::vector<double> values, double level) {
    require(!values.empty(), "quantile: empty sample");
    require(level >= 0.0 && level <= 1.0, "quantile: level outside [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = level * (static_cast<double>(values.size()) - 1.0);
    const auto j = static_cast<std::size_t>(pos);
    if (j + 1 >= values.size()) return values.back();
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * values[j] + w * values[j + 1];
}

double ecr(const std::vector<double>& actual_day, const Eigen::MatrixXd& scenarios) {
    require(actual_day.size() == static_cast<std::size_t>(scenarios.cols()),
            "ecr: hour count mismatch");
    require(scenarios.rows() >= 100, "ecr: need at least 100 scenarios");
    const int hours = static_cast<int>(actual_day.size());
    int covered = 0;
    std::vector<double> column(static_cast<std::size_t>(scenarios.rows()));
    for (int k = 0; k < hours; ++k) {
        for (int p = 0; p < scenarios.rows(); ++p)
            column[static_cast<std::size_t>(p)] = scenarios(p, k);
        const double lo = quantile(column, 0.1);
        const double hi = quantile(column, 0.9);
        const double a = actual_day[static_cast<std::size_t>(k)];
        if (a >= lo && a <= hi) ++covered;
    }
    return static_cast<double>(covered) / hours;
}

std::vector<std::vector<IncrementPair>> bin_pairs(const ProfileSeries& series,
                                                  const BinAssignment& bins) {
    const int nb = static_cast<int>(bins.edges.size()) - 1;
    std::vector<std::vector<IncrementPair>> out(static_cast<std::size_t>(nb));
    std::map<std::pair<int, int>, std::size_t> index;
    for (std::size_t i = 0; i < series.records.size(); ++i)
        index[{series.records[i].day, series.records[i].hour}] = i;
    for (const auto& [key, i] : index) {
        if (key.second == 23) continue;
        const auto next = index.find({key.first, key.second + 1});
        if (next == index.end()) continue;
        const auto& cur = series.records[i];
        const auto& nxt = series.records[next->second];
        const int r = bins.bin[i];
        out[static_cast<std::size_t>(r - 1)].push_back(
            {nxt.actual - cur.actual, cur.forecast - cur.actual});
    }
    return out;
}

CalibrationResult calibrate(const ProfileSeries& series, int n_bins) {
    series.validate();
    const BinAssignment bins = assign_bins(series, n_bins);
    const auto pairs = bin_pairs(series, bins);

    CalibrationResult result;
    result.degenerate_bins = bins.degenerate;
    result.model.bin_edges = bins.edges;
    result.model.alpha_r.resize(static_cast<std::size_t>(n_bins), 0.0);
    result.model.sigma_r.resize(static_cast<std::size_t>(n_bins), 0.0);
    result.model.residual_banks.resize(static_cast<std::size_t>(n_bins));
    for (int r = 0; r < n_bins; ++r) {
        const auto& ps = pairs[static_cast<std::size_t>(r)];
        require(!ps.empty(), "calibrate: bin holds no increment pairs");
        const AlphaFit af = fit_bin_alpha(ps);
        if (!af.estimable) result.inestimable_bins.push_back(r + 1);
        result.model.alpha_r[static_cast<std::size_t>(r)] = af.alpha;
        SigmaFit sf = fit_bin_sigma(ps, af.alpha);
        result.model.sigma_r[static_cast<std::size_t>(r)] = sf.sigma;
        result.model.residual_banks[static_cast<std::size_t>(r)] = std::move(sf.residual_bank);
    }
    result.model.p_zero = estimate_point_mass(series, Boundary::Zero);
    result.model.p_one = estimate_point_mass(series, Boundary::One);
    result.model.validate();
    return result;
}

}  // namespace firming
