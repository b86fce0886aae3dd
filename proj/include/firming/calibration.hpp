#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "firming/dynamics.hpp"

namespace firming {

struct ProfileRecord {
    int day = 0;
    int hour = 0;       // 0..23
    double actual = 0.0;
    double forecast = 0.0;
};

// One asset-year of hourly actual/forecast generation ratios; every day must
// carry its 24 contiguous hours.
struct ProfileSeries {
    std::vector<ProfileRecord> records;

    void validate() const;
    std::size_t size() const { return records.size(); }
};

struct BinAssignment {
    std::vector<double> edges;  // n_bins + 1 nondecreasing values spanning [0,1]
    std::vector<int> bin;       // 1-based bin per record
    bool degenerate = false;    // all forecasts identical
    int bin_of(double forecast) const;
};

// Equi-probable forecast bins; edge j is the largest forecast of bin j so ties
// stay in the lower bin.
BinAssignment assign_bins(const ProfileSeries& series, int n_bins = 10);

struct IncrementPair {
    double delta_actual = 0.0;  // A_{k+1} - A_k
    double gap = 0.0;           // F_k - A_k
};

struct AlphaFit {
    double alpha = 0.0;
    bool estimable = false;  // false when all gaps are zero
};

// No-intercept least squares of next-hour increments on the current
// forecast-actual gap.
AlphaFit fit_bin_alpha(const std::vector<IncrementPair>& pairs);

struct SigmaFit {
    double sigma = 0.0;
    std::vector<double> residual_bank;  // standardized residuals (raw when sigma = 0)
};

SigmaFit fit_bin_sigma(const std::vector<IncrementPair>& pairs, double alpha);

enum class Boundary { Zero, One };

// P(forecast stays at the boundary next hour | forecast at the boundary),
// over within-day consecutive pairs. Empty optional when the boundary never
// occurs.
std::optional<double> estimate_point_mass(const ProfileSeries& series, Boundary boundary);

// Fraction of the 24 hours where the actual lies inside the scenario band
// [q_0.1, q_0.9]; quantiles interpolate linearly between order statistics.
double ecr(const std::vector<double>& actual_day, const Eigen::MatrixXd& scenarios);

// interpolated empirical quantile (Hyndman-Fan type 7)
double quantile(std::vector<double> values, double level);

struct CalibrationResult {
    CalibratedModel model;
    std::vector<int> inestimable_bins;  // alpha defaulted to 0
    bool degenerate_bins = false;
};

// Full pipeline: bins, per-bin alpha/sigma with residual banks, boundary point
// masses. Increments are formed within days only.
CalibrationResult calibrate(const ProfileSeries& series, int n_bins = 10);

// within-day increment pairs grouped per bin (bin of the hour-k forecast)
std::vector<std::vector<IncrementPair>> bin_pairs(const ProfileSeries& series,
                                                  const BinAssignment& bins);

}  // namespace firming
