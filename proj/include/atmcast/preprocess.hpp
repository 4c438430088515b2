#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "atmcast/series.hpp"

namespace atmcast {

struct ADFResult {
    double statistic = 0.0;
    double critical_1 = -3.43;
    double critical_5 = -2.86;
    double critical_10 = -2.57;
    std::size_t lags_used = 0;
    std::size_t n_obs = 0;
    bool is_stationary = false;
};

/// floor(12 * (n/100)^(1/4))
std::size_t schwert_max_lag(std::size_t n);

/// Constant-only augmented Dickey-Fuller regression with a fixed lag order:
///   dy_t = c + gamma * y_{t-1} + sum_i phi_i * dy_{t-i} + e_t
/// `statistic` is the OLS t-ratio of gamma, compared against the large-sample
/// constant-only critical values.
ADFResult adf_test(std::span<const double> series, std::optional<std::size_t> max_lag = std::nullopt);

/// Multiplicative weekday factors, indexed by ISO weekday - 1.
struct SeasonalIndex {
    std::array<double, 7> factor{1, 1, 1, 1, 1, 1, 1};
    /// Factors that came out as 0 and were reset to 1.
    std::array<bool, 7> replaced{};

    double at(Date d) const { return factor[d.iso_weekday() - 1]; }
};

SeasonalIndex fit_seasonal_index(const DatedSeries& train);
DatedSeries deseasonalize(const DatedSeries& series, const SeasonalIndex& idx);
DatedSeries reseasonalize(const DatedSeries& series, const SeasonalIndex& idx);

struct ScalerParams {
    double min = 0.0;
    double max = 1.0;
    bool degenerate = false;
};

ScalerParams scaler_fit(std::span<const double> train);
double scaler_transform(double x, const ScalerParams& p);
double scaler_inverse(double x, const ScalerParams& p);
std::vector<double> scaler_transform(std::span<const double> x, const ScalerParams& p);
std::vector<double> scaler_inverse(std::span<const double> x, const ScalerParams& p);

} // namespace atmcast
