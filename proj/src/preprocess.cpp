#include "atmcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "atmcast/error.hpp"
#include "atmcast/linalg.hpp"

namespace atmcast {

std::size_t schwert_max_lag(std::size_t n)
{
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(double(n) / 100.0, 0.25)));
}

ADFResult adf_test(std::span<const double> y, std::optional<std::size_t> max_lag)
{
    const std::size_t n = y.size();
    if (n < 20) {
        throw Error(ErrorKind::length, "ADF test needs at least 20 observations, got " + std::to_string(n));
    }
    const std::size_t p = max_lag.value_or(schwert_max_lag(n));
    if (4 * p >= n) {
        throw Error(ErrorKind::length, "ADF lag order " + std::to_string(p) + " too large for length " + std::to_string(n));
    }

    // dy[k] = y[k+1] - y[k]; regress dy[k] for k = p .. n-2.
    std::vector<double> dy(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        dy[k] = y[k + 1] - y[k];
    }
    const std::size_t rows = n - 1 - p;
    Eigen::MatrixXd X(rows, 2 + p);
    Eigen::VectorXd target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t k = r + p;
        target(r) = dy[k];
        X(r, 0) = 1.0;
        X(r, 1) = y[k];
        for (std::size_t i = 1; i <= p; ++i) {
            X(r, 1 + i) = dy[k - i];
        }
    }
    const auto fit = ols(X, target, true);
    if (!fit) {
        throw Error(ErrorKind::singular, "ADF regression is rank deficient (constant series?)");
    }
    const double dof = double(rows) - double(X.cols());
    const double s2 = fit->rss / dof;
    const double se = std::sqrt(s2 * fit->xtx_inverse(1, 1));
    if (!(se > 0.0) || !std::isfinite(se)) {
        throw Error(ErrorKind::singular, "ADF regression has zero residual variance");
    }
    ADFResult r;
    r.statistic = fit->beta(1) / se;
    r.lags_used = p;
    r.n_obs = rows;
    r.is_stationary = r.statistic < r.critical_5;
    return r;
}

SeasonalIndex fit_seasonal_index(const DatedSeries& train)
{
    std::array<std::vector<double>, 7> by_day;
    std::vector<double> all;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.values[i]) {
            by_day[train.date_at(i).iso_weekday() - 1].push_back(*train.values[i]);
            all.push_back(*train.values[i]);
        }
    }
    for (std::size_t d = 0; d < 7; ++d) {
        if (by_day[d].empty()) {
            throw Error(ErrorKind::coverage, "no training observation for ISO weekday " + std::to_string(d + 1));
        }
    }
    SeasonalIndex idx;
    const double overall = median(all);
    for (std::size_t d = 0; d < 7; ++d) {
        const double f = overall != 0.0 ? median(by_day[d]) / overall : 0.0;
        if (f > 0.0 && std::isfinite(f)) {
            idx.factor[d] = f;
        } else {
            idx.factor[d] = 1.0;
            idx.replaced[d] = true;
        }
    }
    return idx;
}

namespace {

template <typename Op>
DatedSeries apply_index(const DatedSeries& series, const SeasonalIndex& idx, Op op)
{
    DatedSeries out = series;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.values[i]) {
            out.values[i] = op(*out.values[i], idx.at(out.date_at(i)));
        }
    }
    return out;
}

} // namespace

DatedSeries deseasonalize(const DatedSeries& series, const SeasonalIndex& idx)
{
    return apply_index(series, idx, [](double v, double f) { return v / f; });
}

DatedSeries reseasonalize(const DatedSeries& series, const SeasonalIndex& idx)
{
    return apply_index(series, idx, [](double v, double f) { return v * f; });
}

ScalerParams scaler_fit(std::span<const double> train)
{
    if (train.empty()) {
        throw Error(ErrorKind::length, "cannot fit a scaler on an empty sequence");
    }
    const auto [lo, hi] = std::minmax_element(train.begin(), train.end());
    ScalerParams p{*lo, *hi, false};
    p.degenerate = !(p.max > p.min);
    return p;
}

double scaler_transform(double x, const ScalerParams& p)
{
    return p.degenerate ? 0.0 : (x - p.min) / (p.max - p.min);
}

double scaler_inverse(double x, const ScalerParams& p)
{
    return p.degenerate ? p.min : x * (p.max - p.min) + p.min;
}

std::vector<double> scaler_transform(std::span<const double> x, const ScalerParams& p)
{
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [&](double v) { return scaler_transform(v, p); });
    return out;
}

std::vector<double> scaler_inverse(std::span<const double> x, const ScalerParams& p)
{
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [&](double v) { return scaler_inverse(v, p); });
    return out;
}

} // namespace atmcast
