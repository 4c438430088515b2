#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "atmcast/models/model.hpp"

namespace atmcast {

struct ArimaParams {
    std::size_t p = 0, d = 0, q = 0;
    std::vector<double> phi;
    std::vector<double> theta;
    double c = 0.0;
    std::vector<double> residuals;
};

/// Autoregression on the d-times differenced series, fitted by least squares.
class ArimaModel {
public:
    /// Raises unsupported for q > 0, length when the series is too short and
    /// rank when the lagged regressors are collinear. A constant differenced
    /// series (d >= 1) is fitted as pure drift.
    static ArimaModel fit(std::span<const double> series, std::size_t p, std::size_t d, std::size_t q);

    /// Recursive forecast continuing `history`.
    std::vector<double> forecast(std::span<const double> history, std::size_t horizon) const;
    /// Each step conditions on the observed values in `actual` for earlier steps.
    std::vector<double> forecast_one_step(std::span<const double> history, std::span<const double> actual) const;

    const ArimaParams& params() const { return params_; }
    std::size_t n_params() const { return params_.p + 1; }

    json to_json(const ModelSpec& spec) const;
    static ArimaModel from_json(const json& j);

private:
    std::vector<double> path(std::span<const double> history, std::size_t horizon,
                             std::span<const double> actual) const;

    ArimaParams params_;
};

std::vector<double> fit_predict_arima(std::span<const double> train, std::size_t p, std::size_t d, std::size_t q,
                                      std::size_t horizon);

} // namespace atmcast
