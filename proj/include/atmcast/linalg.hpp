#pragma once

#include <optional>

#include <Eigen/Dense>

namespace atmcast {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    /// (X'X)^-1, only filled when requested.
    Eigen::MatrixXd xtx_inverse;
};

/// Ordinary least squares via column-pivoted QR. Returns nullopt when X is
/// numerically rank deficient.
std::optional<OlsFit> ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool with_covariance = false);

} // namespace atmcast
