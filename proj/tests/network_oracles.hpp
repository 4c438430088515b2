#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "atmcast/models/cnn1d.hpp"
#include "atmcast/models/mlp.hpp"
#include "oracles.hpp"

namespace oracle {

using atmcast::CnnShape;
using atmcast::MlpShape;

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = 0.0,
                               double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) X(r, c) = u(rng);
    return X;
}

inline std::vector<double> random_theta(std::size_t n, std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> t(n);
    for (auto& v : t) v = u(rng);
    return t;
}

/// Max relative error between the analytic gradient and central differences.
template <typename Loss>
double check_gradient(const Loss& loss, const std::vector<double>& theta)
{
    std::vector<double> analytic;
    loss(theta, &analytic);
    const auto numeric =
        oracle::numeric_gradient([&](std::span<const double> t) { return loss(t, nullptr); }, theta, 1e-5);
    return oracle::max_relative_error(analytic, numeric);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double mse(const std::vector<double>& p, const Eigen::VectorXd& y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - y(Eigen::Index(i))) * (p[i] - y(Eigen::Index(i)));
    return s / double(p.size());
}

// Plain-loop forward passes, written from the parameter layout documentation.

inline std::vector<double> mlp_forward(const MlpShape& s, std::span<const double> th, const Eigen::MatrixXd& X)
{
    const std::size_t W1 = 0, b1 = W1 + s.nodes1 * s.inputs, W2 = b1 + s.nodes1, b2 = W2 + s.nodes2 * s.nodes1,
                      w3 = b2 + s.nodes2, b3 = w3 + s.nodes2;
    std::vector<double> out;
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        std::vector<double> h1(s.nodes1), h2(s.nodes2);
        for (std::size_t j = 0; j < s.nodes1; ++j) {
            double z = th[b1 + j];
            for (std::size_t i = 0; i < s.inputs; ++i) z += th[W1 + j * s.inputs + i] * X(r, Eigen::Index(i));
            h1[j] = sigmoid(z);
        }
        for (std::size_t k = 0; k < s.nodes2; ++k) {
            double z = th[b2 + k];
            for (std::size_t j = 0; j < s.nodes1; ++j) z += th[W2 + k * s.nodes1 + j] * h1[j];
            h2[k] = sigmoid(z);
        }
        double y = th[b3];
        for (std::size_t k = 0; k < s.nodes2; ++k) y += th[w3 + k] * h2[k];
        out.push_back(y);
    }
    return out;
}

struct CnnForward {
    std::vector<double> yhat;
    double min_abs_pre = INFINITY;
};

inline CnnForward cnn_forward(const CnnShape& s, std::span<const double> th, const Eigen::MatrixXd& X)
{
    const std::size_t L = s.conv_length(), F = s.filters, D = s.dense, W = s.flat_width();
    const std::size_t kb = 2 * F, dw = kb + F, db = dw + D * W, ow = db + D, ob = ow + D;
    CnnForward o;
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        std::vector<double> flat;
        for (std::size_t f = 0; f < F; ++f) {
            for (std::size_t t = 0; t < L; ++t) {
                const double z = th[2 * f] * X(r, Eigen::Index(t + 1)) + th[2 * f + 1] * X(r, Eigen::Index(t)) + th[kb + f];
                o.min_abs_pre = std::min(o.min_abs_pre, std::abs(z));
                flat.push_back(std::max(0.0, z));
            }
        }
        for (std::size_t e = 0; e < s.exogenous; ++e) flat.push_back(X(r, Eigen::Index(s.steps + e)));
        double y = th[ob];
        for (std::size_t d = 0; d < D; ++d) {
            double z = th[db + d];
            for (std::size_t k = 0; k < W; ++k) z += th[dw + d * W + k] * flat[k];
            o.min_abs_pre = std::min(o.min_abs_pre, std::abs(z));
            y += th[ow + d] * std::max(0.0, z);
        }
        o.yhat.push_back(y);
    }
    return o;
}

} // namespace oracle
