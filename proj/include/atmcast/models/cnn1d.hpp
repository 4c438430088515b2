#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "atmcast/models/model.hpp"

namespace atmcast {

/// Width-2 valid convolution (ReLU) over the lag window, flattened and joined
/// with the exogenous columns, then one ReLU dense layer and a linear output.
struct CnnShape {
    std::size_t steps = 2;
    std::size_t filters = 5;
    std::size_t dense = 2;
    std::size_t exogenous = 0;

    static constexpr std::size_t kKernel = 2;
    std::size_t conv_length() const { return steps - kKernel + 1; }
    std::size_t flat_width() const { return filters * conv_length() + exogenous; }
    std::size_t n_params() const { return filters * (kKernel + 1) + dense * (flat_width() + 1) + dense + 1; }
};

class Cnn1dModel : public Regressor {
public:
    Cnn1dModel(CnnShape shape, std::vector<double> theta);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
    std::size_t n_params() const override { return shape_.n_params(); }
    json parameters() const override;

    static std::shared_ptr<const Regressor> load(const json& params);

    static std::vector<double> initial_parameters(const CnnShape& shape, std::uint64_t seed);
    static Eigen::VectorXd forward(const CnnShape& shape, std::span<const double> theta, const Eigen::MatrixXd& X);
    static double loss_and_gradient(const CnnShape& shape, std::span<const double> theta, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, std::vector<double>* grad);
    /// Post-ReLU convolution outputs, one row per input row, filter-major
    /// (filter f, position t at column f * conv_length() + t). Kernel taps
    /// (k0, k1) give k0 * x[t+1] + k1 * x[t] + bias.
    static Eigen::MatrixXd convolve(const CnnShape& shape, std::span<const double> theta, const Eigen::MatrixXd& X);

private:
    CnnShape shape_;
    std::vector<double> theta_;
};

FittedModel fit_cnn1d(const ModelSpec& spec, const SupervisedDataset& train);

Eigen::VectorXd fit_predict_cnn1d(const SupervisedDataset& train, std::size_t n_filters, std::size_t dense_nodes,
                                  std::size_t epochs, std::uint64_t seed, const Eigen::MatrixXd& query);

} // namespace atmcast
