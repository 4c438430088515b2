#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "atmcast/models/model.hpp"

namespace atmcast {

/// Scalar-input recurrent cell over the lag window; the final hidden state is
/// joined with the exogenous columns before a linear output unit.
struct LstmShape {
    std::size_t hidden = 4;
    std::size_t steps = 1;
    std::size_t exogenous = 0;

    std::size_t gate_block() const { return hidden * (hidden + 1) + hidden; }
    std::size_t n_params() const { return 4 * gate_block() + hidden + exogenous + 1; }
};

/// Cell state after one input step.
struct LstmStep {
    std::vector<double> candidate, update, forget, output, cell, hidden;
};

class LstmModel : public Regressor {
public:
    LstmModel(LstmShape shape, std::vector<double> theta);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
    std::size_t n_params() const override { return shape_.n_params(); }
    json parameters() const override;

    static std::shared_ptr<const Regressor> load(const json& params);

    static std::vector<double> initial_parameters(const LstmShape& shape, std::uint64_t seed);
    static Eigen::VectorXd forward(const LstmShape& shape, std::span<const double> theta, const Eigen::MatrixXd& X);
    static double loss_and_gradient(const LstmShape& shape, std::span<const double> theta, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, std::vector<double>* grad);
    /// Per-step cell values for one input row.
    static std::vector<LstmStep> trace(const LstmShape& shape, std::span<const double> theta,
                                       std::span<const double> row);

private:
    LstmShape shape_;
    std::vector<double> theta_;
};

FittedModel fit_lstm(const ModelSpec& spec, const SupervisedDataset& train);

Eigen::VectorXd fit_predict_lstm(const SupervisedDataset& train, std::size_t hidden, std::size_t epochs, double lr,
                                 std::uint64_t seed, const Eigen::MatrixXd& query);

} // namespace atmcast
