#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "atmcast/models/model.hpp"

namespace atmcast {

/// input -> nodes1 (sigmoid) -> nodes2 (sigmoid) -> 1 (linear).
struct MlpShape {
    std::size_t inputs = 1;
    std::size_t nodes1 = 1;
    std::size_t nodes2 = 1;

    std::size_t n_params() const { return nodes1 * (inputs + 1) + nodes2 * (nodes1 + 1) + nodes2 + 1; }
};

class MlpModel : public Regressor {
public:
    MlpModel(MlpShape shape, std::vector<double> theta);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
    std::size_t n_params() const override { return shape_.n_params(); }
    json parameters() const override;

    static std::shared_ptr<const Regressor> load(const json& params);

    static std::vector<double> initial_parameters(const MlpShape& shape, std::uint64_t seed);
    static Eigen::VectorXd forward(const MlpShape& shape, std::span<const double> theta, const Eigen::MatrixXd& X);
    /// Mean squared error and, when `grad` is non-null, its gradient w.r.t. theta.
    static double loss_and_gradient(const MlpShape& shape, std::span<const double> theta, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, std::vector<double>* grad);

private:
    MlpShape shape_;
    std::vector<double> theta_;
};

struct MlpHyper {
    std::size_t nodes1 = 5;
    std::size_t nodes2 = 2;
    double lr = 0.1;
    double momentum = 0.9;
    std::size_t epochs = 500;
    /// Early-stopping patience on validation SMAPE; 0 disables.
    std::size_t patience = 50;
};

struct MlpTraining {
    std::vector<double> theta;
    std::vector<double> loss_curve;
    /// Epoch count that produced `theta` (best validation epoch when early stopping ran).
    std::size_t epochs_used = 0;
};

MlpTraining train_mlp(const MlpShape& shape, const MlpHyper& hyper, std::uint64_t seed, const SupervisedDataset& train,
                      const Validation& validation);

FittedModel fit_mlp(const ModelSpec& spec, const SupervisedDataset& train, const Validation& validation);

Eigen::VectorXd fit_predict_mlp(const SupervisedDataset& train, std::size_t nodes1, std::size_t nodes2, double lr,
                                double momentum, std::size_t epochs, std::uint64_t seed, const Eigen::MatrixXd& query);

} // namespace atmcast
