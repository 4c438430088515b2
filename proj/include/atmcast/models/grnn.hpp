#pragma once

#include <memory>

#include "atmcast/models/model.hpp"

namespace atmcast {

/// One-pass kernel regressor: stores the training pairs and predicts the
/// Gaussian-weighted mean of the stored targets.
class GrnnModel : public Regressor {
public:
    GrnnModel(Eigen::MatrixXd patterns, Eigen::VectorXd targets, double sigma);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
    std::size_t n_params() const override { return std::size_t(patterns_.size() + targets_.size()); }
    json parameters() const override;

    static std::shared_ptr<const Regressor> load(const json& params);

    const Eigen::MatrixXd& patterns() const { return patterns_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    double sigma() const { return sigma_; }

private:
    Eigen::MatrixXd patterns_;
    Eigen::VectorXd targets_;
    double sigma_;
};

FittedModel fit_grnn(const ModelSpec& spec, const SupervisedDataset& train);

Eigen::VectorXd fit_predict_grnn(const SupervisedDataset& train, double sigma, const Eigen::MatrixXd& query);

} // namespace atmcast
