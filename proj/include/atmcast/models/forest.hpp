#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "atmcast/models/model.hpp"

namespace atmcast {

struct TreeNode {
    /// -1 marks a leaf.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const Eigen::MatrixXd& X, Eigen::Index row) const;
    std::size_t leaves() const;
};

struct ForestOptions {
    std::size_t n_estimators = 20;
    /// 0 = grow until leaves are pure or hold one sample.
    std::size_t max_depth = 8;
    /// 0 = ceil(features / 3).
    std::size_t max_features = 0;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Grows one variance-reduction tree on the given sample indices (repeats allowed).
RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::size_t> sample,
                         std::size_t max_depth, std::size_t max_features, Rng& rng);

class ForestModel : public Regressor {
public:
    explicit ForestModel(std::vector<RegressionTree> trees);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
    std::size_t n_params() const override;
    json parameters() const override;

    static std::shared_ptr<const Regressor> load(const json& params);
    static std::shared_ptr<ForestModel> train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                              const ForestOptions& opt);

    const std::vector<RegressionTree>& trees() const { return trees_; }

private:
    std::vector<RegressionTree> trees_;
};

FittedModel fit_forest(const ModelSpec& spec, const SupervisedDataset& train);

Eigen::VectorXd fit_predict_rf(const SupervisedDataset& train, std::size_t n_estimators, std::size_t max_depth,
                               std::size_t max_features, std::uint64_t seed, const Eigen::MatrixXd& query);

} // namespace atmcast
