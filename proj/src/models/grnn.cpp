#include "atmcast/models/grnn.hpp"

#include "atmcast/error.hpp"
#include "atmcast/kernels.hpp"

namespace atmcast {

GrnnModel::GrnnModel(Eigen::MatrixXd patterns, Eigen::VectorXd targets, double sigma)
    : patterns_(std::move(patterns)), targets_(std::move(targets)), sigma_(sigma)
{
    if (patterns_.rows() == 0) {
        throw Error(ErrorKind::fit, "grnn: empty pattern layer");
    }
    if (patterns_.rows() != targets_.size()) {
        throw Error(ErrorKind::shape, "grnn: pattern and target counts differ");
    }
    if (!(sigma_ > 0.0)) {
        throw Error(ErrorKind::config, "grnn: sigma must be positive");
    }
}

Eigen::VectorXd GrnnModel::predict(const Eigen::MatrixXd& X) const
{
    const kernels::KernelRegressionInput in{&patterns_, &targets_, sigma_};
    return kernels::parallel::kernel_regression(in, X);
}

json GrnnModel::parameters() const
{
    return {{"rows", patterns_.rows()},
            {"cols", patterns_.cols()},
            {"sigma", sigma_},
            {"pattern_inputs", to_vector(patterns_)},
            {"pattern_targets", to_vector(targets_)}};
}

std::shared_ptr<const Regressor> GrnnModel::load(const json& p)
{
    const auto rows = p.at("rows").get<Eigen::Index>();
    const auto cols = p.at("cols").get<Eigen::Index>();
    const auto flat = p.at("pattern_inputs").get<std::vector<double>>();
    const auto targets = p.at("pattern_targets").get<std::vector<double>>();
    if (flat.size() != std::size_t(rows * cols) || targets.size() != std::size_t(rows)) {
        throw Error(ErrorKind::parse, "grnn: parameter arrays have inconsistent sizes");
    }
    Eigen::MatrixXd P(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) P(r, c) = flat[std::size_t(r * cols + c)];
    Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(targets.data(), rows);
    return std::make_shared<GrnnModel>(std::move(P), std::move(Y), p.at("sigma").get<double>());
}

FittedModel fit_grnn(const ModelSpec& spec, const SupervisedDataset& train)
{
    auto impl = std::make_shared<GrnnModel>(train.X, train.y, spec.hyper.at("sigma").get<double>());
    return FittedModel(spec, train.feature_names, std::move(impl));
}

Eigen::VectorXd fit_predict_grnn(const SupervisedDataset& train, double sigma, const Eigen::MatrixXd& query)
{
    return fit_model(ModelSpec{Family::grnn, {{"sigma", sigma}}, 0}, train).predict(query);
}

} // namespace atmcast
