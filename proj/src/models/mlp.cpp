#include "atmcast/models/mlp.hpp"

#include <cmath>

#include "atmcast/error.hpp"
#include "atmcast/models/optim.hpp"

namespace atmcast {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using CVec = Eigen::Map<const Eigen::VectorXd>;

struct Views {
    CMap W1;
    CVec b1;
    CMap W2;
    CVec b2;
    CVec w3;
    double b3;
};

Views views(const MlpShape& s, std::span<const double> t)
{
    const double* p = t.data();
    const double* W1 = p;
    const double* b1 = W1 + s.nodes1 * s.inputs;
    const double* W2 = b1 + s.nodes1;
    const double* b2 = W2 + s.nodes2 * s.nodes1;
    const double* w3 = b2 + s.nodes2;
    const double* b3 = w3 + s.nodes2;
    const auto n1 = Eigen::Index(s.nodes1), n2 = Eigen::Index(s.nodes2), in = Eigen::Index(s.inputs);
    return {CMap(W1, n1, in), CVec(b1, n1), CMap(W2, n2, n1), CVec(b2, n2), CVec(w3, n2), *b3};
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z)
{
    return (1.0 + (-z.array()).exp()).inverse().matrix();
}

} // namespace

MlpModel::MlpModel(MlpShape shape, std::vector<double> theta) : shape_(shape), theta_(std::move(theta))
{
    if (theta_.size() != shape_.n_params()) {
        throw Error(ErrorKind::shape, "MLP parameter vector has wrong length");
    }
}

std::vector<double> MlpModel::initial_parameters(const MlpShape& s, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> theta(s.n_params());
    std::span<double> all(theta);
    std::size_t off = 0;
    auto block = [&](std::size_t n, std::size_t fan_in) {
        uniform_fan_in(all.subspan(off, n), fan_in, rng);
        off += n;
    };
    block(s.nodes1 * s.inputs, s.inputs);
    block(s.nodes1, s.inputs);
    block(s.nodes2 * s.nodes1, s.nodes1);
    block(s.nodes2, s.nodes1);
    block(s.nodes2, s.nodes2);
    block(1, s.nodes2);
    return theta;
}

Eigen::VectorXd MlpModel::forward(const MlpShape& s, std::span<const double> theta, const Eigen::MatrixXd& X)
{
    const auto v = views(s, theta);
    const Eigen::MatrixXd A1 = sigmoid((X * v.W1.transpose()).rowwise() + v.b1.transpose());
    const Eigen::MatrixXd A2 = sigmoid((A1 * v.W2.transpose()).rowwise() + v.b2.transpose());
    return (A2 * v.w3).array() + v.b3;
}

double MlpModel::loss_and_gradient(const MlpShape& s, std::span<const double> theta, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, std::vector<double>* grad)
{
    const auto v = views(s, theta);
    const double n = double(X.rows());
    const Eigen::MatrixXd A1 = sigmoid((X * v.W1.transpose()).rowwise() + v.b1.transpose());
    const Eigen::MatrixXd A2 = sigmoid((A1 * v.W2.transpose()).rowwise() + v.b2.transpose());
    const Eigen::VectorXd yhat = (A2 * v.w3).array() + v.b3;
    const Eigen::VectorXd err = yhat - y;
    const double loss = err.squaredNorm() / n;
    if (grad == nullptr) {
        return loss;
    }
    grad->assign(theta.size(), 0.0);
    const Eigen::VectorXd dy = (2.0 / n) * err;
    const Eigen::MatrixXd dZ2 = ((dy * v.w3.transpose()).array() * A2.array() * (1.0 - A2.array())).matrix();
    const Eigen::MatrixXd dZ1 = ((dZ2 * v.W2).array() * A1.array() * (1.0 - A1.array())).matrix();

    double* g = grad->data();
    Eigen::Map<RowMat> gW1(g, Eigen::Index(s.nodes1), Eigen::Index(s.inputs));
    gW1 = dZ1.transpose() * X;
    g += s.nodes1 * s.inputs;
    Eigen::Map<Eigen::VectorXd>(g, Eigen::Index(s.nodes1)) = dZ1.colwise().sum().transpose();
    g += s.nodes1;
    Eigen::Map<RowMat> gW2(g, Eigen::Index(s.nodes2), Eigen::Index(s.nodes1));
    gW2 = dZ2.transpose() * A1;
    g += s.nodes2 * s.nodes1;
    Eigen::Map<Eigen::VectorXd>(g, Eigen::Index(s.nodes2)) = dZ2.colwise().sum().transpose();
    g += s.nodes2;
    Eigen::Map<Eigen::VectorXd>(g, Eigen::Index(s.nodes2)) = A2.transpose() * dy;
    g += s.nodes2;
    *g = dy.sum();
    return loss;
}

Eigen::VectorXd MlpModel::predict(const Eigen::MatrixXd& X) const
{
    return forward(shape_, theta_, X);
}

json MlpModel::parameters() const
{
    return {{"inputs", shape_.inputs}, {"nodes1", shape_.nodes1}, {"nodes2", shape_.nodes2}, {"theta", theta_}};
}

std::shared_ptr<const Regressor> MlpModel::load(const json& p)
{
    MlpShape s{p.at("inputs").get<std::size_t>(), p.at("nodes1").get<std::size_t>(), p.at("nodes2").get<std::size_t>()};
    return std::make_shared<MlpModel>(s, p.at("theta").get<std::vector<double>>());
}

MlpTraining train_mlp(const MlpShape& shape, const MlpHyper& hyper, std::uint64_t seed, const SupervisedDataset& train,
                      const Validation& validation)
{
    MlpTraining out;
    std::vector<double> theta = MlpModel::initial_parameters(shape, seed);
    Momentum opt(hyper.lr, hyper.momentum, theta.size());
    std::vector<double> grad;

    const bool early = hyper.patience > 0 && validation.data != nullptr && validation.data->rows() > 0;
    std::vector<double> best_theta = theta;
    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    if (early) {
        best_score = validation.smape_of(MlpModel::forward(shape, theta, validation.data->X));
    }

    std::size_t epoch = 0;
    for (; epoch < hyper.epochs; ++epoch) {
        const double loss = MlpModel::loss_and_gradient(shape, theta, train.X, train.y, &grad);
        if (!std::isfinite(loss)) {
            throw Error(ErrorKind::divergence, "MLP loss is non-finite at epoch " + std::to_string(epoch));
        }
        out.loss_curve.push_back(loss);
        opt.step(theta, grad);
        if (early) {
            const double score = validation.smape_of(MlpModel::forward(shape, theta, validation.data->X));
            if (score < best_score) {
                best_score = score;
                best_theta = theta;
                best_epoch = epoch + 1;
            } else if (epoch + 1 - best_epoch >= hyper.patience) {
                ++epoch;
                break;
            }
        }
    }
    if (early) {
        out.theta = std::move(best_theta);
        out.epochs_used = best_epoch;
    } else {
        out.theta = std::move(theta);
        out.epochs_used = epoch;
    }
    return out;
}

FittedModel fit_mlp(const ModelSpec& spec, const SupervisedDataset& train, const Validation& validation)
{
    const auto& h = spec.hyper;
    MlpHyper hyper{h.at("nodes1").get<std::size_t>(), h.at("nodes2").get<std::size_t>(), h.at("lr").get<double>(),
                   h.at("momentum").get<double>(), h.at("epochs").get<std::size_t>(),
                   h.at("patience").get<std::size_t>()};
    const MlpShape shape{std::size_t(train.X.cols()), hyper.nodes1, hyper.nodes2};
    auto run = train_mlp(shape, hyper, spec.seed, train, validation);
    json info = {{"epochs_used", run.epochs_used}};
    return FittedModel(spec, train.feature_names, std::make_shared<MlpModel>(shape, std::move(run.theta)),
                       std::move(run.loss_curve), std::move(info));
}

Eigen::VectorXd fit_predict_mlp(const SupervisedDataset& train, std::size_t nodes1, std::size_t nodes2, double lr,
                                double momentum, std::size_t epochs, std::uint64_t seed, const Eigen::MatrixXd& query)
{
    ModelSpec spec{Family::mlp,
                   {{"nodes1", nodes1}, {"nodes2", nodes2}, {"lr", lr}, {"momentum", momentum}, {"epochs", epochs},
                    {"patience", 0}},
                   seed};
    return fit_model(spec, train).predict(query);
}

} // namespace atmcast
