#include "atmcast/models/cnn1d.hpp"

#include <cmath>

#include "atmcast/error.hpp"
#include "atmcast/models/optim.hpp"

namespace atmcast {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Offsets {
    std::size_t kernel, kernel_bias, dense, dense_bias, out, out_bias;

    explicit Offsets(const CnnShape& s)
    {
        kernel = 0;
        kernel_bias = kernel + s.filters * CnnShape::kKernel;
        dense = kernel_bias + s.filters;
        dense_bias = dense + s.dense * s.flat_width();
        out = dense_bias + s.dense;
        out_bias = out + s.dense;
    }
};

void check_shape(const CnnShape& s, const Eigen::MatrixXd& X)
{
    if (s.steps < CnnShape::kKernel) {
        throw Error(ErrorKind::shape, "cnn1d: lag window of " + std::to_string(s.steps) +
                                          " is shorter than the kernel width");
    }
    if (std::size_t(X.cols()) != s.steps + s.exogenous) {
        throw Error(ErrorKind::shape, "cnn1d: input has " + std::to_string(X.cols()) + " columns, expected " +
                                          std::to_string(s.steps + s.exogenous));
    }
}

/// Pre-activation convolution outputs (N x filters*conv_length).
Eigen::MatrixXd conv_pre(const CnnShape& s, std::span<const double> theta, const Eigen::MatrixXd& X)
{
    const Offsets o(s);
    const auto L = Eigen::Index(s.conv_length());
    Eigen::MatrixXd Z(X.rows(), Eigen::Index(s.filters) * L);
    for (std::size_t f = 0; f < s.filters; ++f) {
        const double k0 = theta[o.kernel + 2 * f], k1 = theta[o.kernel + 2 * f + 1];
        const double b = theta[o.kernel_bias + f];
        Z.middleCols(Eigen::Index(f) * L, L) =
            ((k0 * X.middleCols(1, L) + k1 * X.leftCols(L)).array() + b).matrix();
    }
    return Z;
}

struct Pass {
    Eigen::MatrixXd conv_z, flat, dense_z, dense_a;
    Eigen::VectorXd yhat;
};

Pass run(const CnnShape& s, std::span<const double> theta, const Eigen::MatrixXd& X)
{
    const Offsets o(s);
    Pass p;
    p.conv_z = conv_pre(s, theta, X);
    const Eigen::Index conv_cols = p.conv_z.cols();
    p.flat.resize(X.rows(), Eigen::Index(s.flat_width()));
    p.flat.leftCols(conv_cols) = p.conv_z.cwiseMax(0.0);
    if (s.exogenous > 0) {
        p.flat.rightCols(Eigen::Index(s.exogenous)) = X.rightCols(Eigen::Index(s.exogenous));
    }
    Eigen::Map<const RowMat> Wd(theta.data() + o.dense, Eigen::Index(s.dense), Eigen::Index(s.flat_width()));
    Eigen::Map<const Eigen::VectorXd> bd(theta.data() + o.dense_bias, Eigen::Index(s.dense));
    Eigen::Map<const Eigen::VectorXd> wo(theta.data() + o.out, Eigen::Index(s.dense));
    p.dense_z = (p.flat * Wd.transpose()).rowwise() + bd.transpose();
    p.dense_a = p.dense_z.cwiseMax(0.0);
    p.yhat = (p.dense_a * wo).array() + theta[o.out_bias];
    return p;
}

} // namespace

Cnn1dModel::Cnn1dModel(CnnShape shape, std::vector<double> theta) : shape_(shape), theta_(std::move(theta))
{
    if (theta_.size() != shape_.n_params()) {
        throw Error(ErrorKind::shape, "cnn1d: parameter vector has wrong length");
    }
}

std::vector<double> Cnn1dModel::initial_parameters(const CnnShape& s, std::uint64_t seed)
{
    if (s.steps < CnnShape::kKernel) {
        throw Error(ErrorKind::shape, "cnn1d: lag window shorter than the kernel width");
    }
    Rng rng(seed);
    std::vector<double> theta(s.n_params());
    std::span<double> all(theta);
    const Offsets o(s);
    uniform_fan_in(all.subspan(o.kernel, o.dense - o.kernel), CnnShape::kKernel, rng);
    uniform_fan_in(all.subspan(o.dense, o.out - o.dense), s.flat_width(), rng);
    uniform_fan_in(all.subspan(o.out, s.dense + 1), s.dense, rng);
    return theta;
}

Eigen::MatrixXd Cnn1dModel::convolve(const CnnShape& s, std::span<const double> theta, const Eigen::MatrixXd& X)
{
    check_shape(s, X);
    return conv_pre(s, theta, X).cwiseMax(0.0);
}

Eigen::VectorXd Cnn1dModel::forward(const CnnShape& s, std::span<const double> theta, const Eigen::MatrixXd& X)
{
    check_shape(s, X);
    return run(s, theta, X).yhat;
}

double Cnn1dModel::loss_and_gradient(const CnnShape& s, std::span<const double> theta, const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y, std::vector<double>* grad)
{
    check_shape(s, X);
    const Offsets o(s);
    const Pass p = run(s, theta, X);
    const double n = double(X.rows());
    const Eigen::VectorXd err = p.yhat - y;
    const double loss = err.squaredNorm() / n;
    if (grad == nullptr) {
        return loss;
    }
    grad->assign(theta.size(), 0.0);
    double* g = grad->data();
    const auto D = Eigen::Index(s.dense), W = Eigen::Index(s.flat_width());
    Eigen::Map<const RowMat> Wd(theta.data() + o.dense, D, W);
    Eigen::Map<const Eigen::VectorXd> wo(theta.data() + o.out, D);

    const Eigen::VectorXd dy = (2.0 / n) * err;
    Eigen::Map<Eigen::VectorXd>(g + o.out, D) = p.dense_a.transpose() * dy;
    g[o.out_bias] = dy.sum();

    const Eigen::MatrixXd dZd =
        ((dy * wo.transpose()).array() * (p.dense_z.array() > 0.0).cast<double>()).matrix();
    Eigen::Map<RowMat>(g + o.dense, D, W) = dZd.transpose() * p.flat;
    Eigen::Map<Eigen::VectorXd>(g + o.dense_bias, D) = dZd.colwise().sum().transpose();

    const Eigen::Index conv_cols = p.conv_z.cols();
    const Eigen::MatrixXd dFlat = dZd * Wd.leftCols(conv_cols);
    const Eigen::MatrixXd dZc = (dFlat.array() * (p.conv_z.array() > 0.0).cast<double>()).matrix();
    const auto L = Eigen::Index(s.conv_length());
    for (std::size_t f = 0; f < s.filters; ++f) {
        const auto block = dZc.middleCols(Eigen::Index(f) * L, L);
        g[o.kernel + 2 * f] = (block.array() * X.middleCols(1, L).array()).sum();
        g[o.kernel + 2 * f + 1] = (block.array() * X.leftCols(L).array()).sum();
        g[o.kernel_bias + f] = block.sum();
    }
    return loss;
}

Eigen::VectorXd Cnn1dModel::predict(const Eigen::MatrixXd& X) const
{
    return forward(shape_, theta_, X);
}

json Cnn1dModel::parameters() const
{
    return {{"steps", shape_.steps},
            {"filters", shape_.filters},
            {"dense", shape_.dense},
            {"exogenous", shape_.exogenous},
            {"theta", theta_}};
}

std::shared_ptr<const Regressor> Cnn1dModel::load(const json& p)
{
    CnnShape s{p.at("steps").get<std::size_t>(), p.at("filters").get<std::size_t>(), p.at("dense").get<std::size_t>(),
               p.at("exogenous").get<std::size_t>()};
    return std::make_shared<Cnn1dModel>(s, p.at("theta").get<std::vector<double>>());
}

FittedModel fit_cnn1d(const ModelSpec& spec, const SupervisedDataset& train)
{
    const auto& h = spec.hyper;
    const CnnShape shape{train.lag_columns, h.at("n_filters").get<std::size_t>(), h.at("dense_nodes").get<std::size_t>(),
                         train.exogenous_columns()};
    check_shape(shape, train.X);
    const auto epochs = h.at("epochs").get<std::size_t>();

    std::vector<double> theta = Cnn1dModel::initial_parameters(shape, spec.seed);
    Adam opt(h.at("lr").get<double>(), theta.size());
    std::vector<double> grad, curve;
    curve.reserve(epochs);
    for (std::size_t e = 0; e < epochs; ++e) {
        const double loss = Cnn1dModel::loss_and_gradient(shape, theta, train.X, train.y, &grad);
        if (!std::isfinite(loss)) {
            throw Error(ErrorKind::divergence, "cnn1d loss is non-finite at epoch " + std::to_string(e));
        }
        curve.push_back(loss);
        opt.step(theta, grad);
    }
    return FittedModel(spec, train.feature_names, std::make_shared<Cnn1dModel>(shape, std::move(theta)),
                       std::move(curve));
}

Eigen::VectorXd fit_predict_cnn1d(const SupervisedDataset& train, std::size_t n_filters, std::size_t dense_nodes,
                                  std::size_t epochs, std::uint64_t seed, const Eigen::MatrixXd& query)
{
    const ModelSpec spec{Family::cnn1d, {{"n_filters", n_filters}, {"dense_nodes", dense_nodes}, {"epochs", epochs}},
                         seed};
    return fit_model(spec, train).predict(query);
}

} // namespace atmcast
