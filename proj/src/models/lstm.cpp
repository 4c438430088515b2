#include "atmcast/models/lstm.hpp"

#include <cmath>

#include "atmcast/error.hpp"
#include "atmcast/models/optim.hpp"

namespace atmcast {

namespace {

// Gate order inside theta: candidate, update, forget, output.
constexpr std::size_t kCandidate = 0, kUpdate = 1, kForget = 2, kOutput = 3;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Layout {
    const LstmShape& s;

    std::size_t weights(std::size_t gate) const { return gate * s.gate_block(); }
    std::size_t bias(std::size_t gate) const { return gate * s.gate_block() + s.hidden * (s.hidden + 1); }
    std::size_t out_weights() const { return 4 * s.gate_block(); }
    std::size_t out_bias() const { return out_weights() + s.hidden + s.exogenous; }
};

/// Forward pass for one row, keeping every step for backpropagation.
struct Tape {
    std::vector<LstmStep> steps;
    double output = 0.0;
};

void run_cell(const LstmShape& s, std::span<const double> theta, const double* seq, Tape& tape)
{
    const Layout L{s};
    const std::size_t h = s.hidden;
    std::vector<double> a_prev(h, 0.0), c_prev(h, 0.0);
    tape.steps.resize(s.steps);
    for (std::size_t t = 0; t < s.steps; ++t) {
        auto& st = tape.steps[t];
        std::vector<double>* gates[4] = {&st.candidate, &st.update, &st.forget, &st.output};
        for (std::size_t g = 0; g < 4; ++g) {
            auto& out = *gates[g];
            out.assign(h, 0.0);
            const double* W = theta.data() + L.weights(g);
            const double* b = theta.data() + L.bias(g);
            for (std::size_t r = 0; r < h; ++r) {
                const double* w = W + r * (h + 1);
                double z = b[r] + w[h] * seq[t];
                for (std::size_t k = 0; k < h; ++k) z += w[k] * a_prev[k];
                out[r] = g == kCandidate ? std::tanh(z) : sigmoid(z);
            }
        }
        st.cell.assign(h, 0.0);
        st.hidden.assign(h, 0.0);
        for (std::size_t r = 0; r < h; ++r) {
            st.cell[r] = st.update[r] * st.candidate[r] + st.forget[r] * c_prev[r];
            st.hidden[r] = st.output[r] * std::tanh(st.cell[r]);
        }
        a_prev = st.hidden;
        c_prev = st.cell;
    }
    const double* wo = theta.data() + L.out_weights();
    double y = theta[L.out_bias()];
    for (std::size_t r = 0; r < h; ++r) y += wo[r] * a_prev[r];
    for (std::size_t e = 0; e < s.exogenous; ++e) y += wo[h + e] * seq[s.steps + e];
    tape.output = y;
}

/// Accumulates d(loss)/d(theta) for one row given d(loss)/d(output).
void backprop(const LstmShape& s, std::span<const double> theta, const double* row, const Tape& tape, double dy,
              double* grad)
{
    const Layout L{s};
    const std::size_t h = s.hidden;
    const double* wo = theta.data() + L.out_weights();
    double* gwo = grad + L.out_weights();
    const auto& last = tape.steps.back().hidden;
    for (std::size_t r = 0; r < h; ++r) gwo[r] += dy * last[r];
    for (std::size_t e = 0; e < s.exogenous; ++e) gwo[h + e] += dy * row[s.steps + e];
    grad[L.out_bias()] += dy;

    std::vector<double> da(h), dc_next(h, 0.0), dz[4], da_prev(h);
    for (auto& v : dz) v.assign(h, 0.0);
    for (std::size_t r = 0; r < h; ++r) da[r] = dy * wo[r];

    for (std::size_t t = s.steps; t-- > 0;) {
        const auto& st = tape.steps[t];
        const std::vector<double> zeros(h, 0.0);
        const auto& c_prev = t > 0 ? tape.steps[t - 1].cell : zeros;
        const auto& a_prev = t > 0 ? tape.steps[t - 1].hidden : zeros;
        for (std::size_t r = 0; r < h; ++r) {
            const double tc = std::tanh(st.cell[r]);
            const double d_out = da[r] * tc;
            const double dc = dc_next[r] + da[r] * st.output[r] * (1.0 - tc * tc);
            const double d_cand = dc * st.update[r];
            const double d_upd = dc * st.candidate[r];
            const double d_fgt = dc * c_prev[r];
            dc_next[r] = dc * st.forget[r];
            dz[kCandidate][r] = d_cand * (1.0 - st.candidate[r] * st.candidate[r]);
            dz[kUpdate][r] = d_upd * st.update[r] * (1.0 - st.update[r]);
            dz[kForget][r] = d_fgt * st.forget[r] * (1.0 - st.forget[r]);
            dz[kOutput][r] = d_out * st.output[r] * (1.0 - st.output[r]);
        }
        std::fill(da_prev.begin(), da_prev.end(), 0.0);
        for (std::size_t g = 0; g < 4; ++g) {
            const double* W = theta.data() + L.weights(g);
            double* gW = grad + L.weights(g);
            double* gb = grad + L.bias(g);
            for (std::size_t r = 0; r < h; ++r) {
                const double d = dz[g][r];
                double* gw = gW + r * (h + 1);
                const double* w = W + r * (h + 1);
                for (std::size_t k = 0; k < h; ++k) {
                    gw[k] += d * a_prev[k];
                    da_prev[k] += d * w[k];
                }
                gw[h] += d * row[t];
                gb[r] += d;
            }
        }
        da = da_prev;
    }
}

void check_shape(const LstmShape& s, const Eigen::MatrixXd& X)
{
    if (s.steps == 0) {
        throw Error(ErrorKind::shape, "lstm: sequence length is 0");
    }
    if (std::size_t(X.cols()) != s.steps + s.exogenous) {
        throw Error(ErrorKind::shape, "lstm: input has " + std::to_string(X.cols()) + " columns, expected " +
                                          std::to_string(s.steps + s.exogenous));
    }
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace

LstmModel::LstmModel(LstmShape shape, std::vector<double> theta) : shape_(shape), theta_(std::move(theta))
{
    if (theta_.size() != shape_.n_params()) {
        throw Error(ErrorKind::shape, "lstm: parameter vector has wrong length");
    }
}

std::vector<double> LstmModel::initial_parameters(const LstmShape& s, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> theta(s.n_params());
    std::span<double> all(theta);
    const Layout L{s};
    for (std::size_t g = 0; g < 4; ++g) {
        uniform_fan_in(all.subspan(L.weights(g), s.gate_block()), s.hidden + 1, rng);
    }
    uniform_fan_in(all.subspan(L.out_weights(), s.hidden + s.exogenous + 1), s.hidden + s.exogenous, rng);
    return theta;
}

std::vector<LstmStep> LstmModel::trace(const LstmShape& s, std::span<const double> theta, std::span<const double> row)
{
    if (row.size() != s.steps + s.exogenous || s.steps == 0) {
        throw Error(ErrorKind::shape, "lstm: row width does not match the cell shape");
    }
    Tape tape;
    run_cell(s, theta, row.data(), tape);
    return tape.steps;
}

Eigen::VectorXd LstmModel::forward(const LstmShape& s, std::span<const double> theta, const Eigen::MatrixXd& X)
{
    check_shape(s, X);
    const RowMat R = X;
    Eigen::VectorXd out(X.rows());
    Tape tape;
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        run_cell(s, theta, R.row(i).data(), tape);
        out(i) = tape.output;
    }
    return out;
}

double LstmModel::loss_and_gradient(const LstmShape& s, std::span<const double> theta, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, std::vector<double>* grad)
{
    check_shape(s, X);
    const RowMat R = X;
    const double n = double(X.rows());
    if (grad) grad->assign(theta.size(), 0.0);
    double loss = 0.0;
    Tape tape;
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        run_cell(s, theta, R.row(i).data(), tape);
        const double err = tape.output - y(i);
        loss += err * err;
        if (grad) backprop(s, theta, R.row(i).data(), tape, 2.0 * err / n, grad->data());
    }
    return loss / n;
}

Eigen::VectorXd LstmModel::predict(const Eigen::MatrixXd& X) const
{
    return forward(shape_, theta_, X);
}

json LstmModel::parameters() const
{
    return {{"hidden", shape_.hidden}, {"steps", shape_.steps}, {"exogenous", shape_.exogenous}, {"theta", theta_}};
}

std::shared_ptr<const Regressor> LstmModel::load(const json& p)
{
    LstmShape s{p.at("hidden").get<std::size_t>(), p.at("steps").get<std::size_t>(),
                p.at("exogenous").get<std::size_t>()};
    return std::make_shared<LstmModel>(s, p.at("theta").get<std::vector<double>>());
}

FittedModel fit_lstm(const ModelSpec& spec, const SupervisedDataset& train)
{
    const auto& h = spec.hyper;
    const LstmShape shape{h.at("hidden").get<std::size_t>(), train.lag_columns, train.exogenous_columns()};
    const auto epochs = h.at("epochs").get<std::size_t>();
    check_shape(shape, train.X);

    std::vector<double> theta = LstmModel::initial_parameters(shape, spec.seed);
    Adam opt(h.at("lr").get<double>(), theta.size());
    std::vector<double> grad, curve;
    curve.reserve(epochs);
    for (std::size_t e = 0; e < epochs; ++e) {
        const double loss = LstmModel::loss_and_gradient(shape, theta, train.X, train.y, &grad);
        if (!std::isfinite(loss)) {
            throw Error(ErrorKind::divergence, "lstm loss is non-finite at epoch " + std::to_string(e));
        }
        curve.push_back(loss);
        opt.step(theta, grad);
    }
    return FittedModel(spec, train.feature_names, std::make_shared<LstmModel>(shape, std::move(theta)),
                       std::move(curve));
}

Eigen::VectorXd fit_predict_lstm(const SupervisedDataset& train, std::size_t hidden, std::size_t epochs, double lr,
                                 std::uint64_t seed, const Eigen::MatrixXd& query)
{
    const ModelSpec spec{Family::lstm, {{"hidden", hidden}, {"epochs", epochs}, {"lr", lr}}, seed};
    return fit_model(spec, train).predict(query);
}

} // namespace atmcast
