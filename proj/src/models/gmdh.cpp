#include "atmcast/models/gmdh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atmcast/error.hpp"
#include "atmcast/linalg.hpp"

namespace atmcast {

namespace {

constexpr std::size_t kMaxTerms = 10;

/// Columns of the next layer's input matrix.
Eigen::MatrixXd layer_outputs(const GmdhLayer& layer, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& original,
                              bool admix)
{
    const auto units = Eigen::Index(layer.units.size());
    Eigen::MatrixXd out(inputs.rows(), units + (admix ? original.cols() : 0));
    for (Eigen::Index u = 0; u < units; ++u) {
        const auto& unit = layer.units[std::size_t(u)];
        for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
            out(r, u) = unit.eval(inputs(r, Eigen::Index(unit.left)), inputs(r, Eigen::Index(unit.right)));
        }
    }
    if (admix) {
        out.rightCols(original.cols()) = original;
    }
    return out;
}

Eigen::MatrixXd design(RefFunction f, const Eigen::MatrixXd& in, std::size_t i, std::size_t j)
{
    const auto terms = Eigen::Index(term_count(f));
    Eigen::MatrixXd D(in.rows(), terms);
    double buf[kMaxTerms];
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
        polynomial_terms(f, in(r, Eigen::Index(i)), in(r, Eigen::Index(j)), buf);
        for (Eigen::Index c = 0; c < terms; ++c) D(r, c) = buf[c];
    }
    return D;
}

} // namespace

const char* to_string(RefFunction f)
{
    switch (f) {
    case RefFunction::linear: return "linear";
    case RefFunction::linear_cov: return "linear_cov";
    case RefFunction::quadratic: return "quadratic";
    case RefFunction::cubic: return "cubic";
    }
    return "unknown";
}

RefFunction parse_ref_function(const std::string& text)
{
    for (auto f : {RefFunction::linear, RefFunction::linear_cov, RefFunction::quadratic, RefFunction::cubic}) {
        if (text == to_string(f)) return f;
    }
    throw Error(ErrorKind::config, "unknown gmdh reference function '" + text + "'");
}

std::size_t term_count(RefFunction f)
{
    switch (f) {
    case RefFunction::linear: return 3;
    case RefFunction::linear_cov: return 4;
    case RefFunction::quadratic: return 6;
    case RefFunction::cubic: return 10;
    }
    return 0;
}

void polynomial_terms(RefFunction f, double a, double b, double* out)
{
    out[0] = 1.0;
    out[1] = a;
    out[2] = b;
    switch (f) {
    case RefFunction::linear: return;
    case RefFunction::linear_cov: out[3] = a * b; return;
    case RefFunction::quadratic:
        out[3] = a * a;
        out[4] = b * b;
        out[5] = a * b;
        return;
    case RefFunction::cubic:
        out[3] = a * a;
        out[4] = b * b;
        out[5] = a * b;
        out[6] = a * a * a;
        out[7] = b * b * b;
        out[8] = a * a * b;
        out[9] = a * b * b;
        return;
    }
}

double GmdhUnit::eval(double a, double b) const
{
    double t[kMaxTerms];
    polynomial_terms(function, a, b, t);
    double s = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k) s += coef[k] * t[k];
    return s;
}

GmdhModel::GmdhModel(std::vector<GmdhLayer> layers, std::size_t n_inputs, bool admix)
    : layers_(std::move(layers)), n_inputs_(n_inputs), admix_(admix)
{
    if (layers_.empty() || layers_.back().units.empty()) {
        throw Error(ErrorKind::fit, "gmdh: network has no units");
    }
}

std::shared_ptr<GmdhModel> GmdhModel::train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Eigen::MatrixXd& Xv, const Eigen::VectorXd& yv,
                                            const GmdhOptions& opt)
{
    if (X.rows() == 0 || Xv.rows() == 0) {
        throw Error(ErrorKind::fit, "gmdh: train and validation must be non-empty");
    }
    if (X.cols() < 2) {
        throw Error(ErrorKind::pairing, "gmdh: needs at least 2 input features, got " + std::to_string(X.cols()));
    }
    if (opt.functions.empty()) {
        throw Error(ErrorKind::config, "gmdh: no reference functions");
    }

    struct Candidate {
        std::size_t i, j;
        RefFunction f;
    };

    const double scale = std::max(std::sqrt(yv.squaredNorm() / double(yv.size())), 1e-300);
    std::vector<GmdhLayer> layers;
    Eigen::MatrixXd in = X, in_v = Xv;
    double prev_best = std::numeric_limits<double>::infinity();

    for (std::size_t layer = 0; layer < opt.max_layers; ++layer) {
        const auto width = std::size_t(in.cols());
        std::vector<Candidate> cands;
        for (std::size_t i = 0; i < width; ++i)
            for (std::size_t j = i + 1; j < width; ++j)
                for (RefFunction f : opt.functions) cands.push_back({i, j, f});

        std::vector<std::optional<GmdhUnit>> fitted(cands.size());
        const auto n_cands = std::ptrdiff_t(cands.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t c = 0; c < n_cands; ++c) {
            const auto& cd = cands[std::size_t(c)];
            const auto fit = ols(design(cd.f, in, cd.i, cd.j), y);
            if (!fit || !fit->beta.allFinite()) {
                continue;
            }
            GmdhUnit u{cd.i, cd.j, cd.f, to_vector(fit->beta), 0.0};
            double ss = 0.0;
            for (Eigen::Index r = 0; r < in_v.rows(); ++r) {
                const double e = u.eval(in_v(r, Eigen::Index(cd.i)), in_v(r, Eigen::Index(cd.j))) - yv(r);
                ss += e * e;
            }
            u.validation_rmse = std::sqrt(ss / double(in_v.rows()));
            if (std::isfinite(u.validation_rmse)) {
                fitted[std::size_t(c)] = std::move(u);
            }
        }

        std::vector<std::size_t> order;
        for (std::size_t c = 0; c < fitted.size(); ++c) {
            if (fitted[c]) order.push_back(c);
        }
        if (order.empty()) {
            if (layers.empty()) {
                throw Error(ErrorKind::fit, "gmdh: every candidate regression was singular");
            }
            break;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return fitted[a]->validation_rmse < fitted[b]->validation_rmse;
        });

        const double best = fitted[order.front()]->validation_rmse;
        if (!(best < prev_best * (1.0 - opt.min_improvement))) {
            break;
        }
        const auto keep_frac = std::size_t(std::ceil(opt.alpha * double(cands.size())));
        const std::size_t keep = std::min({order.size(), std::max<std::size_t>(2, keep_frac), opt.max_units});

        GmdhLayer next;
        for (std::size_t k = 0; k < keep; ++k) next.units.push_back(*fitted[order[k]]);
        const bool exact = best <= 1e-12 * scale;
        Eigen::MatrixXd next_in = layer_outputs(next, in, X, opt.admix);
        Eigen::MatrixXd next_in_v = layer_outputs(next, in_v, Xv, opt.admix);
        layers.push_back(std::move(next));
        prev_best = best;
        if (exact || next_in.cols() < 2) {
            break;
        }
        in = std::move(next_in);
        in_v = std::move(next_in_v);
    }
    return std::make_shared<GmdhModel>(std::move(layers), std::size_t(X.cols()), opt.admix);
}

Eigen::VectorXd GmdhModel::predict(const Eigen::MatrixXd& X) const
{
    Eigen::MatrixXd in = X;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        in = layer_outputs(layers_[l], in, X, admix_);
    }
    const auto& best = layers_.back().units.front();
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        out(r) = best.eval(in(r, Eigen::Index(best.left)), in(r, Eigen::Index(best.right)));
    }
    return out;
}

std::size_t GmdhModel::n_params() const
{
    std::size_t total = 0;
    for (const auto& l : layers_)
        for (const auto& u : l.units) total += u.coef.size();
    return total;
}

json GmdhModel::parameters() const
{
    json layers = json::array();
    for (const auto& l : layers_) {
        json units = json::array();
        for (const auto& u : l.units) {
            units.push_back({{"left", u.left},
                             {"right", u.right},
                             {"function", to_string(u.function)},
                             {"coef", u.coef},
                             {"validation_rmse", u.validation_rmse}});
        }
        layers.push_back(units);
    }
    return {{"n_inputs", n_inputs_}, {"admix_features", admix_}, {"layers", layers}};
}

std::shared_ptr<const Regressor> GmdhModel::load(const json& p)
{
    std::vector<GmdhLayer> layers;
    for (const auto& jl : p.at("layers")) {
        GmdhLayer layer;
        for (const auto& ju : jl) {
            GmdhUnit u;
            u.left = ju.at("left").get<std::size_t>();
            u.right = ju.at("right").get<std::size_t>();
            u.function = parse_ref_function(ju.at("function").get<std::string>());
            u.coef = ju.at("coef").get<std::vector<double>>();
            u.validation_rmse = ju.at("validation_rmse").get<double>();
            if (u.coef.size() != term_count(u.function)) {
                throw Error(ErrorKind::parse, "gmdh: coefficient count does not match reference function");
            }
            layer.units.push_back(std::move(u));
        }
        layers.push_back(std::move(layer));
    }
    return std::make_shared<GmdhModel>(std::move(layers), p.at("n_inputs").get<std::size_t>(),
                                       p.at("admix_features").get<bool>());
}

FittedModel fit_gmdh(const ModelSpec& spec, const SupervisedDataset& train, const Validation& validation)
{
    const auto& h = spec.hyper;
    GmdhOptions opt;
    opt.max_layers = h.at("max_layers").get<std::size_t>();
    opt.functions.clear();
    for (const auto& f : h.at("ref_functions")) opt.functions.push_back(parse_ref_function(f.get<std::string>()));
    opt.alpha = h.at("alpha").get<double>();
    opt.admix = h.at("admix_features").get<bool>();
    opt.max_units = h.at("max_units").get<std::size_t>();

    std::shared_ptr<GmdhModel> impl;
    json info;
    if (validation.data != nullptr && validation.data->rows() > 0) {
        impl = GmdhModel::train(train.X, train.y, validation.data->X, validation.data->y, opt);
        info["ranking_rows"] = "validation";
    } else {
        const Eigen::Index n = train.X.rows();
        const Eigen::Index hold = std::max<Eigen::Index>(1, n / 4);
        if (n - hold < 1) {
            throw Error(ErrorKind::fit, "gmdh: too few rows to hold out a ranking set");
        }
        impl = GmdhModel::train(train.X.topRows(n - hold), train.y.head(n - hold), train.X.bottomRows(hold),
                                train.y.tail(hold), opt);
        info["ranking_rows"] = "last_quarter_of_train";
    }
    info["layers"] = impl->layers().size();
    return FittedModel(spec, train.feature_names, std::move(impl), {}, std::move(info));
}

Eigen::VectorXd fit_predict_gmdh(const SupervisedDataset& train, const SupervisedDataset& validation,
                                 std::size_t max_layers, const std::vector<RefFunction>& ref_functions, double alpha,
                                 bool admix_features, const Eigen::MatrixXd& query)
{
    json funcs = json::array();
    for (auto f : ref_functions) funcs.push_back(to_string(f));
    const ModelSpec spec{Family::gmdh,
                         {{"max_layers", max_layers},
                          {"ref_functions", funcs},
                          {"alpha", alpha},
                          {"admix_features", admix_features}},
                         0};
    Validation v{&validation, {}};
    return fit_model(spec, train, v).predict(query);
}

} // namespace atmcast
