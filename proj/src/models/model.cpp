#include "atmcast/models/model.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "atmcast/error.hpp"
#include "atmcast/evaluation.hpp"
#include "atmcast/models/cnn1d.hpp"
#include "atmcast/models/forest.hpp"
#include "atmcast/models/gmdh.hpp"
#include "atmcast/models/grnn.hpp"
#include "atmcast/models/lstm.hpp"
#include "atmcast/models/mlp.hpp"

namespace atmcast {

namespace {

enum class Kind { integer, real, boolean, ref_list };

struct Field {
    Kind kind;
    double lo, hi;
    /// Open lower bound (strictly greater than lo).
    bool lo_open;
    json fallback;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<std::string, Field>& schema(Family f)
{
    static const std::map<Family, std::map<std::string, Field>> all = {
        {Family::arima,
         {{"p", {Kind::integer, 0, 60, false, 7}},
          {"d", {Kind::integer, 0, 2, false, 0}},
          {"q", {Kind::integer, 0, 60, false, 0}}}},
        {Family::mlp,
         {{"nodes1", {Kind::integer, 1, 64, false, 5}},
          {"nodes2", {Kind::integer, 1, 8, false, 2}},
          {"lr", {Kind::real, 0, kInf, true, 0.1}},
          {"momentum", {Kind::real, 0, 0.999999, false, 0.9}},
          {"epochs", {Kind::integer, 0, 1e6, false, 500}},
          {"patience", {Kind::integer, 0, 1e6, false, 50}}}},
        {Family::rf,
         {{"n_estimators", {Kind::integer, 1, 10000, false, 20}},
          {"max_depth", {Kind::integer, 0, 1000, false, 8}},
          {"max_features", {Kind::integer, 0, 10000, false, 0}},
          {"bootstrap", {Kind::boolean, 0, 0, false, true}}}},
        {Family::grnn, {{"sigma", {Kind::real, 0, kInf, true, 0.3}}}},
        {Family::gmdh,
         {{"max_layers", {Kind::integer, 1, 50, false, 50}},
          {"ref_functions", {Kind::ref_list, 0, 0, false, json{"linear", "linear_cov", "quadratic", "cubic"}}},
          {"alpha", {Kind::real, 0, 1, true, 0.5}},
          {"admix_features", {Kind::boolean, 0, 0, false, true}},
          {"max_units", {Kind::integer, 2, 10000, false, 16}}}},
        {Family::lstm,
         {{"hidden", {Kind::integer, 2, 10, false, 4}},
          {"epochs", {Kind::integer, 0, 1e6, false, 300}},
          {"lr", {Kind::real, 0, kInf, true, 0.01}}}},
        {Family::cnn1d,
         {{"n_filters", {Kind::integer, 1, 70, false, 5}},
          {"dense_nodes", {Kind::integer, 2, 8, false, 2}},
          {"epochs", {Kind::integer, 0, 1e6, false, 300}},
          {"lr", {Kind::real, 0, kInf, true, 0.001}}}},
    };
    return all.at(f);
}

json check_field(Family family, const std::string& key, const Field& field, const json& value)
{
    auto fail = [&](const std::string& why) -> json {
        throw Error(ErrorKind::config,
                    std::string(to_string(family)) + " hyperparameter '" + key + "' " + why);
    };
    auto in_range = [&](double v) {
        const bool lo_ok = field.lo_open ? v > field.lo : v >= field.lo;
        if (!lo_ok || v > field.hi) {
            fail("out of range: " + value.dump());
        }
    };
    switch (field.kind) {
    case Kind::integer: {
        if (!value.is_number_integer()) {
            if (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>() &&
                value.get<double>() >= 0) {
                const auto v = value.get<double>();
                in_range(v);
                return json(static_cast<std::uint64_t>(v));
            }
            return fail("must be a non-negative integer");
        }
        if (value.is_number_unsigned()) {
            const auto v = value.get<std::uint64_t>();
            in_range(double(v));
            return v;
        }
        const auto v = value.get<std::int64_t>();
        if (v < 0) return fail("must be a non-negative integer");
        in_range(double(v));
        return json(static_cast<std::uint64_t>(v));
    }
    case Kind::real: {
        if (!value.is_number()) return fail("must be a number");
        const double v = value.get<double>();
        if (!std::isfinite(v)) return fail("must be finite");
        in_range(v);
        return v;
    }
    case Kind::boolean:
        if (!value.is_boolean()) return fail("must be true or false");
        return value;
    case Kind::ref_list: {
        if (!value.is_array() || value.empty()) return fail("must be a non-empty list");
        std::set<std::string> seen;
        json out = json::array();
        for (const auto& item : value) {
            if (!item.is_string()) return fail("entries must be strings");
            const auto name = item.get<std::string>();
            parse_ref_function(name);
            if (seen.insert(name).second) out.push_back(name);
        }
        return out;
    }
    }
    return value;
}

} // namespace

const char* to_string(Family f)
{
    switch (f) {
    case Family::arima: return "arima";
    case Family::mlp: return "mlp";
    case Family::rf: return "rf";
    case Family::grnn: return "grnn";
    case Family::gmdh: return "gmdh";
    case Family::lstm: return "lstm";
    case Family::cnn1d: return "cnn1d";
    }
    return "unknown";
}

Family parse_family(const std::string& text)
{
    for (Family f : all_families()) {
        if (text == to_string(f)) return f;
    }
    throw Error(ErrorKind::config, "unknown model family '" + text + "'");
}

const std::vector<Family>& all_families()
{
    static const std::vector<Family> v = {Family::arima, Family::mlp,  Family::rf,   Family::grnn,
                                          Family::gmdh,  Family::lstm, Family::cnn1d};
    return v;
}

json ModelSpec::to_json() const
{
    return {{"family", atmcast::to_string(family)}, {"hyperparameters", hyper}, {"seed", seed}};
}

ModelSpec ModelSpec::from_json(const json& j)
{
    if (!j.is_object()) throw Error(ErrorKind::config, "model spec must be an object");
    for (const auto& [k, v] : j.items()) {
        if (k != "family" && k != "hyperparameters" && k != "seed") {
            throw Error(ErrorKind::config, "unknown model spec key '" + k + "'");
        }
    }
    ModelSpec s;
    s.family = parse_family(j.at("family").get<std::string>());
    s.hyper = j.value("hyperparameters", json::object());
    s.seed = j.value("seed", std::uint64_t{0});
    return validated(s);
}

ModelSpec validated(const ModelSpec& spec)
{
    if (!spec.hyper.is_object()) {
        throw Error(ErrorKind::config, "hyperparameters must be an object");
    }
    const auto& fields = schema(spec.family);
    for (const auto& [k, v] : spec.hyper.items()) {
        if (!fields.count(k)) {
            throw Error(ErrorKind::config,
                        "unknown " + std::string(to_string(spec.family)) + " hyperparameter '" + k + "'");
        }
    }
    ModelSpec out = spec;
    out.hyper = json::object();
    for (const auto& [k, field] : fields) {
        const json& v = spec.hyper.contains(k) ? spec.hyper.at(k) : field.fallback;
        out.hyper[k] = check_field(spec.family, k, field, v);
    }
    return out;
}

FittedModel::FittedModel(ModelSpec spec, std::vector<std::string> feature_names,
                         std::shared_ptr<const Regressor> impl, std::vector<double> loss_curve, json info)
    : spec_(std::move(spec)), feature_names_(std::move(feature_names)), impl_(std::move(impl)),
      loss_curve_(std::move(loss_curve)), info_(std::move(info))
{
}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& X) const
{
    if (static_cast<std::size_t>(X.cols()) != feature_names_.size()) {
        throw Error(ErrorKind::shape, "model expects " + std::to_string(feature_names_.size()) + " columns, got " +
                                          std::to_string(X.cols()));
    }
    return impl_->predict(X);
}

Eigen::VectorXd FittedModel::predict(const SupervisedDataset& ds) const
{
    if (ds.feature_names != feature_names_) {
        throw Error(ErrorKind::shape, "feature names differ from the fitted layout");
    }
    return predict(ds.X);
}

json FittedModel::to_json() const
{
    return {{"format_version", kModelFormatVersion},
            {"spec", spec_.to_json()},
            {"feature_names", feature_names_},
            {"parameters", impl_->parameters()},
            {"training_loss_curve", loss_curve_},
            {"info", info_}};
}

FittedModel FittedModel::from_json(const json& j)
{
    if (j.value("format_version", 0) != kModelFormatVersion) {
        throw Error(ErrorKind::parse, "unsupported model format version");
    }
    const ModelSpec spec = ModelSpec::from_json(j.at("spec"));
    const json& p = j.at("parameters");
    std::shared_ptr<const Regressor> impl;
    switch (spec.family) {
    case Family::mlp: impl = MlpModel::load(p); break;
    case Family::rf: impl = ForestModel::load(p); break;
    case Family::grnn: impl = GrnnModel::load(p); break;
    case Family::gmdh: impl = GmdhModel::load(p); break;
    case Family::lstm: impl = LstmModel::load(p); break;
    case Family::cnn1d: impl = Cnn1dModel::load(p); break;
    case Family::arima: throw Error(ErrorKind::unsupported, "arima models are stored as ArimaParams documents");
    }
    return FittedModel(spec, j.at("feature_names").get<std::vector<std::string>>(), std::move(impl),
                       j.value("training_loss_curve", std::vector<double>{}), j.value("info", json::object()));
}

double Validation::smape_of(const Eigen::VectorXd& predicted) const
{
    if (data == nullptr || data->rows() == 0) {
        throw Error(ErrorKind::length, "validation set is empty");
    }
    Eigen::VectorXd p = predicted, a = data->y;
    if (restore) {
        p = restore(predicted, data->target_dates);
        a = restore(data->y, data->target_dates);
    }
    if (!p.allFinite()) {
        return std::numeric_limits<double>::infinity();
    }
    return smape(std::span<const double>(a.data(), std::size_t(a.size())),
                 std::span<const double>(p.data(), std::size_t(p.size())));
}

FittedModel fit_model(const ModelSpec& raw, const SupervisedDataset& train, const Validation& validation)
{
    const ModelSpec spec = validated(raw);
    if (train.rows() == 0) {
        throw Error(ErrorKind::fit, std::string(to_string(spec.family)) + ": empty training set");
    }
    switch (spec.family) {
    case Family::mlp: return fit_mlp(spec, train, validation);
    case Family::rf: return fit_forest(spec, train);
    case Family::grnn: return fit_grnn(spec, train);
    case Family::gmdh: return fit_gmdh(spec, train, validation);
    case Family::lstm: return fit_lstm(spec, train);
    case Family::cnn1d: return fit_cnn1d(spec, train);
    case Family::arima: break;
    }
    throw Error(ErrorKind::unsupported, "arima is fitted on the raw series, not a supervised dataset");
}

void uniform_fan_in(std::span<double> out, std::size_t fan_in, Rng& rng)
{
    const double bound = 1.0 / std::sqrt(double(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : out) v = dist(rng);
}

std::vector<double> to_vector(const Eigen::MatrixXd& m)
{
    std::vector<double> out;
    out.reserve(std::size_t(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

} // namespace atmcast
