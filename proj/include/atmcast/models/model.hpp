#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "atmcast/features.hpp"
#include "atmcast/rng.hpp"

namespace atmcast {

using json = nlohmann::json;

enum class Family { arima, mlp, rf, grnn, gmdh, lstm, cnn1d };

const char* to_string(Family f);
Family parse_family(const std::string& text);
const std::vector<Family>& all_families();

struct ModelSpec {
    Family family = Family::grnn;
    json hyper = json::object();
    std::uint64_t seed = 0;

    json to_json() const;
    static ModelSpec from_json(const json& j);
};

/// Fills defaults and checks every key and range against the family schema.
/// Unknown keys and out-of-range values raise a config error.
ModelSpec validated(const ModelSpec& spec);

/// Row-wise regressor over a fixed feature layout.
class Regressor {
public:
    virtual ~Regressor() = default;
    virtual Eigen::VectorXd predict(const Eigen::MatrixXd& X) const = 0;
    virtual std::size_t n_params() const = 0;
    /// Learned state as flat arrays, enough to rebuild the model.
    virtual json parameters() const = 0;
};

class FittedModel {
public:
    FittedModel(ModelSpec spec, std::vector<std::string> feature_names, std::shared_ptr<const Regressor> impl,
                std::vector<double> loss_curve = {}, json info = json::object());

    const ModelSpec& spec() const { return spec_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<double>& training_loss_curve() const { return loss_curve_; }
    const json& info() const { return info_; }
    const Regressor& regressor() const { return *impl_; }
    std::size_t n_params() const { return impl_->n_params(); }

    /// Rejects a column count different from the fitted layout.
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    /// Also rejects any difference in column names or order.
    Eigen::VectorXd predict(const SupervisedDataset& ds) const;

    json to_json() const;
    static FittedModel from_json(const json& j);

private:
    ModelSpec spec_;
    std::vector<std::string> feature_names_;
    std::shared_ptr<const Regressor> impl_;
    std::vector<double> loss_curve_;
    json info_;
};

inline constexpr int kModelFormatVersion = 1;

/// Maps scaled targets back to currency units for validation scoring.
using Restore = std::function<Eigen::VectorXd(const Eigen::VectorXd& scaled, std::span<const Date> dates)>;

struct Validation {
    const SupervisedDataset* data = nullptr;
    Restore restore;

    /// SMAPE of `predicted` against the validation targets, after restore.
    double smape_of(const Eigen::VectorXd& predicted) const;
};

/// Trains any row-based family (everything except arima).
FittedModel fit_model(const ModelSpec& spec, const SupervisedDataset& train, const Validation& validation = {});

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) draws into `out`.
void uniform_fan_in(std::span<double> out, std::size_t fan_in, Rng& rng);

std::vector<double> to_vector(const Eigen::MatrixXd& m);
std::vector<double> to_vector(const Eigen::VectorXd& v);

} // namespace atmcast
