#pragma once

#include <memory>
#include <string>
#include <vector>

#include "atmcast/models/model.hpp"

namespace atmcast {

/// Two-input polynomial transfer functions.
enum class RefFunction { linear, linear_cov, quadratic, cubic };

const char* to_string(RefFunction f);
RefFunction parse_ref_function(const std::string& text);
std::size_t term_count(RefFunction f);
/// Writes the polynomial terms of (a, b), starting with the constant 1.
void polynomial_terms(RefFunction f, double a, double b, double* out);

struct GmdhUnit {
    std::size_t left = 0;
    std::size_t right = 0;
    RefFunction function = RefFunction::linear;
    std::vector<double> coef;
    double validation_rmse = 0.0;

    double eval(double a, double b) const;
};

/// Survivors of one layer, best first. Layer inputs are the previous layer's
/// survivor outputs, followed by the original features when admixing (the
/// first layer sees only the original features).
struct GmdhLayer {
    std::vector<GmdhUnit> units;
};

struct GmdhOptions {
    std::size_t max_layers = 50;
    std::vector<RefFunction> functions = {RefFunction::linear, RefFunction::linear_cov, RefFunction::quadratic,
                                          RefFunction::cubic};
    double alpha = 0.5;
    bool admix = true;
    std::size_t max_units = 16;
    /// A layer is kept only if it lowers the best validation RMSE by this fraction.
    double min_improvement = 0.01;
};

class GmdhModel : public Regressor {
public:
    GmdhModel(std::vector<GmdhLayer> layers, std::size_t n_inputs, bool admix);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
    std::size_t n_params() const override;
    json parameters() const override;

    static std::shared_ptr<const Regressor> load(const json& params);
    static std::shared_ptr<GmdhModel> train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Eigen::MatrixXd& Xv, const Eigen::VectorXd& yv,
                                            const GmdhOptions& opt);

    const std::vector<GmdhLayer>& layers() const { return layers_; }

private:
    std::vector<GmdhLayer> layers_;
    std::size_t n_inputs_;
    bool admix_;
};

/// Uses `validation` for unit ranking when given; otherwise holds out the last
/// quarter of the training rows.
FittedModel fit_gmdh(const ModelSpec& spec, const SupervisedDataset& train, const Validation& validation);

Eigen::VectorXd fit_predict_gmdh(const SupervisedDataset& train, const SupervisedDataset& validation,
                                 std::size_t max_layers, const std::vector<RefFunction>& ref_functions, double alpha,
                                 bool admix_features, const Eigen::MatrixXd& query);

} // namespace atmcast
