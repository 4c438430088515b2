#include "atmcast/models/arima.hpp"

#include <algorithm>
#include <cmath>

#include "atmcast/error.hpp"
#include "atmcast/linalg.hpp"

namespace atmcast {

namespace {

std::vector<double> difference(std::span<const double> x)
{
    std::vector<double> out;
    for (std::size_t i = 1; i < x.size(); ++i) out.push_back(x[i] - x[i - 1]);
    return out;
}

/// levels[k] is the k-times differenced series.
std::vector<std::vector<double>> difference_levels(std::span<const double> x, std::size_t d)
{
    std::vector<std::vector<double>> levels{std::vector<double>(x.begin(), x.end())};
    for (std::size_t k = 0; k < d; ++k) levels.push_back(difference(levels.back()));
    return levels;
}

bool is_constant(const std::vector<double>& z, double& mean)
{
    mean = 0.0;
    for (double v : z) mean += v;
    mean /= double(z.size());
    double spread = 0.0;
    for (double v : z) spread = std::max(spread, std::abs(v - mean));
    return spread <= 1e-12 * std::max(1.0, std::abs(mean));
}

} // namespace

ArimaModel ArimaModel::fit(std::span<const double> series, std::size_t p, std::size_t d, std::size_t q)
{
    if (q > 0) {
        throw Error(ErrorKind::unsupported, "arima: moving-average order q > 0 is not supported");
    }
    if (d > 2) {
        throw Error(ErrorKind::config, "arima: differencing order must be 0, 1 or 2");
    }
    if (series.size() <= p + d + 10) {
        throw Error(ErrorKind::length, "arima: series of length " + std::to_string(series.size()) +
                                           " is too short for p=" + std::to_string(p) + ", d=" + std::to_string(d));
    }
    ArimaModel m;
    auto& P = m.params_;
    P.p = p;
    P.d = d;
    P.q = q;
    const auto z = difference_levels(series, d).back();

    double mean = 0.0;
    if (d >= 1 && is_constant(z, mean)) {
        P.phi.assign(p, 0.0);
        P.c = mean;
        for (std::size_t t = p; t < z.size(); ++t) P.residuals.push_back(z[t] - mean);
        return m;
    }

    const auto rows = Eigen::Index(z.size() - p);
    Eigen::MatrixXd X(rows, Eigen::Index(p + 1));
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = std::size_t(r) + p;
        X(r, 0) = 1.0;
        for (std::size_t k = 1; k <= p; ++k) X(r, Eigen::Index(k)) = z[t - k];
        y(r) = z[t];
    }
    const auto fit = ols(X, y);
    if (!fit) {
        throw Error(ErrorKind::rank, "arima: lagged regressors are rank deficient");
    }
    P.c = fit->beta(0);
    for (std::size_t k = 1; k <= p; ++k) P.phi.push_back(fit->beta(Eigen::Index(k)));
    P.residuals = to_vector(Eigen::VectorXd(fit->residuals));
    return m;
}

std::vector<double> ArimaModel::path(std::span<const double> history, std::size_t horizon,
                                     std::span<const double> actual) const
{
    const auto& P = params_;
    if (history.size() <= P.p + P.d) {
        throw Error(ErrorKind::length, "arima: history too short to forecast");
    }
    auto levels = difference_levels(history, P.d);
    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const auto& z = levels.back();
        double next = P.c;
        for (std::size_t k = 1; k <= P.p; ++k) next += P.phi[k - 1] * z[z.size() - k];
        std::vector<double> step(P.d + 1);
        step[P.d] = next;
        for (std::size_t k = P.d; k-- > 0;) step[k] = levels[k].back() + step[k + 1];
        out.push_back(step[0]);
        if (!actual.empty()) {
            // Condition the next step on the observed level instead of the forecast.
            step[0] = actual[h];
            for (std::size_t k = 1; k <= P.d; ++k) step[k] = step[k - 1] - levels[k - 1].back();
        }
        for (std::size_t k = 0; k <= P.d; ++k) levels[k].push_back(step[k]);
    }
    return out;
}

std::vector<double> ArimaModel::forecast(std::span<const double> history, std::size_t horizon) const
{
    return path(history, horizon, {});
}

std::vector<double> ArimaModel::forecast_one_step(std::span<const double> history,
                                                  std::span<const double> actual) const
{
    return path(history, actual.size(), actual);
}

json ArimaModel::to_json(const ModelSpec& spec) const
{
    const auto& P = params_;
    return {{"format_version", kModelFormatVersion},
            {"spec", spec.to_json()},
            {"parameters",
             {{"p", P.p}, {"d", P.d}, {"q", P.q}, {"phi", P.phi}, {"theta", P.theta}, {"c", P.c},
              {"residuals", P.residuals}}}};
}

ArimaModel ArimaModel::from_json(const json& j)
{
    if (j.value("format_version", 0) != kModelFormatVersion) {
        throw Error(ErrorKind::parse, "unsupported model format version");
    }
    const auto& p = j.at("parameters");
    ArimaModel m;
    auto& P = m.params_;
    P.p = p.at("p").get<std::size_t>();
    P.d = p.at("d").get<std::size_t>();
    P.q = p.at("q").get<std::size_t>();
    P.phi = p.at("phi").get<std::vector<double>>();
    P.theta = p.at("theta").get<std::vector<double>>();
    P.c = p.at("c").get<double>();
    P.residuals = p.at("residuals").get<std::vector<double>>();
    if (P.phi.size() != P.p || P.q != 0 || P.d > 2) {
        throw Error(ErrorKind::parse, "arima: inconsistent parameter document");
    }
    return m;
}

std::vector<double> fit_predict_arima(std::span<const double> train, std::size_t p, std::size_t d, std::size_t q,
                                      std::size_t horizon)
{
    return ArimaModel::fit(train, p, d, q).forecast(train, horizon);
}

} // namespace atmcast
