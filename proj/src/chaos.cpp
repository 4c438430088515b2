#include "atmcast/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atmcast/error.hpp"

namespace atmcast {

namespace {

bool is_constant(std::span<const double> x)
{
    return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

} // namespace

std::vector<double> acf(std::span<const double> x, std::size_t max_lag)
{
    const std::size_t n = x.size();
    if (max_lag < 1 || n <= max_lag) {
        throw Error(ErrorKind::length, "ACF needs length > max_lag >= 1");
    }
    if (is_constant(x)) {
        throw Error(ErrorKind::zero_variance, "ACF of a constant series");
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    std::vector<double> c(n);
    for (std::size_t t = 0; t < n; ++t) {
        c[t] = x[t] - mean;
    }
    double denom = 0.0;
    for (double v : c) {
        denom += v * v;
    }
    std::vector<double> rho(max_lag + 1);
    rho[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            num += c[t] * c[t + k];
        }
        rho[k] = num / denom;
    }
    return rho;
}

std::vector<double> pacf(std::span<const double> x, std::size_t max_lag)
{
    const auto r = acf(x, max_lag);
    std::vector<double> out(max_lag + 1);
    out[0] = 1.0;
    std::vector<double> phi(max_lag + 1, 0.0);
    std::vector<double> prev(max_lag + 1, 0.0);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = r[k];
        double den = 1.0;
        for (std::size_t j = 1; j < k; ++j) {
            num -= prev[j] * r[k - j];
            den -= prev[j] * r[j];
        }
        const double phikk = num / den;
        if (!std::isfinite(phikk) || std::abs(phikk) >= 1.0) {
            throw Error(ErrorKind::instability, "Durbin-Levinson recursion degenerate at lag " + std::to_string(k));
        }
        phi[k] = phikk;
        for (std::size_t j = 1; j < k; ++j) {
            phi[j] = prev[j] - phikk * prev[k - j];
        }
        out[k] = phikk;
        prev = phi;
    }
    return out;
}

const char* to_string(LagMethod m)
{
    switch (m) {
    case LagMethod::pacf_cutoff: return "pacf_cutoff";
    case LagMethod::acf_1_over_e: return "acf_1_over_e";
    case LagMethod::acf_first_zero: return "acf_first_zero";
    }
    return "?";
}

LagMethod parse_lag_method(const std::string& text)
{
    if (text == "pacf_cutoff") return LagMethod::pacf_cutoff;
    if (text == "acf_1_over_e") return LagMethod::acf_1_over_e;
    if (text == "acf_first_zero") return LagMethod::acf_first_zero;
    throw Error(ErrorKind::config, "unknown lag method '" + text + "'");
}

std::size_t acf_first_zero(std::span<const double> x, std::optional<std::size_t> max_lag)
{
    const std::size_t limit = max_lag.value_or(std::max<std::size_t>(1, x.size() / 2));
    const auto rho = acf(x, limit);
    for (std::size_t k = 1; k <= limit; ++k) {
        if (rho[k] <= 0.0) {
            return k;
        }
    }
    return limit;
}

std::size_t select_lag(std::span<const double> x, LagMethod method, std::optional<std::size_t> max_lag)
{
    const std::size_t n = x.size();
    if (n < 50) {
        throw Error(ErrorKind::length, "lag selection needs at least 50 observations");
    }
    switch (method) {
    case LagMethod::pacf_cutoff: {
        const std::size_t limit = max_lag.value_or(std::min<std::size_t>(n / 4, 50));
        const auto p = pacf(x, limit);
        const double band = 1.96 / std::sqrt(double(n));
        std::size_t k = 0;
        while (k + 1 <= limit && std::abs(p[k + 1]) >= band) {
            ++k;
        }
        return std::max<std::size_t>(k, 1);
    }
    case LagMethod::acf_1_over_e: {
        const std::size_t limit = max_lag.value_or(n / 2);
        const auto rho = acf(x, limit);
        const double threshold = std::exp(-1.0);
        for (std::size_t k = 1; k <= limit; ++k) {
            if (rho[k] < threshold) {
                return k;
            }
        }
        return limit;
    }
    case LagMethod::acf_first_zero:
        return acf_first_zero(x, max_lag);
    }
    return 1;
}

CaoCurve cao_min_embedding(std::span<const double> x, std::size_t tau, const CaoOptions& opt)
{
    const std::size_t n = x.size();
    if (tau < 1 || opt.max_dim < 1) {
        throw Error(ErrorKind::length, "Cao's method needs tau >= 1 and max_dim >= 1");
    }
    if (n < (opt.max_dim + 1) * tau + 10) {
        throw Error(ErrorKind::length, "series too short for Cao's method up to dimension " +
                                           std::to_string(opt.max_dim));
    }
    if (is_constant(x)) {
        throw Error(ErrorKind::zero_variance, "Cao's method on a constant series");
    }

    // E(d) and E*(d) for d = 1..max_dim+1.
    std::vector<double> e(opt.max_dim + 1);
    std::vector<double> estar(opt.max_dim + 1);
    for (std::size_t d = 1; d <= opt.max_dim + 1; ++d) {
        const kernels::DelayPoints pts{x, tau, d, n - d * tau};
        const auto nn = kernels::nearest_neighbors(pts, {kernels::Metric::chebyshev, 0, true}, opt.exec);
        double sum_a = 0.0;
        double sum_star = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < pts.count; ++i) {
            const auto& nb = nn[i];
            if (nb.index == kernels::npos) {
                continue;
            }
            const double extra = std::abs(x[i + d * tau] - x[nb.index + d * tau]);
            sum_a += std::max(nb.distance, extra) / nb.distance;
            sum_star += extra;
            ++count;
        }
        if (count == 0) {
            throw Error(ErrorKind::zero_variance, "no distinct delay vectors at dimension " + std::to_string(d));
        }
        e[d - 1] = sum_a / double(count);
        estar[d - 1] = sum_star / double(count);
    }

    CaoCurve curve;
    curve.e1.resize(opt.max_dim);
    curve.e2.resize(opt.max_dim);
    for (std::size_t d = 1; d <= opt.max_dim; ++d) {
        curve.e1[d - 1] = e[d] / e[d - 1];
        curve.e2[d - 1] = estar[d - 1] > 0.0 ? estar[d] / estar[d - 1] : 1.0;
    }

    curve.stochastic = std::all_of(curve.e2.begin(), curve.e2.end(),
                                   [&](double v) { return std::abs(v - 1.0) <= opt.stochastic_band; });
    std::optional<std::size_t> found;
    for (std::size_t d = 1; d <= opt.max_dim && !found; ++d) {
        if (curve.e1[d - 1] < opt.plateau) {
            continue;
        }
        bool flat = true;
        for (std::size_t j = d; j < opt.max_dim; ++j) {
            if (std::abs(curve.e1[j] - curve.e1[j - 1]) > opt.band) {
                flat = false;
                break;
            }
        }
        if (flat) {
            found = d;
        }
    }
    curve.saturated = found.has_value() && !curve.stochastic;
    curve.m_min = curve.saturated ? *found : opt.max_dim;
    return curve;
}

LyapunovResult lyapunov_rosenstein(std::span<const double> x, const LyapunovOptions& opt)
{
    if (opt.tau < 1 || opt.m < 1) {
        throw Error(ErrorKind::length, "Rosenstein's method needs tau >= 1 and m >= 1");
    }
    const std::size_t span = (opt.m - 1) * opt.tau;
    if (x.size() <= span || x.size() - span < 100) {
        throw Error(ErrorKind::length, "Rosenstein's method needs at least 100 reconstructed points");
    }
    if (opt.fit_range.first >= opt.fit_range.second || opt.fit_range.second > opt.max_steps) {
        throw Error(ErrorKind::length, "invalid divergence fit range");
    }
    const std::size_t points = x.size() - span;
    if (points <= opt.max_steps + 1) {
        throw Error(ErrorKind::length, "too few points to track divergence over max_steps");
    }
    const std::size_t usable = points - opt.max_steps;

    LyapunovResult result;
    result.theiler = opt.theiler ? *opt.theiler : acf_first_zero(x);

    const kernels::DelayPoints pts{x, opt.tau, opt.m, usable};
    const auto nn = kernels::nearest_neighbors(pts, {kernels::Metric::euclidean, result.theiler, false}, opt.exec);

    const std::size_t steps = opt.max_steps + 1;
    std::vector<double> sum(steps, 0.0);
    std::vector<std::size_t> count(steps, 0);
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < usable; ++i) {
        const std::size_t j = nn[i].index;
        if (j == kernels::npos) {
            continue;
        }
        ++pairs;
        for (std::size_t k = 0; k < steps; ++k) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < opt.m; ++c) {
                const double diff = x[i + k + c * opt.tau] - x[j + k + c * opt.tau];
                d2 += diff * diff;
            }
            if (d2 > 0.0) {
                sum[k] += 0.5 * std::log(d2);
                ++count[k];
            }
        }
    }
    if (pairs == 0) {
        throw Error(ErrorKind::neighbor_search, "no admissible neighbour outside the Theiler window");
    }

    auto& curve = result.curve;
    curve.pairs = pairs;
    curve.fit_range = opt.fit_range;
    curve.steps.resize(steps);
    curve.mean_log_divergence.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        curve.steps[k] = k;
        curve.mean_log_divergence[k] =
            count[k] > 0 ? sum[k] / double(count[k]) : std::numeric_limits<double>::quiet_NaN();
    }

    const auto [lo, hi] = opt.fit_range;
    const double npts = double(hi - lo + 1);
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
        if (count[k] == 0) {
            throw Error(ErrorKind::degenerate, "all divergences are zero at step " + std::to_string(k));
        }
        sx += double(k);
        sy += curve.mean_log_divergence[k];
    }
    const double mx = sx / npts;
    const double my = sy / npts;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
        const double dx = double(k) - mx;
        const double dy = curve.mean_log_divergence[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    curve.slope = sxy / sxx;
    curve.intercept = my - curve.slope * mx;
    curve.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;

    result.lambda = curve.slope;
    result.is_chaotic = result.lambda > 0.0;
    return result;
}

Embedding reconstruct_phase_space(std::span<const double> x, std::size_t tau, std::size_t m)
{
    if (tau < 1 || m < 1) {
        throw Error(ErrorKind::length, "embedding needs tau >= 1 and m >= 1");
    }
    const std::size_t span = (m - 1) * tau;
    if (x.size() <= span + 1) {
        throw Error(ErrorKind::length, "series of length " + std::to_string(x.size()) +
                                           " too short for tau=" + std::to_string(tau) + ", m=" + std::to_string(m));
    }
    const std::size_t rows = x.size() - span - 1;
    Embedding e{Eigen::MatrixXd(rows, m), Eigen::VectorXd(rows)};
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            e.X(i, k) = x[i + k * tau];
        }
        e.y(i) = x[i + span + 1];
    }
    return e;
}

} // namespace atmcast
