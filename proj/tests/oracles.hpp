#pragma once

// Reference computations used as test oracles. Each is written from the
// definition, independently of the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline std::vector<double> gaussian_noise(std::size_t n, std::uint64_t seed, double sd = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sd);
    std::vector<double> x(n);
    for (auto& v : x) {
        v = g(rng);
    }
    return x;
}

inline std::vector<double> ar1(std::size_t n, double phi, double sd, std::uint64_t seed, std::size_t burn = 200)
{
    const auto e = gaussian_noise(n + burn, seed, sd);
    std::vector<double> x;
    x.reserve(n);
    double y = 0.0;
    for (std::size_t t = 0; t < n + burn; ++t) {
        y = phi * y + e[t];
        if (t >= burn) {
            x.push_back(y);
        }
    }
    return x;
}

inline std::vector<double> walk(std::size_t n, std::uint64_t seed)
{
    auto x = gaussian_noise(n, seed);
    std::partial_sum(x.begin(), x.end(), x.begin());
    return x;
}

/// rho(k) = sum_t (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2.
inline double acf_at(std::span<const double> x, std::size_t k)
{
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - mean) * (x[t] - mean);
        if (t + k < x.size()) num += (x[t] - mean) * (x[t + k] - mean);
    }
    return num / den;
}

/// Cao's E1 and E2 by exhaustive maximum-norm neighbour search over
/// explicitly materialized delay vectors.
struct CaoReference {
    std::vector<double> e1, e2;
};

inline CaoReference cao_brute_force(std::span<const double> x, std::size_t tau, std::size_t max_dim)
{
    const std::size_t n = x.size();
    std::vector<double> a_mean(max_dim + 1), star_mean(max_dim + 1);
    for (std::size_t d = 1; d <= max_dim + 1; ++d) {
        const std::size_t count = n - d * tau;
        std::vector<std::vector<double>> v(count, std::vector<double>(d));
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t k = 0; k < d; ++k) v[i][k] = x[i + k * tau];
        double sa = 0.0, ss = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < count; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = count;
            for (std::size_t j = 0; j < count; ++j) {
                if (j == i) continue;
                double dist = 0.0;
                for (std::size_t k = 0; k < d; ++k) dist = std::max(dist, std::abs(v[i][k] - v[j][k]));
                if (dist > 0.0 && dist < best) {
                    best = dist;
                    arg = j;
                }
            }
            if (arg == count) continue;
            const double extra = std::abs(x[i + d * tau] - x[arg + d * tau]);
            sa += std::max(best, extra) / best;
            ss += extra;
            ++used;
        }
        a_mean[d - 1] = sa / double(used);
        star_mean[d - 1] = ss / double(used);
    }
    CaoReference r;
    for (std::size_t d = 1; d <= max_dim; ++d) {
        r.e1.push_back(a_mean[d] / a_mean[d - 1]);
        r.e2.push_back(star_mean[d] / star_mean[d - 1]);
    }
    return r;
}

/// Largest Lyapunov exponent of the Henon map from the growth of a tangent
/// vector under the Jacobian product along a long orbit, renormalized every step.
inline double henon_jacobian_lyapunov(double a, double b, std::size_t steps)
{
    double x = 0.1, y = 0.1;
    for (int i = 0; i < 1000; ++i) {
        const double nx = 1.0 - a * x * x + y;
        y = b * x;
        x = nx;
    }
    double u = 1.0, w = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        // J = [[-2 a x, 1], [b, 0]]
        const double nu = -2.0 * a * x * u + w;
        const double nw = b * u;
        const double norm = std::hypot(nu, nw);
        sum += std::log(norm);
        u = nu / norm;
        w = nw / norm;
        const double nx = 1.0 - a * x * x + y;
        y = b * x;
        x = nx;
    }
    return sum / double(steps);
}

/// Student-t density integrated with composite Simpson's rule on [0, |t|];
/// the two-sided p-value is 1 - 2 * integral.
inline double student_t_two_sided_p(double t, double df)
{
    const double logc = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
    auto pdf = [&](double u) { return std::exp(logc - (df + 1) / 2 * std::log1p(u * u / df)); };
    const double hi = std::abs(t);
    const int n = 20000;
    const double h = hi / n;
    double s = pdf(0) + pdf(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
    return 1.0 - 2.0 * s * h / 3.0;
}

/// Central differences of `f` at `theta`.
inline std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::vector<double> theta, double h = 1e-5)
{
    std::vector<double> g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        const double up = f(theta);
        theta[i] = keep - h;
        const double down = f(theta);
        theta[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor). The floor keeps entries that
/// are zero to within finite-difference noise from dominating.
inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                                 double floor = 1e-6)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({floor, std::abs(analytic[i]), std::abs(numeric[i])});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

} // namespace oracle
