#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "atmcast/kernels.hpp"

namespace atmcast {

/// Biased (divide-by-N) autocorrelation; element k is rho(k), element 0 is 1.
std::vector<double> acf(std::span<const double> x, std::size_t max_lag);

/// Partial autocorrelation via Durbin-Levinson; element k is phi_kk, element 0 is 1.
std::vector<double> pacf(std::span<const double> x, std::size_t max_lag);

enum class LagMethod { pacf_cutoff, acf_1_over_e, acf_first_zero };

const char* to_string(LagMethod m);
LagMethod parse_lag_method(const std::string& text);

/// Delay selection. `max_lag` bounds the scan (default min(N/4, 50)).
std::size_t select_lag(std::span<const double> x, LagMethod method,
                       std::optional<std::size_t> max_lag = std::nullopt);

/// First k >= 1 with rho(k) <= 0, or the scan limit when none is found.
std::size_t acf_first_zero(std::span<const double> x, std::optional<std::size_t> max_lag = std::nullopt);

struct CaoOptions {
    std::size_t max_dim = 12;
    double plateau = 0.95;
    double band = 0.05;
    /// If every |E2(d) - 1| is within this band the series is treated as
    /// stochastic and reported unsaturated.
    double stochastic_band = 0.1;
    kernels::Execution exec = kernels::Execution::parallel;
};

struct CaoCurve {
    /// e1[d-1] = E1(d), d = 1..max_dim; likewise e2.
    std::vector<double> e1;
    std::vector<double> e2;
    std::size_t m_min = 0;
    bool saturated = false;
    bool stochastic = false;
};

CaoCurve cao_min_embedding(std::span<const double> x, std::size_t tau, const CaoOptions& opt = {});

struct LyapunovOptions {
    std::size_t tau = 1;
    std::size_t m = 2;
    /// Default: first zero crossing of the ACF.
    std::optional<std::size_t> theiler;
    std::size_t max_steps = 30;
    std::pair<std::size_t, std::size_t> fit_range{1, 15};
    kernels::Execution exec = kernels::Execution::parallel;
};

struct DivergenceCurve {
    /// Steps 0..max_steps.
    std::vector<std::size_t> steps;
    std::vector<double> mean_log_divergence;
    std::pair<std::size_t, std::size_t> fit_range;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t pairs = 0;
};

struct LyapunovResult {
    DivergenceCurve curve;
    double lambda = 0.0;
    std::size_t theiler = 0;
    bool is_chaotic = false;
};

/// Largest Lyapunov exponent by nearest-neighbour divergence tracking, in nats
/// per sample step.
LyapunovResult lyapunov_rosenstein(std::span<const double> x, const LyapunovOptions& opt = {});

struct ChaosProfile {
    std::size_t tau = 1;
    std::size_t m = 1;
    double lambda = 0.0;
    bool is_chaotic = false;
};

struct Embedding {
    /// Row i: (x_i, x_{i+tau}, ..., x_{i+(m-1)tau}).
    Eigen::MatrixXd X;
    /// y_i = x_{i+(m-1)tau+1}.
    Eigen::VectorXd y;
};

Embedding reconstruct_phase_space(std::span<const double> x, std::size_t tau, std::size_t m);

} // namespace atmcast
