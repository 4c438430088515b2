#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

// Data-parallel inner loops. Each kernel has a plain serial reference in
// `serial::` and an OpenMP version in `parallel::`; both must agree bitwise,
// whatever the worker count.
namespace atmcast::kernels {

/// Delay-coordinate points over a scalar series without materializing them:
/// point i has coordinates x[i + k*tau], k = 0..dim-1, for i < count.
struct DelayPoints {
    std::span<const double> x;
    std::size_t tau = 1;
    std::size_t dim = 1;
    std::size_t count = 0;

    double coord(std::size_t i, std::size_t k) const { return x[i + k * tau]; }
};

enum class Metric { chebyshev, euclidean };
enum class Execution { serial, parallel };

struct NeighborOptions {
    Metric metric = Metric::euclidean;
    /// Candidates must satisfy |i - j| > exclusion (Theiler window; 0 excludes only self).
    std::size_t exclusion = 0;
    /// Skip candidates at distance exactly 0.
    bool skip_zero = false;
};

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct Neighbor {
    std::size_t index = npos;
    double distance = std::numeric_limits<double>::infinity();
};

/// Gaussian-kernel weighted target average per query row (GRNN pattern layer).
struct KernelRegressionInput {
    const Eigen::MatrixXd* patterns = nullptr;
    const Eigen::VectorXd* targets = nullptr;
    double sigma = 1.0;
};

namespace serial {
std::vector<Neighbor> nearest_neighbors(const DelayPoints& points, const NeighborOptions& opt);
Eigen::VectorXd kernel_regression(const KernelRegressionInput& in, const Eigen::MatrixXd& queries);
} // namespace serial

namespace parallel {
std::vector<Neighbor> nearest_neighbors(const DelayPoints& points, const NeighborOptions& opt);
Eigen::VectorXd kernel_regression(const KernelRegressionInput& in, const Eigen::MatrixXd& queries);
} // namespace parallel

std::vector<Neighbor> nearest_neighbors(const DelayPoints& points, const NeighborOptions& opt, Execution exec);

/// Worker count used by the parallel kernels (0 = OpenMP default).
void set_threads(int n);
int threads();

} // namespace atmcast::kernels
