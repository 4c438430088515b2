// Serial vs OpenMP timings of the two hot kernels: delay-space nearest
// neighbours (Cao, Rosenstein) and GRNN kernel regression.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "atmcast/kernels.hpp"
#include "atmcast/synthgen.hpp"

using namespace atmcast;

namespace {

template <typename F>
double best_of(int repeats, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

} // namespace

int main()
{
    std::printf("threads available: %d\n", omp_get_max_threads());
    std::printf("%-28s %8s %12s %12s %8s\n", "kernel", "size", "serial_ms", "parallel_ms", "speedup");

    for (std::size_t n : {2000, 5000, 10000}) {
        const auto x = logistic_map(4.0, 0.3, n, 100);
        const kernels::DelayPoints pts{x, 1, 4, n - 3};
        const kernels::NeighborOptions opt{kernels::Metric::chebyshev, 0, true};
        std::size_t sink = 0;
        const double s = best_of(3, [&] { sink += kernels::serial::nearest_neighbors(pts, opt)[0].index; });
        const double p = best_of(3, [&] { sink += kernels::parallel::nearest_neighbors(pts, opt)[0].index; });
        std::printf("%-28s %8zu %12.2f %12.2f %8.2f\n", "nearest_neighbors(m=4)", n, s, p, s / p);
        if (sink == std::size_t(-1)) std::puts("");
    }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index n : {700, 2000, 5000}) {
        Eigen::MatrixXd P(n, 16), Q(n, 16);
        Eigen::VectorXd Y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < 16; ++k) {
                P(i, k) = u(rng);
                Q(i, k) = u(rng);
            }
            Y(i) = u(rng);
        }
        const kernels::KernelRegressionInput in{&P, &Y, 0.3};
        double sink = 0.0;
        const double s = best_of(3, [&] { sink += kernels::serial::kernel_regression(in, Q)(0); });
        const double p = best_of(3, [&] { sink += kernels::parallel::kernel_regression(in, Q)(0); });
        std::printf("%-28s %8td %12.2f %12.2f %8.2f\n", "kernel_regression(16 cols)", n, s, p, s / p);
        if (sink < -1.0) std::puts("");
    }
    return 0;
}
