#include <cmath>

#include <omp.h>

#include "atmcast/kernels.hpp"

namespace atmcast::kernels {

namespace {

int g_threads = 0;

bool admissible(std::size_t i, std::size_t j, std::size_t exclusion)
{
    const std::size_t gap = i > j ? i - j : j - i;
    return gap > exclusion;
}

} // namespace

void set_threads(int n) { g_threads = n; }

int threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

namespace serial {

std::vector<Neighbor> nearest_neighbors(const DelayPoints& pts, const NeighborOptions& opt)
{
    std::vector<Neighbor> out(pts.count);
    for (std::size_t i = 0; i < pts.count; ++i) {
        Neighbor best;
        for (std::size_t j = 0; j < pts.count; ++j) {
            if (!admissible(i, j, opt.exclusion)) {
                continue;
            }
            double d = 0.0;
            for (std::size_t k = 0; k < pts.dim; ++k) {
                const double diff = pts.coord(i, k) - pts.coord(j, k);
                if (opt.metric == Metric::chebyshev) {
                    d = std::max(d, std::abs(diff));
                } else {
                    d += diff * diff;
                }
            }
            if (opt.skip_zero && d == 0.0) {
                continue;
            }
            if (d < best.distance) {
                best = {j, d};
            }
        }
        if (opt.metric == Metric::euclidean && best.index != npos) {
            best.distance = std::sqrt(best.distance);
        }
        out[i] = best;
    }
    return out;
}

} // namespace serial

namespace parallel {

// Same scan order and comparisons as the serial reference, with partial-distance
// abandonment: a candidate is dropped as soon as its running distance exceeds
// the best so far, which cannot change the winner or its (fully summed) distance.
std::vector<Neighbor> nearest_neighbors(const DelayPoints& pts, const NeighborOptions& opt)
{
    std::vector<Neighbor> out(pts.count);
    const auto n = static_cast<std::ptrdiff_t>(pts.count);
    const bool cheb = opt.metric == Metric::chebyshev;
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads())
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        Neighbor best;
        for (std::size_t j = 0; j < pts.count; ++j) {
            if (!admissible(i, j, opt.exclusion)) {
                continue;
            }
            double d = 0.0;
            bool abandoned = false;
            for (std::size_t k = 0; k < pts.dim; ++k) {
                const double diff = pts.x[i + k * pts.tau] - pts.x[j + k * pts.tau];
                if (cheb) {
                    d = std::max(d, std::abs(diff));
                } else {
                    d += diff * diff;
                }
                if (d > best.distance) {
                    abandoned = true;
                    break;
                }
            }
            if (abandoned || (opt.skip_zero && d == 0.0)) {
                continue;
            }
            if (d < best.distance) {
                best = {j, d};
            }
        }
        if (!cheb && best.index != npos) {
            best.distance = std::sqrt(best.distance);
        }
        out[i] = best;
    }
    return out;
}

} // namespace parallel

} // namespace atmcast::kernels

namespace atmcast::kernels {

std::vector<Neighbor> nearest_neighbors(const DelayPoints& points, const NeighborOptions& opt, Execution exec)
{
    return exec == Execution::serial ? serial::nearest_neighbors(points, opt)
                                     : parallel::nearest_neighbors(points, opt);
}

} // namespace atmcast::kernels
