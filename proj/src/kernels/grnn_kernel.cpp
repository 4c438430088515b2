#include <algorithm>
#include <cmath>

#include "atmcast/kernels.hpp"

namespace atmcast::kernels {

namespace {

double predict_one(const KernelRegressionInput& in, const double* q, std::vector<double>& expo)
{
    const Eigen::MatrixXd& P = *in.patterns;
    const Eigen::VectorXd& Y = *in.targets;
    const Eigen::Index n = P.rows();
    const double denom = 2.0 * in.sigma * in.sigma;
    double max_e = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double d2 = 0.0;
        for (Eigen::Index k = 0; k < P.cols(); ++k) {
            const double diff = q[k] - P(i, k);
            d2 += diff * diff;
        }
        expo[i] = -d2 / denom;
        max_e = std::max(max_e, expo[i]);
    }
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = std::exp(expo[i] - max_e);
        num += w * Y(i);
        den += w;
    }
    return num / den;
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace

namespace serial {

Eigen::VectorXd kernel_regression(const KernelRegressionInput& in, const Eigen::MatrixXd& queries)
{
    const RowMajor Q = queries;
    Eigen::VectorXd out(Q.rows());
    std::vector<double> expo(in.patterns->rows());
    for (Eigen::Index r = 0; r < Q.rows(); ++r) {
        out(r) = predict_one(in, Q.row(r).data(), expo);
    }
    return out;
}

} // namespace serial

namespace parallel {

Eigen::VectorXd kernel_regression(const KernelRegressionInput& in, const Eigen::MatrixXd& queries)
{
    const RowMajor Q = queries;
    Eigen::VectorXd out(Q.rows());
    const auto rows = static_cast<std::ptrdiff_t>(Q.rows());
#pragma omp parallel num_threads(threads())
    {
        std::vector<double> expo(in.patterns->rows());
#pragma omp for schedule(static)
        for (std::ptrdiff_t r = 0; r < rows; ++r) {
            out(r) = predict_one(in, Q.row(r).data(), expo);
        }
    }
    return out;
}

} // namespace parallel

} // namespace atmcast::kernels
