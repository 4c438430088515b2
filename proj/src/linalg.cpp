#include "atmcast/linalg.hpp"

namespace atmcast {

std::optional<OlsFit> ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool with_covariance)
{
    if (X.rows() < X.cols() || X.cols() == 0) {
        return std::nullopt;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        return std::nullopt;
    }
    OlsFit fit;
    fit.beta = qr.solve(y);
    fit.residuals = y - X * fit.beta;
    fit.rss = fit.residuals.squaredNorm();
    if (with_covariance) {
        // R'R = P'X'XP, so (X'X)^-1 = P (R'R)^-1 P'.
        const Eigen::Index k = X.cols();
        Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
        Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
        Eigen::MatrixXd inner = Rinv * Rinv.transpose();
        const auto& perm = qr.colsPermutation();
        fit.xtx_inverse = perm * inner * perm.transpose();
    }
    return fit;
}

} // namespace atmcast
