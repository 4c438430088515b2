#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "atmcast/models/cnn1d.hpp"
#include "atmcast/models/lstm.hpp"
#include "atmcast/models/mlp.hpp"
#include "network_oracles.hpp"
#include "oracles.hpp"

using namespace atmcast;

namespace {

constexpr int kSeeds = 25;
constexpr double kTolerance = 1e-4;

} // namespace

TEST_CASE("MLP forward matches the layout oracle; analytic gradient matches finite differences")
{
    double worst = 0.0;
    for (int seed = 0; seed < kSeeds; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        const MlpShape s{3 + std::size_t(seed % 3), 2 + std::size_t(seed % 5), 1 + std::size_t(seed % 4)};
        const auto X = oracle::uniform_matrix(5, Eigen::Index(s.inputs), rng);
        const Eigen::VectorXd y = oracle::uniform_matrix(5, 1, rng).col(0);
        const auto theta = oracle::random_theta(s.n_params(), rng, 1.0);

        const auto f = MlpModel::forward(s, theta, X);
        const auto ref = oracle::mlp_forward(s, theta, X);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(f(Eigen::Index(i)) == doctest::Approx(ref[i]).epsilon(1e-13));
        CHECK(MlpModel::loss_and_gradient(s, theta, X, y, nullptr) == doctest::Approx(oracle::mse(ref, y)).epsilon(1e-13));

        const double err = oracle::check_gradient(
            [&](std::span<const double> t, std::vector<double>* g) { return MlpModel::loss_and_gradient(s, t, X, y, g); },
            theta);
        worst = std::max(worst, err);
        CHECK(err < kTolerance);
    }
    MESSAGE("MLP worst relative gradient error over " << kSeeds << " seeds: " << worst);
}

TEST_CASE("LSTM backpropagation through time matches finite differences")
{
    double worst = 0.0;
    for (int seed = 0; seed < kSeeds; ++seed) {
        std::mt19937_64 rng(2000 + seed);
        const std::size_t exo = seed % 2 ? 9 : 0;
        const LstmShape s{2 + std::size_t(seed % 4), 3, exo};
        auto X = oracle::uniform_matrix(4, Eigen::Index(s.steps + exo), rng);
        for (Eigen::Index c = Eigen::Index(s.steps); c < X.cols(); ++c) X.col(c) = (X.col(c).array() > 0.5).cast<double>();
        const Eigen::VectorXd y = oracle::uniform_matrix(4, 1, rng).col(0);
        const auto theta = oracle::random_theta(s.n_params(), rng, 0.8);
        const double err = oracle::check_gradient(
            [&](std::span<const double> t, std::vector<double>* g) { return LstmModel::loss_and_gradient(s, t, X, y, g); },
            theta);
        worst = std::max(worst, err);
        CHECK(err < kTolerance);
    }
    MESSAGE("LSTM worst relative gradient error over " << kSeeds << " seeds: " << worst);
}

TEST_CASE("CNN forward matches the layout oracle; gradient matches finite differences away from ReLU kinks")
{
    double worst = 0.0;
    for (int seed = 0; seed < kSeeds; ++seed) {
        std::mt19937_64 rng(3000 + seed);
        const std::size_t exo = seed % 2 ? 9 : 0;
        const CnnShape s{3 + std::size_t(seed % 5), 2 + std::size_t(seed % 4), 2 + std::size_t(seed % 3), exo};
        Eigen::MatrixXd X;
        std::vector<double> theta;
        Eigen::VectorXd y;
        // Redraw inputs until every pre-activation is at least 1e-3 from the kink.
        for (int attempt = 0;; ++attempt) {
            REQUIRE(attempt < 1000);
            X = oracle::uniform_matrix(5, Eigen::Index(s.steps + exo), rng);
            y = oracle::uniform_matrix(5, 1, rng).col(0);
            theta = oracle::random_theta(s.n_params(), rng, 1.0);
            if (oracle::cnn_forward(s, theta, X).min_abs_pre > 1e-3) break;
        }
        const auto ref = oracle::cnn_forward(s, theta, X);
        const auto f = Cnn1dModel::forward(s, theta, X);
        for (std::size_t i = 0; i < ref.yhat.size(); ++i)
            CHECK(f(Eigen::Index(i)) == doctest::Approx(ref.yhat[i]).epsilon(1e-13));

        const double err = oracle::check_gradient(
            [&](std::span<const double> t, std::vector<double>* g) { return Cnn1dModel::loss_and_gradient(s, t, X, y, g); },
            theta);
        worst = std::max(worst, err);
        CHECK(err < kTolerance);
    }
    MESSAGE("CNN worst relative gradient error over " << kSeeds << " seeds: " << worst);
}
