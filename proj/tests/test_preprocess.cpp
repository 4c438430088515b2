#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "atmcast/error.hpp"
#include "atmcast/preprocess.hpp"
#include "oracles.hpp"

using namespace atmcast;

namespace {

// The ADF t-ratio via the normal equations and Gauss-Jordan inversion.
double adf_statistic_oracle(const std::vector<double>& y, std::size_t p)
{
    const std::size_t n = y.size();
    const std::size_t rows = n - 1 - p, cols = p + 2;
    std::vector<std::vector<double>> A(cols, std::vector<double>(2 * cols, 0.0));
    std::vector<double> b(cols, 0.0);
    std::vector<std::vector<double>> X(rows, std::vector<double>(cols));
    std::vector<double> t(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t k = r + p;
        t[r] = y[k + 1] - y[k];
        X[r][0] = 1;
        X[r][1] = y[k];
        for (std::size_t i = 1; i <= p; ++i) X[r][1 + i] = y[k - i + 1] - y[k - i];
    }
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t a = 0; a < cols; ++a) {
            b[a] += X[r][a] * t[r];
            for (std::size_t c = 0; c < cols; ++c) A[a][c] += X[r][a] * X[r][c];
        }
    for (std::size_t a = 0; a < cols; ++a) A[a][cols + a] = 1;
    for (std::size_t c = 0; c < cols; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < cols; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        const double d = A[c][c];
        for (auto& v : A[c]) v /= d;
        for (std::size_t r = 0; r < cols; ++r) {
            if (r == c) continue;
            const double f = A[r][c];
            for (std::size_t k = 0; k < 2 * cols; ++k) A[r][k] -= f * A[c][k];
        }
    }
    std::vector<double> beta(cols, 0.0);
    for (std::size_t a = 0; a < cols; ++a)
        for (std::size_t c = 0; c < cols; ++c) beta[a] += A[a][cols + c] * b[c];
    double rss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double fit = 0.0;
        for (std::size_t a = 0; a < cols; ++a) fit += X[r][a] * beta[a];
        rss += (t[r] - fit) * (t[r] - fit);
    }
    const double s2 = rss / double(rows - cols);
    return beta[1] / std::sqrt(s2 * A[1][cols + 1]);
}

DatedSeries weekly_series(const std::array<double, 7>& pattern, double level, std::size_t days, Date start)
{
    DatedSeries s{"w", start, {}};
    for (std::size_t i = 0; i < days; ++i) {
        s.values.push_back(level * pattern[(start + std::int64_t(i)).iso_weekday() - 1]);
    }
    return s;
}

} // namespace

TEST_CASE("ADF statistic matches the normal-equations oracle")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto y = oracle::ar1(300, 0.7, 1.0, seed);
        for (std::size_t p : {0, 1, 4}) {
            const auto r = adf_test(y, p);
            CHECK(r.statistic == doctest::Approx(adf_statistic_oracle(y, p)).epsilon(1e-9));
            CHECK(r.lags_used == p);
            CHECK(r.n_obs == y.size() - 1 - p);
        }
    }
    CHECK(schwert_max_lag(100) == 12);
    CHECK(schwert_max_lag(500) == 17);
}

TEST_CASE("ADF statistic is affine invariant")
{
    const auto y = oracle::ar1(400, 0.6, 1.0, 77);
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = 3.5 * y[i] - 12.0;
    CHECK(std::abs(adf_test(y).statistic - adf_test(z).statistic) < 1e-8);
}

TEST_CASE("ADF Monte Carlo verdicts")
{
    int ar_stationary = 0, walk_stationary = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ar_stationary += adf_test(oracle::ar1(500, 0.5, 1.0, 1000 + seed)).is_stationary;
        walk_stationary += adf_test(oracle::walk(500, 5000 + seed)).is_stationary;
    }
    MESSAGE("AR(0.5) stationary in " << ar_stationary << "/100; random walk stationary in " << walk_stationary << "/100");
    CHECK(ar_stationary >= 90);
    CHECK(100 - walk_stationary >= 90);
}

TEST_CASE("ADF errors")
{
    std::vector<double> flat(100, 4.0);
    CHECK_THROWS_AS(adf_test(flat), Error);
    try {
        adf_test(flat);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::singular);
    }
    std::vector<double> tiny(10, 1.0);
    CHECK_THROWS_AS(adf_test(tiny), Error);
}

TEST_CASE("seasonal index")
{
    const Date start = Date::from_ymd(2021, 3, 3);
    SUBCASE("constant train")
    {
        const auto idx = fit_seasonal_index(make_series("c", start, std::vector<double>(28, 10.0)));
        for (double f : idx.factor) CHECK(f == 1.0);
    }
    SUBCASE("purely multiplicative weekly pattern is recovered")
    {
        const std::array<double, 7> p{0.8, 0.9, 1.0, 1.1, 1.3, 1.2, 0.7};
        const auto s = weekly_series(p, 250.0, 70, start);
        const auto idx = fit_seasonal_index(s);
        for (int d = 0; d < 7; ++d) CHECK(idx.factor[d] == doctest::Approx(p[d]).epsilon(1e-12));
        const auto flat = deseasonalize(s, idx);
        for (const auto& v : flat.values) CHECK(*v == doctest::Approx(250.0).epsilon(1e-12));
    }
    SUBCASE("zero factor is replaced and flagged")
    {
        const std::array<double, 7> p{0.0, 1, 1, 1, 1, 1, 1};
        const auto idx = fit_seasonal_index(weekly_series(p, 5.0, 21, Date::from_ymd(2024, 1, 1)));
        CHECK(idx.factor[0] == 1.0);
        CHECK(idx.replaced[0]);
        CHECK_FALSE(idx.replaced[1]);
    }
    SUBCASE("six days do not cover the week")
    {
        try {
            fit_seasonal_index(make_series("s", start, std::vector<double>(6, 1.0)));
            FAIL("expected coverage error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::coverage);
        }
    }
}

TEST_CASE("deseasonalize round trip")
{
    SeasonalIndex idx;
    idx.factor = {0.83, 1.17, 0.99, 1.4, 0.6, 1.01, 1.3};
    const auto x = oracle::gaussian_noise(365, 4, 50.0);
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = 500 + x[i];
    const auto s = make_series("r", Date::from_ymd(2020, 6, 1), v);
    const auto back = reseasonalize(deseasonalize(s, idx), idx);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(std::abs(*back.values[i] - v[i]) <= 1e-12 * std::abs(v[i]));
    }
    SeasonalIndex unit;
    CHECK(deseasonalize(s, unit).values == s.values);
}

TEST_CASE("seasonal indices of weekday-free noise concentrate near 1")
{
    auto spread = [](std::size_t n) {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto x = oracle::gaussian_noise(n, 900 + seed, 1.0);
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = 100 + 10 * x[i];
            const auto idx = fit_seasonal_index(make_series("n", Date::from_ymd(2020, 1, 1), v));
            for (double f : idx.factor) worst += std::abs(f - 1.0);
        }
        return worst;
    };
    CHECK(spread(2800) < spread(140));
}

TEST_CASE("min-max scaler")
{
    const std::vector<double> train{2, 4, 6};
    const auto p = scaler_fit(train);
    CHECK(scaler_transform(train, p) == std::vector<double>{0, 0.5, 1});
    CHECK_FALSE(p.degenerate);
    CHECK(scaler_inverse(1.5, p) == 8.0);
    CHECK(scaler_inverse(-0.5, p) == 0.0);

    const std::vector<double> flat{5, 5, 5};
    const auto q = scaler_fit(flat);
    CHECK(q.degenerate);
    CHECK(scaler_transform(5.0, q) == 0.0);

    auto x = oracle::gaussian_noise(500, 12, 300.0);
    for (auto& v : x) v = std::abs(v) + 1000.0;
    const auto r = scaler_fit(x);
    for (double v : x) {
        CHECK(std::abs(scaler_inverse(scaler_transform(v, r), r) - v) <= 1e-12 * std::abs(v));
    }
    CHECK_THROWS_AS(scaler_fit(std::vector<double>{}), Error);
}
