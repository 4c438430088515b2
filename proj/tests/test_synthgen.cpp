#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "atmcast/error.hpp"
#include "atmcast/preprocess.hpp"
#include "atmcast/rng.hpp"
#include "atmcast/series.hpp"
#include "atmcast/synthgen.hpp"

using namespace atmcast;
using json = nlohmann::json;

namespace {

GeneratorSpec spec(GeneratorKind k, json params, std::size_t length, std::uint64_t seed)
{
    GeneratorSpec s;
    s.kind = k;
    s.parameters = std::move(params);
    s.length = length;
    s.seed = seed;
    return s;
}

} // namespace

TEST_CASE("logistic map hand iteration")
{
    const auto x = logistic_map(4.0, 0.3, 3, 0);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == doctest::Approx(0.84).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(0.5376).epsilon(1e-14));
    CHECK(x[2] == doctest::Approx(0.99434496).epsilon(1e-14));
    const auto g = generate(spec(GeneratorKind::logistic, {{"x0", 0.3}, {"transient", 0}}, 3, 1)).dense();
    CHECK(g == x);
}

TEST_CASE("henon map emits x")
{
    const auto x = henon_map(1.4, 0.3, 0.0, 0.0, 3, 0);
    CHECK(x[0] == 1.0);
    CHECK(x[1] == doctest::Approx(1.0 - 1.4 + 0.0).epsilon(1e-14));
    CHECK(x[2] == doctest::Approx(1.0 - 1.4 * 0.16 + 0.3).epsilon(1e-14));
}

TEST_CASE("lorenz x stays on the attractor for 1e5 steps")
{
    const auto x = generate(spec(GeneratorKind::lorenz_x, json::object(), 10000, 3)).dense();
    REQUIRE(x.size() == 10000);
    for (double v : x) {
        REQUIRE(std::isfinite(v));
        CHECK(std::abs(v) <= 25.0);
    }
}

TEST_CASE("divergent orbits raise a numeric error")
{
    try {
        henon_map(1.4, 0.3, 10.0, 10.0, 100, 0);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numeric);
    }
}

TEST_CASE("generation is a pure function of the spec")
{
    for (auto k : {GeneratorKind::logistic, GeneratorKind::henon, GeneratorKind::lorenz_x, GeneratorKind::random_walk,
                   GeneratorKind::ar, GeneratorKind::atm_like}) {
        const auto s = spec(k, json::object(), 400, 42);
        const auto a = generate(s), b = generate(s);
        CHECK(a.values == b.values);
        const auto c = generate(spec(k, json::object(), 400, 43));
        CHECK(a.values != c.values);
        CHECK(GeneratorSpec::from_json(s.to_json()).to_json() == validated(s).to_json());
    }
}

TEST_CASE("spec validation")
{
    CHECK_THROWS_AS(validated(spec(GeneratorKind::logistic, {{"rate", 4.0}}, 10, 0)), Error);
    CHECK_THROWS_AS(validated(spec(GeneratorKind::logistic, {{"r", 4.5}}, 10, 0)), Error);
    CHECK_THROWS_AS(validated(spec(GeneratorKind::logistic, json::object(), 0, 0)), Error);
    CHECK_THROWS_AS(validated(spec(GeneratorKind::atm_like, {{"weekly_index", {1, 1, 1}}}, 10, 0)), Error);
    CHECK_THROWS_AS(validated(spec(GeneratorKind::atm_like, {{"base", "ar"}}, 10, 0)), Error);
    CHECK_THROWS_AS(validated(spec(GeneratorKind::atm_like, {{"missing", 11}}, 10, 0)), Error);
    CHECK_THROWS_AS(GeneratorSpec::from_json({{"kind", "logistic"}, {"colour", 1}}), Error);
    CHECK_THROWS_AS(parse_generator_kind("mackey_glass"), Error);
    const auto v = validated(spec(GeneratorKind::ar, json::object(), 10, 0));
    CHECK(v.parameters.at("coefficients") == json{0.5});
}

TEST_CASE("atm_like with zero noise and a flat index is its base series")
{
    const std::uint64_t seed = 17;
    const double level = 500.0, amp = 0.6;
    const auto s = generate(spec(GeneratorKind::atm_like,
                                 {{"level", level},
                                  {"amplitude", amp},
                                  {"noise_std", 0.0},
                                  {"weekly_index", {1, 1, 1, 1, 1, 1, 1}}},
                                 300, seed))
                       .dense();
    const auto orbit = generate(spec(GeneratorKind::logistic, json::object(), 300, derive_seed(seed, {1}))).dense();
    for (std::size_t t = 0; t < s.size(); ++t) CHECK(s[t] == level * (1.0 + amp * (orbit[t] - 0.5)));
}

TEST_CASE("atm_like carries the weekly index and the missing count")
{
    const json week = {1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.5};
    const auto flat = generate(spec(GeneratorKind::atm_like, {{"noise_std", 0.0}, {"weekly_index", {1, 1, 1, 1, 1, 1, 1}}},
                                    200, 4));
    const auto shaped = generate(spec(GeneratorKind::atm_like, {{"noise_std", 0.0}, {"weekly_index", week}}, 200, 4));
    for (std::size_t t = 0; t < 200; ++t) {
        const double w = week[shaped.date_at(t).iso_weekday() - 1];
        CHECK(*shaped.values[t] == doctest::Approx(*flat.values[t] * w).epsilon(1e-14));
    }
    const auto holes = generate(spec(GeneratorKind::atm_like, {{"missing", 37}}, 365, 9));
    CHECK(holes.missing_count() == 37);
    for (const auto& v : holes.values)
        if (v) CHECK(*v >= 0.0);
}

TEST_CASE("random walk: differences are the increments and ADF calls it non-stationary")
{
    const auto w = random_walk(5.0, 2.0, 300, 8);
    double mean = 0.0;
    for (std::size_t t = 1; t < w.size(); ++t) mean += (w[t] - w[t - 1]) / double(w.size() - 1);
    CHECK(std::abs(mean) < 0.5);
    int nonstationary = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto x = generate(spec(GeneratorKind::random_walk, json::object(), 500, seed)).dense();
        nonstationary += adf_test(x).is_stationary ? 0 : 1;
    }
    MESSAGE("random walk judged non-stationary in " << nonstationary << "/100");
    CHECK(nonstationary >= 90);
}

TEST_CASE("generated CSV loads back through the series store")
{
    std::vector<DatedSeries> panel;
    auto a = spec(GeneratorKind::atm_like, {{"missing", 5}}, 60, 1);
    a.id = "a";
    auto b = spec(GeneratorKind::ar, {{"intercept", 50.0}}, 40, 2);
    b.id = "b";
    b.start = Date::from_ymd(2019, 1, 10);
    panel.push_back(generate(a));
    panel.push_back(generate(b));
    std::ostringstream out;
    write_generated_csv(out, panel);
    std::istringstream in(out.str());
    const auto back = load_panel(in);
    REQUIRE(back.series.size() == 2);
    const auto& ba = back.series.at("a");
    const auto& bb = back.series.at("b");
    CHECK(ba.missing_count() == 5);
    CHECK(bb.size() == 60);
    CHECK(bb.missing_count() == 9 + 11);
    for (std::size_t t = 0; t < 40; ++t)
        CHECK(*bb.values[t + 9] == doctest::Approx(*panel[1].values[t]).epsilon(1e-15));
}
