#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "atmcast/date.hpp"
#include "atmcast/series.hpp"

namespace atmcast {

enum class GeneratorKind { logistic, henon, lorenz_x, random_walk, ar, atm_like };

const char* to_string(GeneratorKind k);
GeneratorKind parse_generator_kind(const std::string& text);

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::logistic;
    nlohmann::json parameters = nlohmann::json::object();
    std::size_t length = 1000;
    std::uint64_t seed = 0;
    std::string id = "series";
    Date start = Date::from_ymd(2019, 1, 1);

    static GeneratorSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Fills per-kind defaults; unknown keys and invalid values raise a config error.
GeneratorSpec validated(const GeneratorSpec& spec);

DatedSeries generate(const GeneratorSpec& spec);

// Raw generators. Each raises a numeric error naming the step if the state
// stops being finite.

/// x_{t+1} = r x_t (1 - x_t), `transient` iterates discarded before emitting.
std::vector<double> logistic_map(double r, double x0, std::size_t length, std::size_t transient);
std::vector<double> henon_map(double a, double b, double x0, double y0, std::size_t length, std::size_t transient);
struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double dt = 0.01;
    std::size_t stride = 10;
    std::size_t transient_steps = 1000;
};
/// Fixed-step RK4, emitting x every `stride` steps after the transient.
std::vector<double> lorenz_x(const LorenzParams& p, std::array<double, 3> state, std::size_t length);
std::vector<double> random_walk(double start, double step_std, std::size_t length, std::uint64_t seed);
std::vector<double> autoregression(std::span<const double> coefficients, double intercept, double noise_std,
                                   std::size_t length, std::size_t burn_in, std::uint64_t seed);

/// Several series in the panel CSV layout.
void write_generated_csv(std::ostream& out, const std::vector<DatedSeries>& series);

} // namespace atmcast
