#include "atmcast/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "atmcast/error.hpp"
#include "atmcast/rng.hpp"

namespace atmcast {

using nlohmann::json;

namespace {

void require_finite(double v, std::size_t step, const char* what)
{
    if (!std::isfinite(v)) {
        throw Error(ErrorKind::numeric, std::string(what) + ": orbit became non-finite at step " + std::to_string(step));
    }
}

const json& defaults(GeneratorKind k)
{
    static const json logistic = {{"r", 4.0}, {"x0", nullptr}, {"transient", 100}};
    static const json henon = {{"a", 1.4}, {"b", 0.3}, {"x0", nullptr}, {"y0", nullptr}, {"transient", 100}};
    static const json lorenz = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}, {"dt", 0.01},
                                {"stride", 10},  {"transient_steps", 1000}, {"initial", nullptr}};
    static const json walk = {{"start", 0.0}, {"step_std", 1.0}};
    static const json ar = {{"coefficients", {0.5}}, {"intercept", 0.0}, {"noise_std", 1.0}, {"burn_in", 100}};
    static const json atm = {{"base", "logistic"},
                             {"level", 1000.0},
                             {"amplitude", 0.8},
                             {"weekly_index", {1.0, 0.95, 0.9, 0.95, 1.15, 1.3, 0.75}},
                             {"noise_std", 30.0},
                             {"missing", 0}};
    switch (k) {
    case GeneratorKind::logistic: return logistic;
    case GeneratorKind::henon: return henon;
    case GeneratorKind::lorenz_x: return lorenz;
    case GeneratorKind::random_walk: return walk;
    case GeneratorKind::ar: return ar;
    case GeneratorKind::atm_like: return atm;
    }
    return logistic;
}

[[noreturn]] void bad(const GeneratorSpec& s, const std::string& key, const std::string& why)
{
    throw Error(ErrorKind::config, std::string(to_string(s.kind)) + " parameter '" + key + "' " + why);
}

double real(const GeneratorSpec& s, const std::string& key)
{
    const auto& v = s.parameters.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) bad(s, key, "must be a finite number");
    return v.get<double>();
}

std::size_t count(const GeneratorSpec& s, const std::string& key)
{
    const auto& v = s.parameters.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad(s, key, "must be a non-negative integer");
    return v.get<std::size_t>();
}

std::optional<double> maybe_real(const GeneratorSpec& s, const std::string& key)
{
    if (s.parameters.at(key).is_null()) return std::nullopt;
    return real(s, key);
}

/// Maps a base orbit onto [0, 1] by its attractor's nominal range.
double unit_scale(GeneratorKind base, double x)
{
    switch (base) {
    case GeneratorKind::henon: return std::clamp((x + 1.5) / 3.0, 0.0, 1.0);
    case GeneratorKind::lorenz_x: return std::clamp((x + 25.0) / 50.0, 0.0, 1.0);
    default: return std::clamp(x, 0.0, 1.0);
    }
}

std::vector<double> chaotic_orbit(const GeneratorSpec& spec, std::size_t length)
{
    const GeneratorSpec v = validated(spec);
    const auto& p = v.parameters;
    Rng rng(derive_seed(v.seed, {0}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (v.kind) {
    case GeneratorKind::logistic: {
        double x0 = unit(rng);
        while (x0 <= 0.0 || x0 == 0.25 || x0 == 0.5 || x0 == 0.75) x0 = unit(rng);
        return logistic_map(p.at("r").get<double>(), maybe_real(v, "x0").value_or(x0), length, count(v, "transient"));
    }
    case GeneratorKind::henon: {
        const double x0 = 0.2 * unit(rng) - 0.1, y0 = 0.2 * unit(rng) - 0.1;
        return henon_map(p.at("a").get<double>(), p.at("b").get<double>(), maybe_real(v, "x0").value_or(x0),
                         maybe_real(v, "y0").value_or(y0), length, count(v, "transient"));
    }
    case GeneratorKind::lorenz_x: {
        LorenzParams lp{real(v, "sigma"), real(v, "rho"), real(v, "beta"), real(v, "dt"), count(v, "stride"),
                        count(v, "transient_steps")};
        std::array<double, 3> s0{1.0 + 2.0 * unit(rng) - 1.0, 1.0 + 2.0 * unit(rng) - 1.0, 20.0 + 2.0 * unit(rng) - 1.0};
        if (!p.at("initial").is_null()) {
            const auto init = p.at("initial").get<std::vector<double>>();
            s0 = {init[0], init[1], init[2]};
        }
        return lorenz_x(lp, s0, length);
    }
    default: break;
    }
    throw Error(ErrorKind::config, "not a chaotic base generator: " + std::string(to_string(v.kind)));
}

} // namespace

const char* to_string(GeneratorKind k)
{
    switch (k) {
    case GeneratorKind::logistic: return "logistic";
    case GeneratorKind::henon: return "henon";
    case GeneratorKind::lorenz_x: return "lorenz_x";
    case GeneratorKind::random_walk: return "random_walk";
    case GeneratorKind::ar: return "ar";
    case GeneratorKind::atm_like: return "atm_like";
    }
    return "unknown";
}

GeneratorKind parse_generator_kind(const std::string& text)
{
    for (auto k : {GeneratorKind::logistic, GeneratorKind::henon, GeneratorKind::lorenz_x, GeneratorKind::random_walk,
                   GeneratorKind::ar, GeneratorKind::atm_like}) {
        if (text == to_string(k)) return k;
    }
    throw Error(ErrorKind::config, "unknown generator kind '" + text + "'");
}

GeneratorSpec GeneratorSpec::from_json(const json& j)
{
    if (!j.is_object()) throw Error(ErrorKind::config, "generator spec must be an object");
    static const std::vector<std::string> keys = {"kind", "parameters", "length", "seed", "id", "start"};
    for (const auto& [k, _] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            throw Error(ErrorKind::config, "unknown generator spec key '" + k + "'");
        }
    }
    GeneratorSpec s;
    s.kind = parse_generator_kind(j.at("kind").get<std::string>());
    s.parameters = j.value("parameters", json::object());
    s.length = j.value("length", std::size_t{1000});
    s.seed = j.value("seed", std::uint64_t{0});
    s.id = j.value("id", std::string("series"));
    if (j.contains("start")) {
        const auto d = Date::parse(j.at("start").get<std::string>());
        if (!d) throw Error(ErrorKind::config, "generator start must be YYYY-MM-DD");
        s.start = *d;
    }
    return validated(s);
}

json GeneratorSpec::to_json() const
{
    return {{"kind", atmcast::to_string(kind)}, {"parameters", parameters}, {"length", length},
            {"seed", seed},                     {"id", id},                 {"start", start.iso()}};
}

GeneratorSpec validated(const GeneratorSpec& spec)
{
    if (spec.length < 1) {
        throw Error(ErrorKind::config, "generator length must be at least 1");
    }
    if (!spec.parameters.is_object()) {
        throw Error(ErrorKind::config, "generator parameters must be an object");
    }
    const json& d = defaults(spec.kind);
    GeneratorSpec out = spec;
    for (const auto& [k, v] : spec.parameters.items()) {
        if (!d.contains(k)) bad(spec, k, "is not recognised");
    }
    out.parameters = d;
    for (const auto& [k, v] : spec.parameters.items()) out.parameters[k] = v;

    switch (out.kind) {
    case GeneratorKind::logistic: {
        const double r = real(out, "r");
        if (!(r > 0.0 && r <= 4.0)) bad(out, "r", "must lie in (0, 4]");
        if (auto x0 = maybe_real(out, "x0"); x0 && !(*x0 > 0.0 && *x0 < 1.0)) bad(out, "x0", "must lie in (0, 1)");
        count(out, "transient");
        break;
    }
    case GeneratorKind::henon:
        real(out, "a");
        real(out, "b");
        maybe_real(out, "x0");
        maybe_real(out, "y0");
        count(out, "transient");
        break;
    case GeneratorKind::lorenz_x: {
        for (const char* k : {"sigma", "rho", "beta"}) real(out, k);
        if (!(real(out, "dt") > 0.0)) bad(out, "dt", "must be positive");
        if (count(out, "stride") < 1) bad(out, "stride", "must be at least 1");
        count(out, "transient_steps");
        const auto& init = out.parameters.at("initial");
        if (!init.is_null() && !(init.is_array() && init.size() == 3)) bad(out, "initial", "must be three numbers");
        break;
    }
    case GeneratorKind::random_walk:
        real(out, "start");
        if (real(out, "step_std") < 0.0) bad(out, "step_std", "must be non-negative");
        break;
    case GeneratorKind::ar: {
        const auto& c = out.parameters.at("coefficients");
        if (!c.is_array()) bad(out, "coefficients", "must be a list of numbers");
        for (const auto& x : c)
            if (!x.is_number()) bad(out, "coefficients", "must be a list of numbers");
        real(out, "intercept");
        if (real(out, "noise_std") < 0.0) bad(out, "noise_std", "must be non-negative");
        count(out, "burn_in");
        break;
    }
    case GeneratorKind::atm_like: {
        const auto base = parse_generator_kind(out.parameters.at("base").get<std::string>());
        if (base != GeneratorKind::logistic && base != GeneratorKind::henon && base != GeneratorKind::lorenz_x) {
            bad(out, "base", "must be logistic, henon or lorenz_x");
        }
        if (!(real(out, "level") > 0.0)) bad(out, "level", "must be positive");
        const double amp = real(out, "amplitude");
        if (!(amp >= 0.0 && amp < 2.0)) bad(out, "amplitude", "must lie in [0, 2)");
        const auto& w = out.parameters.at("weekly_index");
        if (!w.is_array() || w.size() != 7) bad(out, "weekly_index", "must hold seven factors (Monday first)");
        for (const auto& x : w)
            if (!x.is_number() || !(x.get<double>() > 0.0)) bad(out, "weekly_index", "factors must be positive");
        if (real(out, "noise_std") < 0.0) bad(out, "noise_std", "must be non-negative");
        if (count(out, "missing") > out.length) bad(out, "missing", "exceeds the series length");
        break;
    }
    }
    return out;
}

std::vector<double> logistic_map(double r, double x0, std::size_t length, std::size_t transient)
{
    std::vector<double> out;
    out.reserve(length);
    double x = x0;
    for (std::size_t t = 0; t < transient + length; ++t) {
        x = r * x * (1.0 - x);
        require_finite(x, t, "logistic");
        if (t >= transient) out.push_back(x);
    }
    return out;
}

std::vector<double> henon_map(double a, double b, double x0, double y0, std::size_t length, std::size_t transient)
{
    std::vector<double> out;
    out.reserve(length);
    double x = x0, y = y0;
    for (std::size_t t = 0; t < transient + length; ++t) {
        const double nx = 1.0 - a * x * x + y;
        y = b * x;
        x = nx;
        require_finite(x, t, "henon");
        if (t >= transient) out.push_back(x);
    }
    return out;
}

std::vector<double> lorenz_x(const LorenzParams& p, std::array<double, 3> s, std::size_t length)
{
    using State = std::array<double, 3>;
    auto f = [&](const State& u) -> State {
        return {p.sigma * (u[1] - u[0]), u[0] * (p.rho - u[2]) - u[1], u[0] * u[1] - p.beta * u[2]};
    };
    auto axpy = [](const State& u, double h, const State& k) -> State {
        return {u[0] + h * k[0], u[1] + h * k[1], u[2] + h * k[2]};
    };
    auto step = [&](State& u) {
        const State k1 = f(u);
        const State k2 = f(axpy(u, 0.5 * p.dt, k1));
        const State k3 = f(axpy(u, 0.5 * p.dt, k2));
        const State k4 = f(axpy(u, p.dt, k3));
        for (int i = 0; i < 3; ++i) u[i] += p.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };
    std::size_t n = 0;
    for (; n < p.transient_steps; ++n) {
        step(s);
        require_finite(s[0] + s[1] + s[2], n, "lorenz_x");
    }
    std::vector<double> out;
    out.reserve(length);
    while (out.size() < length) {
        for (std::size_t k = 0; k < p.stride; ++k, ++n) {
            step(s);
            require_finite(s[0] + s[1] + s[2], n, "lorenz_x");
        }
        out.push_back(s[0]);
    }
    return out;
}

std::vector<double> random_walk(double start, double step_std, std::size_t length, std::uint64_t seed)
{
    Rng rng(seed);
    std::normal_distribution<double> step(0.0, 1.0);
    std::vector<double> out;
    out.reserve(length);
    double x = start;
    for (std::size_t t = 0; t < length; ++t) {
        out.push_back(x);
        x += step_std * step(rng);
    }
    return out;
}

std::vector<double> autoregression(std::span<const double> coef, double intercept, double noise_std, std::size_t length,
                                   std::size_t burn_in, std::uint64_t seed)
{
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t p = coef.size();
    std::vector<double> x(p, 0.0);
    for (std::size_t t = 0; t < burn_in + length; ++t) {
        double v = intercept + noise_std * noise(rng);
        for (std::size_t k = 0; k < p; ++k) v += coef[k] * x[x.size() - 1 - k];
        require_finite(v, t, "ar");
        x.push_back(v);
    }
    return {x.end() - std::ptrdiff_t(length), x.end()};
}

DatedSeries generate(const GeneratorSpec& raw)
{
    const GeneratorSpec spec = validated(raw);
    const auto& p = spec.parameters;
    std::vector<double> values;
    std::vector<std::size_t> missing;
    switch (spec.kind) {
    case GeneratorKind::logistic:
    case GeneratorKind::henon:
    case GeneratorKind::lorenz_x: values = chaotic_orbit(spec, spec.length); break;
    case GeneratorKind::random_walk:
        values = random_walk(p.at("start").get<double>(), p.at("step_std").get<double>(), spec.length, spec.seed);
        break;
    case GeneratorKind::ar: {
        const auto coef = p.at("coefficients").get<std::vector<double>>();
        values = autoregression(coef, p.at("intercept").get<double>(), p.at("noise_std").get<double>(), spec.length,
                                p.at("burn_in").get<std::size_t>(), spec.seed);
        break;
    }
    case GeneratorKind::atm_like: {
        const auto base_kind = parse_generator_kind(p.at("base").get<std::string>());
        GeneratorSpec base{base_kind, json::object(), spec.length, derive_seed(spec.seed, {1}), spec.id, spec.start};
        const auto orbit = chaotic_orbit(base, spec.length);
        const double level = p.at("level").get<double>(), amp = p.at("amplitude").get<double>();
        const auto weekly = p.at("weekly_index").get<std::vector<double>>();
        const double noise_std = p.at("noise_std").get<double>();
        Rng rng(derive_seed(spec.seed, {2}));
        std::normal_distribution<double> noise(0.0, 1.0);
        values.resize(spec.length);
        for (std::size_t t = 0; t < spec.length; ++t) {
            const double b = level * (1.0 + amp * (unit_scale(base_kind, orbit[t]) - 0.5));
            const double w = weekly[std::size_t((spec.start + std::int64_t(t)).iso_weekday() - 1)];
            const double e = noise_std > 0.0 ? noise_std * noise(rng) : 0.0;
            values[t] = std::max(0.0, b * w + e);
        }
        const auto n_missing = p.at("missing").get<std::size_t>();
        if (n_missing > 0) {
            std::vector<std::size_t> idx(spec.length);
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            Rng pick(derive_seed(spec.seed, {3}));
            for (std::size_t i = 0; i < n_missing; ++i) {
                std::uniform_int_distribution<std::size_t> u(i, idx.size() - 1);
                std::swap(idx[i], idx[u(pick)]);
            }
            missing.assign(idx.begin(), idx.begin() + std::ptrdiff_t(n_missing));
        }
        break;
    }
    }
    DatedSeries out = make_series(spec.id, spec.start, values);
    for (std::size_t i : missing) out.values[i] = std::nullopt;
    return out;
}

void write_generated_csv(std::ostream& out, const std::vector<DatedSeries>& series)
{
    PanelDataset panel = make_panel(series);
    write_panel(out, panel);
}

} // namespace atmcast
