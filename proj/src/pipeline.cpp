#include "atmcast/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "atmcast/error.hpp"
#include "atmcast/io_format.hpp"
#include "atmcast/models/arima.hpp"
#include "atmcast/models/grid.hpp"
#include "atmcast/rng.hpp"

namespace atmcast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- file helpers

void write_text(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorKind::io, "failed writing " + path.string());
    }
}

void write_json(const fs::path& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
}

std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Series ids become directory names; anything outside [A-Za-z0-9_.-] is escaped.
std::string path_safe(const std::string& id)
{
    std::string out;
    for (unsigned char c : id) {
        if (std::isalnum(c) || c == '_' || c == '-' || c == '.') {
            out += char(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", c);
            out += buf;
        }
    }
    if (out.empty() || out == "." || out == "..") out = "%" + out;
    return out;
}

std::string trace_name(Family f, bool exo)
{
    return std::string(to_string(f)) + "_" + arm_name(exo);
}

std::size_t family_index(Family f)
{
    const auto& all = all_families();
    return std::size_t(std::find(all.begin(), all.end(), f) - all.begin());
}

// ---------------------------------------------------------------- config parsing

template <typename T>
T get_as(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::config, std::string("config key '") + key + "' has the wrong type");
    }
}

std::size_t get_count(const json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw Error(ErrorKind::config, std::string("config key '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

ExogenousArms parse_arms(const json& v)
{
    if (v.is_boolean()) return v.get<bool>() ? ExogenousArms::with : ExogenousArms::without;
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "true") return ExogenousArms::with;
        if (s == "false") return ExogenousArms::without;
        if (s == "both") return ExogenousArms::both;
    }
    throw Error(ErrorKind::config, "use_exogenous must be true, false or \"both\"");
}

const char* arms_string(ExogenousArms a)
{
    switch (a) {
    case ExogenousArms::without: return "false";
    case ExogenousArms::with: return "true";
    case ExogenousArms::both: return "both";
    }
    return "both";
}

// ---------------------------------------------------------------- per-series modelling context

Eigen::VectorXd restore_values(const Inverses& inv, const Eigen::VectorXd& scaled, std::span<const Date> dates)
{
    Eigen::VectorXd out(scaled.size());
    for (Eigen::Index i = 0; i < scaled.size(); ++i) {
        out(i) = scaler_inverse(scaled(i), inv.scaler) * inv.season.at(dates[std::size_t(i)]);
    }
    return out;
}

struct ArmData {
    SupervisedDataset fit;
    SupervisedDataset validation;
    SupervisedDataset train;
};

ArmData arm_data(const PreparedSeries& p, std::size_t tau, std::size_t m, bool exo, std::size_t horizon)
{
    const auto ds = assemble_supervised(p.scaled, tau, m, exo);
    const Date end = p.train_end();
    const Date val_start = end - std::int64_t(horizon) + 1;
    ArmData a{select_rows(ds, p.scaled.start, val_start - 1), select_rows(ds, val_start, end),
              select_rows(ds, p.scaled.start, end)};
    if (a.fit.rows() == 0 || a.validation.rows() == 0) {
        throw Error(ErrorKind::split, p.id + ": training span too short for a validation split");
    }
    return a;
}

DatedSeries head(const DatedSeries& s, std::size_t n)
{
    DatedSeries out = s;
    out.values.resize(n);
    return out;
}

std::vector<double> tail_values(const DatedSeries& s, std::size_t from)
{
    std::vector<double> out;
    for (std::size_t i = from; i < s.size(); ++i) out.push_back(*s.values[i]);
    return out;
}

std::vector<double> reseason(const std::vector<double>& v, const SeasonalIndex& idx, Date first)
{
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * idx.at(first + std::int64_t(i));
    return out;
}

struct SeriesContext {
    const PreparedSeries* prepared = nullptr;
    std::size_t tau = 1, m = 1;
    std::map<bool, ArmData> arms;
};

json arima_hyper_or_throw(const ModelSpec& spec)
{
    const auto& h = spec.hyper;
    return {h.at("p"), h.at("d"), h.at("q")};
}

/// Fits ARIMA on the deseasonalized values before the validation window and
/// scores its forecast of that window in currency units.
CandidateScore score_arima(const PreparedSeries& p, const ModelSpec& spec, std::size_t horizon, ForecastMode mode)
{
    const auto hp = arima_hyper_or_throw(spec);
    const std::size_t n = p.train_length;
    if (n <= horizon) throw Error(ErrorKind::split, p.id + ": training span too short for a validation split");
    const auto des = p.deseasonalized.dense();
    const std::span<const double> fit_part(des.data(), n - horizon);
    const auto model = ArimaModel::fit(fit_part, hp[0].get<std::size_t>(), hp[1].get<std::size_t>(),
                                       hp[2].get<std::size_t>());
    const std::span<const double> window(des.data() + (n - horizon), horizon);
    const auto pred = mode == ForecastMode::recursive ? model.forecast(fit_part, horizon)
                                                      : model.forecast_one_step(fit_part, window);
    const Date first = p.imputed.date_at(n - horizon);
    const auto restored = reseason(pred, p.inverses.season, first);
    const auto raw = p.imputed.dense();
    const std::span<const double> actual(raw.data() + (n - horizon), horizon);
    for (double v : restored) {
        if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "arima: non-finite validation forecast");
    }
    return {smape(actual, restored), model.n_params(), json::object()};
}

CandidateScore score_candidate(const SeriesContext& ctx, bool exo, const ModelSpec& spec, const RunConfig& cfg)
{
    if (spec.family == Family::arima) {
        return score_arima(*ctx.prepared, spec, cfg.horizon, cfg.forecast_mode);
    }
    const auto& a = ctx.arms.at(exo);
    const Inverses inv = ctx.prepared->inverses;
    Validation v{&a.validation, [inv](const Eigen::VectorXd& s, std::span<const Date> d) {
                      return restore_values(inv, s, d);
                  }};
    const FittedModel model = fit_model(spec, a.fit, v);
    return {v.smape_of(model.predict(a.validation)), model.n_params(), model.info()};
}

/// Refits `spec` on the full training span, forecasts the test horizon and
/// writes trace and model files.
json finish_job(const SeriesContext& ctx, bool exo, const ModelSpec& spec, const RunConfig& cfg,
                const fs::path& out_dir)
{
    const PreparedSeries& p = *ctx.prepared;
    const std::string sid = path_safe(p.id);
    const std::string name = trace_name(spec.family, exo);
    ForecastTrace trace;
    json model_doc;
    const std::size_t n = p.train_length;
    const std::size_t h = cfg.horizon;
    if (spec.family == Family::arima) {
        const auto hp = arima_hyper_or_throw(spec);
        const auto des = p.deseasonalized.dense();
        const std::span<const double> train(des.data(), n);
        const auto model = ArimaModel::fit(train, hp[0].get<std::size_t>(), hp[1].get<std::size_t>(),
                                           hp[2].get<std::size_t>());
        const std::span<const double> future(des.data() + n, h);
        const auto pred = cfg.forecast_mode == ForecastMode::recursive ? model.forecast(train, h)
                                                                        : model.forecast_one_step(train, future);
        const Date first = p.imputed.date_at(n);
        trace.mode = cfg.forecast_mode;
        trace.predicted = reseason(pred, p.inverses.season, first);
        for (std::size_t i = 0; i < h; ++i) trace.dates.push_back(first + std::int64_t(i));
        for (double v : trace.predicted) {
            if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "arima: non-finite forecast");
        }
        model_doc = model.to_json(spec);
    } else {
        const auto& a = ctx.arms.at(exo);
        const FittedModel model = fit_model(spec, a.train);
        const auto future = tail_values(p.scaled, n);
        trace = forecast_horizon(model, head(p.scaled, n), ctx.tau, ctx.m, h, cfg.forecast_mode, p.inverses, &future);
        model_doc = model.to_json();
    }
    trace.actual = p.test_actual();

    const fs::path trace_rel = fs::path("forecasts") / sid / (name + ".csv");
    const fs::path model_rel = fs::path("models") / sid / (name + ".json");
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    write_text(out_dir / trace_rel, csv.str());
    write_json(out_dir / model_rel, model_doc);
    return {{"trace", trace_rel.generic_string()}, {"model", model_rel.generic_string()}};
}

// ---------------------------------------------------------------- analysis documents

json adf_json(const ADFResult& r)
{
    return {{"statistic", r.statistic},
            {"critical_values", {{"1%", r.critical_1}, {"5%", r.critical_5}, {"10%", r.critical_10}}},
            {"lags_used", r.lags_used},
            {"n_obs", r.n_obs},
            {"is_stationary", r.is_stationary}};
}

std::string cao_csv(const CaoCurve& c)
{
    std::string s = "dimension,e1,e2\n";
    for (std::size_t d = 0; d < c.e1.size(); ++d) {
        s += std::to_string(d + 1) + "," + format_double(c.e1[d]) + "," +
             (d < c.e2.size() ? format_double(c.e2[d]) : std::string()) + "\n";
    }
    return s;
}

std::string divergence_csv(const DivergenceCurve& c)
{
    std::string s = "step,mean_log_divergence\n";
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
        s += std::to_string(c.steps[i]) + "," + format_double(c.mean_log_divergence[i]) + "\n";
    }
    return s;
}

struct AnalysisOutcome {
    std::vector<PreparedSeries> prepared;
    std::vector<SeriesAnalysis> analyses;
    std::vector<std::pair<std::string, std::size_t>> filtered;
    std::vector<std::pair<std::string, std::string>> failed;
};

AnalysisOutcome run_analysis(const RunConfig& cfg)
{
    LoadedPanel panel = load_and_impute(cfg);
    const std::size_t n = panel.imputed.size();
    std::vector<std::optional<PreparedSeries>> prepared(n);
    std::vector<std::optional<SeriesAnalysis>> analyses(n);
    std::vector<std::string> errors(n);
    const auto count = std::ptrdiff_t(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto k = std::size_t(i);
        try {
            prepared[k] = prepare_series(panel.imputed[k], cfg.horizon);
            analyses[k] = analyze_series(*prepared[k], panel.imputation[k], cfg);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    AnalysisOutcome out;
    out.filtered = panel.filtered;
    for (std::size_t k = 0; k < n; ++k) {
        if (analyses[k]) {
            out.prepared.push_back(std::move(*prepared[k]));
            out.analyses.push_back(std::move(*analyses[k]));
        } else {
            out.failed.emplace_back(panel.imputed[k].id, errors[k]);
        }
    }
    return out;
}

void write_analysis(const RunConfig& cfg, const AnalysisOutcome& a)
{
    const fs::path dir = cfg.output_dir / "analysis";
    json retained = json::array();
    for (const auto& s : a.analyses) {
        const std::string sid = path_safe(s.id);
        write_json(dir / (sid + ".json"), s.to_json());
        write_text(dir / (sid + "_cao.csv"), cao_csv(s.cao));
        write_text(dir / (sid + "_divergence.csv"), divergence_csv(s.lyapunov.curve));
        retained.push_back({{"id", s.id}, {"document", sid + ".json"}});
    }
    json filtered = json::array(), failed = json::array();
    for (const auto& [id, missing] : a.filtered) filtered.push_back({{"id", id}, {"missing", missing}});
    for (const auto& [id, err] : a.failed) failed.push_back({{"id", id}, {"error", err}});
    write_json(dir / "summary.json", {{"retained", retained},
                                      {"filtered", filtered},
                                      {"failed", failed},
                                      {"missing_threshold", cfg.missing_threshold}});
    std::cerr << "analyze: " << a.analyses.size() << " series analysed, " << a.filtered.size() << " filtered, "
              << a.failed.size() << " failed\n";
}

// ---------------------------------------------------------------- evaluation helpers

struct TTestRow {
    bool exogenous;
    std::string a, b;
    std::size_t n;
    TTestResult result;
};

std::vector<TTestRow> top_three_tests(const EvaluationReport& report, TTestMode mode)
{
    std::vector<TTestRow> rows;
    for (bool exo : {false, true}) {
        std::vector<const GroupAggregate*> groups;
        for (const auto& g : report.aggregates) {
            if (g.exogenous == exo) groups.push_back(&g);
        }
        std::stable_sort(groups.begin(), groups.end(), [](const GroupAggregate* x, const GroupAggregate* y) {
            return x->smape.mean < y->smape.mean;
        });
        if (groups.size() > 3) groups.resize(3);
        for (std::size_t i = 0; i < groups.size(); ++i) {
            for (std::size_t j = i + 1; j < groups.size(); ++j) {
                std::map<std::string, double> sa, sb;
                for (const auto& r : report.records) {
                    if (r.exogenous != exo) continue;
                    if (r.model == groups[i]->model) sa[r.series_id] = r.smape;
                    if (r.model == groups[j]->model) sb[r.series_id] = r.smape;
                }
                std::vector<double> va, vb;
                for (const auto& [id, v] : sa) {
                    if (auto it = sb.find(id); it != sb.end()) {
                        va.push_back(v);
                        vb.push_back(it->second);
                    }
                }
                if (va.size() < 2) continue;
                rows.push_back({exo, groups[i]->model, groups[j]->model, va.size(), paired_t_test(va, vb, mode)});
            }
        }
    }
    return rows;
}

} // namespace

// ---------------------------------------------------------------- config

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir)
{
    if (!j.is_object()) throw Error(ErrorKind::config, "config must be an object");
    static const std::set<std::string> known = {
        "schema_version", "input_path",  "output_dir",     "horizon",       "missing_threshold", "lag_method",
        "max_embedding",  "fixed_embedding", "families",   "use_exogenous", "forecast_mode",     "base_seed",
        "grids",          "impute_scope", "ttest_mode",    "global_tuning", "threads",           "synth"};
    for (const auto& [k, _] : j.items()) {
        if (!known.count(k)) throw Error(ErrorKind::config, "unknown config key '" + k + "'");
    }
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
        j.at("schema_version").get<int>() != kSchemaVersion) {
        throw Error(ErrorKind::config, "config schema_version must be " + std::to_string(kSchemaVersion));
    }
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };

    RunConfig c;
    if (!j.contains("input_path")) throw Error(ErrorKind::config, "config needs input_path");
    c.input_path = resolve(get_as<std::string>(j, "input_path"));
    c.output_dir = resolve(j.contains("output_dir") ? get_as<std::string>(j, "output_dir") : std::string("out"));
    if (j.contains("horizon")) c.horizon = get_count(j, "horizon");
    if (c.horizon < 1) throw Error(ErrorKind::config, "horizon must be at least 1");
    if (j.contains("missing_threshold")) c.missing_threshold = get_count(j, "missing_threshold");
    if (j.contains("lag_method")) c.lag_method = parse_lag_method(get_as<std::string>(j, "lag_method"));
    if (j.contains("max_embedding")) c.max_embedding = get_count(j, "max_embedding");
    if (c.max_embedding < 2) throw Error(ErrorKind::config, "max_embedding must be at least 2");
    if (j.contains("fixed_embedding") && !j.at("fixed_embedding").is_null()) {
        const auto& fe = j.at("fixed_embedding");
        if (!fe.is_object() || fe.size() != 2 || !fe.contains("tau") || !fe.contains("m")) {
            throw Error(ErrorKind::config, "fixed_embedding must be {\"tau\": n, \"m\": n}");
        }
        c.fixed_embedding = std::make_pair(get_count(fe, "tau"), get_count(fe, "m"));
        if (c.fixed_embedding->first < 1 || c.fixed_embedding->second < 1) {
            throw Error(ErrorKind::config, "fixed_embedding values must be at least 1");
        }
    }
    if (j.contains("families")) {
        c.families.clear();
        const auto& f = j.at("families");
        if (!f.is_array()) throw Error(ErrorKind::config, "families must be a list");
        for (const auto& name : f) {
            if (!name.is_string()) throw Error(ErrorKind::config, "family names must be strings");
            const Family fam = parse_family(name.get<std::string>());
            if (std::find(c.families.begin(), c.families.end(), fam) == c.families.end()) c.families.push_back(fam);
        }
    }
    if (c.families.empty()) throw Error(ErrorKind::config, "families must not be empty");
    if (j.contains("use_exogenous")) c.use_exogenous = parse_arms(j.at("use_exogenous"));
    if (j.contains("forecast_mode")) c.forecast_mode = parse_forecast_mode(get_as<std::string>(j, "forecast_mode"));
    if (j.contains("base_seed")) c.base_seed = get_as<std::uint64_t>(j, "base_seed");
    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        if (!g.is_object()) throw Error(ErrorKind::config, "grids must be an object keyed by family");
        for (const auto& [name, overrides] : g.items()) {
            const Family fam = parse_family(name);
            grid_from_json(fam, overrides);
            c.grids[fam] = overrides;
        }
    }
    if (j.contains("impute_scope")) {
        const auto s = get_as<std::string>(j, "impute_scope");
        if (s == "per_series") c.impute_scope = ImputeScope::per_series;
        else if (s == "panel") c.impute_scope = ImputeScope::panel;
        else throw Error(ErrorKind::config, "impute_scope must be per_series or panel");
    }
    if (j.contains("ttest_mode")) c.ttest_mode = parse_ttest_mode(get_as<std::string>(j, "ttest_mode"));
    if (j.contains("global_tuning")) c.global_tuning = get_as<bool>(j, "global_tuning");
    if (j.contains("threads")) c.threads = int(get_count(j, "threads"));
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        if (!s.is_array()) throw Error(ErrorKind::config, "synth must be a list of generator specs");
        for (json entry : s) {
            SynthEntry e;
            if (entry.is_object() && entry.contains("copies")) {
                e.copies = get_count(entry, "copies");
                if (e.copies < 1) throw Error(ErrorKind::config, "synth copies must be at least 1");
                entry.erase("copies");
            }
            e.spec = GeneratorSpec::from_json(entry);
            c.synth.push_back(std::move(e));
        }
    }
    return c;
}

json RunConfig::to_json() const
{
    json fams = json::array();
    for (Family f : families) fams.push_back(to_string(f));
    json grid_json = json::object();
    for (const auto& [f, g] : grids) grid_json[to_string(f)] = g;
    json synth_json = json::array();
    for (const auto& e : synth) {
        json s = e.spec.to_json();
        s["copies"] = e.copies;
        synth_json.push_back(s);
    }
    return {{"schema_version", kSchemaVersion},
            {"input_file", input_path.filename().string()},
            {"horizon", horizon},
            {"missing_threshold", missing_threshold},
            {"lag_method", to_string(lag_method)},
            {"max_embedding", max_embedding},
            {"fixed_embedding", fixed_embedding ? json{{"tau", fixed_embedding->first}, {"m", fixed_embedding->second}}
                                                : json(nullptr)},
            {"families", fams},
            {"use_exogenous", arms_string(use_exogenous)},
            {"forecast_mode", to_string(forecast_mode)},
            {"base_seed", base_seed},
            {"grids", grid_json},
            {"impute_scope", impute_scope == ImputeScope::panel ? "panel" : "per_series"},
            {"ttest_mode", to_string(ttest_mode)},
            {"global_tuning", global_tuning},
            {"synth", synth_json}};
}

RunConfig load_config(const fs::path& path)
{
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::config, path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::config, e.what());
    }
    return RunConfig::from_json(j, fs::absolute(path).parent_path());
}

std::vector<bool> arms(ExogenousArms a)
{
    switch (a) {
    case ExogenousArms::without: return {false};
    case ExogenousArms::with: return {true};
    case ExogenousArms::both: return {false, true};
    }
    return {false, true};
}

const char* arm_name(bool exogenous)
{
    return exogenous ? "exogenous" : "plain";
}

// ---------------------------------------------------------------- series preparation

std::vector<double> PreparedSeries::test_actual() const
{
    return tail_values(imputed, train_length);
}

std::vector<double> PreparedSeries::train_raw() const
{
    return head(imputed, train_length).dense();
}

PreparedSeries prepare_series(const DatedSeries& imputed, std::size_t horizon)
{
    auto [train, test] = split_train_test(imputed, horizon);
    PreparedSeries p;
    p.id = imputed.id;
    p.imputed = imputed;
    p.train_length = train.size();
    p.inverses.season = fit_seasonal_index(train);
    p.deseasonalized = deseasonalize(imputed, p.inverses.season);
    const auto des_train = head(p.deseasonalized, p.train_length).dense();
    p.inverses.scaler = scaler_fit(des_train);
    p.scaled = p.deseasonalized;
    for (auto& v : p.scaled.values) v = scaler_transform(*v, p.inverses.scaler);
    return p;
}

SeriesAnalysis analyze_series(const PreparedSeries& p, const ImputationSummary& imputation, const RunConfig& cfg)
{
    SeriesAnalysis a;
    a.id = p.id;
    a.imputation = imputation;
    a.train_start = p.imputed.start;
    a.train_end = p.train_end();
    a.season = p.inverses.season;
    const auto raw = p.train_raw();
    try {
        a.adf = adf_test(raw);
    } catch (const Error& e) {
        a.adf_error = e.what();
    }
    const auto des = head(p.deseasonalized, p.train_length).dense();
    a.tau = select_lag(des, cfg.lag_method);
    CaoOptions co;
    co.max_dim = cfg.max_embedding;
    a.cao = cao_min_embedding(des, a.tau, co);
    LyapunovOptions lo;
    lo.tau = a.tau;
    lo.m = a.cao.m_min;
    a.lyapunov = lyapunov_rosenstein(des, lo);
    a.profile = {a.tau, a.cao.m_min, a.lyapunov.lambda, a.lyapunov.is_chaotic};
    a.model_tau = cfg.fixed_embedding ? cfg.fixed_embedding->first : a.tau;
    a.model_m = cfg.fixed_embedding ? cfg.fixed_embedding->second : a.cao.m_min;
    return a;
}

json SeriesAnalysis::to_json() const
{
    const auto& c = lyapunov.curve;
    json season_json = {{"factors", json::array()}, {"replaced", json::array()}};
    for (std::size_t d = 0; d < 7; ++d) {
        season_json["factors"].push_back(season.factor[d]);
        season_json["replaced"].push_back(season.replaced[d]);
    }
    return {{"series_id", id},
            {"train", {{"start", train_start.iso()}, {"end", train_end.iso()}}},
            {"imputation", {{"missing", imputation.missing}, {"fill_value", imputation.fill_value}}},
            {"adf", adf ? adf_json(*adf) : json{{"error", adf_error}}},
            {"seasonal_index", season_json},
            {"tau", tau},
            {"cao",
             {{"e1", cao.e1}, {"e2", cao.e2}, {"m_min", cao.m_min}, {"saturated", cao.saturated},
              {"stochastic", cao.stochastic}}},
            {"divergence",
             {{"steps", c.steps}, {"mean_log_divergence", c.mean_log_divergence}, {"fit_range", {c.fit_range.first, c.fit_range.second}},
              {"slope", c.slope}, {"intercept", c.intercept}, {"r_squared", c.r_squared}, {"pairs", c.pairs},
              {"theiler", lyapunov.theiler}}},
            {"profile",
             {{"tau", profile.tau}, {"m", profile.m}, {"lambda", profile.lambda}, {"is_chaotic", profile.is_chaotic}}},
            {"embedding", {{"tau", model_tau}, {"m", model_m}}}};
}

LoadedPanel load_and_impute(const RunConfig& cfg)
{
    const PanelDataset all = load_panel_file(cfg.input_path.string());
    const PanelDataset kept = filter_by_missing(all, cfg.missing_threshold);
    LoadedPanel out;
    for (const auto& [id, s] : all.series) {
        if (!kept.series.count(id)) out.filtered.emplace_back(id, s.missing_count());
    }
    if (kept.empty()) {
        throw Error(ErrorKind::empty_panel, "no series left after filtering at " +
                                                std::to_string(cfg.missing_threshold) + " missing entries");
    }
    const double panel_fill = cfg.impute_scope == ImputeScope::panel ? panel_median(kept) : 0.0;
    for (const auto& [id, s] : kept.series) {
        ImputationSummary sum;
        sum.missing = s.missing_count();
        std::vector<double> present;
        for (const auto& v : s.values)
            if (v) present.push_back(*v);
        if (cfg.impute_scope == ImputeScope::panel) {
            sum.fill_value = panel_fill;
            out.imputed.push_back(impute_with(s, panel_fill));
        } else {
            out.imputed.push_back(impute_median(s));
            sum.fill_value = present.empty() ? 0.0 : median(present);
        }
        out.imputation.push_back(sum);
    }
    return out;
}

// ---------------------------------------------------------------- verbs

void cmd_synth(const RunConfig& cfg)
{
    if (cfg.synth.empty()) {
        throw Error(ErrorKind::config, "config has no synth section");
    }
    std::vector<DatedSeries> series;
    for (const auto& e : cfg.synth) {
        if (e.copies == 1) {
            series.push_back(generate(e.spec));
            continue;
        }
        for (std::size_t k = 1; k <= e.copies; ++k) {
            GeneratorSpec s = e.spec;
            char suffix[16];
            std::snprintf(suffix, sizeof suffix, "_%02zu", k);
            s.id += suffix;
            s.seed = derive_seed(e.spec.seed, {k});
            series.push_back(generate(s));
        }
    }
    std::ostringstream csv;
    write_generated_csv(csv, series);
    write_text(cfg.input_path, csv.str());
    std::cerr << "synth: wrote " << series.size() << " series to " << cfg.input_path.string() << "\n";
}

void cmd_analyze(const RunConfig& cfg)
{
    write_analysis(cfg, run_analysis(cfg));
}

void cmd_forecast(const RunConfig& cfg)
{
    const AnalysisOutcome analysis = run_analysis(cfg);
    if (!fs::exists(cfg.output_dir / "analysis" / "summary.json")) {
        write_analysis(cfg, analysis);
    }
    if (analysis.analyses.empty()) {
        throw Error(ErrorKind::empty_panel, "no series survived analysis");
    }

    std::map<Family, HyperGrid> grids;
    for (Family f : cfg.families) {
        grids[f] = grid_from_json(f, cfg.grids.count(f) ? cfg.grids.at(f) : json(nullptr));
    }

    // Per-series contexts; a series whose supervised sets cannot be built fails all its jobs.
    const std::size_t n_series = analysis.analyses.size();
    std::vector<SeriesContext> contexts(n_series);
    std::vector<std::string> context_error(n_series);
    for (std::size_t s = 0; s < n_series; ++s) {
        auto& ctx = contexts[s];
        ctx.prepared = &analysis.prepared[s];
        ctx.tau = analysis.analyses[s].model_tau;
        ctx.m = analysis.analyses[s].model_m;
        try {
            for (bool exo : arms(cfg.use_exogenous)) {
                ctx.arms.emplace(exo, arm_data(*ctx.prepared, ctx.tau, ctx.m, exo, cfg.horizon));
            }
        } catch (const std::exception& e) {
            context_error[s] = e.what();
        }
    }

    struct Job {
        std::size_t series;
        Family family;
        bool exo;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < n_series; ++s)
        for (Family f : cfg.families)
            for (bool exo : arms(cfg.use_exogenous)) jobs.push_back({s, f, exo});

    std::vector<json> entries(jobs.size());
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        entries[j] = {{"series_id", analysis.analyses[jobs[j].series].id},
                      {"family", to_string(jobs[j].family)},
                      {"exogenous", jobs[j].exo}};
    }

    // Global tuning: one search per (family, arm) scored by the mean over series.
    std::map<std::pair<Family, bool>, SearchResult> global;
    if (cfg.global_tuning) {
        for (Family f : cfg.families) {
            for (bool exo : arms(cfg.use_exogenous)) {
                const auto eval = [&](const ModelSpec& spec) {
                    CandidateScore total;
                    total.info = json{{"per_series", json::object()}};
                    std::size_t used = 0;
                    for (std::size_t s = 0; s < n_series; ++s) {
                        if (!context_error[s].empty()) continue;
                        const auto sc = score_candidate(contexts[s], exo, spec, cfg);
                        total.val_smape += sc.val_smape;
                        total.n_params = std::max(total.n_params, sc.n_params);
                        total.info["per_series"][contexts[s].prepared->id] = sc.info;
                        ++used;
                    }
                    if (used == 0) throw Error(ErrorKind::fit, "no usable series");
                    total.val_smape /= double(used);
                    return total;
                };
                try {
                    auto result = search(f, grids.at(f), derive_seed(cfg.base_seed, {family_index(f)}), eval);
                    std::ostringstream lb;
                    write_leaderboard_csv(lb, result);
                    write_text(cfg.output_dir / "leaderboards" / "global" / (trace_name(f, exo) + ".csv"), lb.str());
                    global.emplace(std::make_pair(f, exo), std::move(result));
                } catch (const std::exception& e) {
                    for (std::size_t j = 0; j < jobs.size(); ++j) {
                        if (jobs[j].family == f && jobs[j].exo == exo) entries[j]["error"] = e.what();
                    }
                }
            }
        }
    }

    const auto n_jobs = std::ptrdiff_t(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t jj = 0; jj < n_jobs; ++jj) {
        const Job& job = jobs[std::size_t(jj)];
        json& entry = entries[std::size_t(jj)];
        if (entry.contains("error")) continue;
        try {
            if (!context_error[job.series].empty()) throw Error(ErrorKind::split, context_error[job.series]);
            const SeriesContext& ctx = contexts[job.series];
            const std::string& id = ctx.prepared->id;
            Candidate winner;
            if (cfg.global_tuning) {
                winner = global.at({job.family, job.exo}).winner();
                if (winner.score && winner.score->info.contains("per_series")) {
                    winner.score->info = winner.score->info["per_series"].value(id, json::object());
                }
            } else {
                const auto result =
                    search(job.family, grids.at(job.family),
                           derive_seed(cfg.base_seed, {hash_string(id), family_index(job.family)}),
                           [&](const ModelSpec& spec) { return score_candidate(ctx, job.exo, spec, cfg); });
                std::ostringstream lb;
                write_leaderboard_csv(lb, result);
                const fs::path lb_rel = fs::path("leaderboards") / path_safe(id) / (trace_name(job.family, job.exo) + ".csv");
                write_text(cfg.output_dir / lb_rel, lb.str());
                entry["leaderboard"] = lb_rel.generic_string();
                winner = result.winner();
            }
            const ModelSpec spec = refit_spec(winner);
            entry.update(finish_job(ctx, job.exo, spec, cfg, cfg.output_dir));
            entry["spec"] = spec.to_json();
            entry["val_smape"] = winner.score->val_smape;
        } catch (const std::exception& e) {
            entry["error"] = e.what();
        }
    }

    std::size_t ok = 0;
    json index = json::array();
    for (auto& e : entries) {
        e["status"] = e.contains("error") ? "failed" : "ok";
        if (!e.contains("error")) ++ok;
        index.push_back(e);
    }
    write_json(cfg.output_dir / "forecasts" / "index.json", {{"horizon", cfg.horizon},
                                                              {"forecast_mode", to_string(cfg.forecast_mode)},
                                                              {"global_tuning", cfg.global_tuning},
                                                              {"entries", index}});
    std::cerr << "forecast: " << ok << " of " << entries.size() << " combinations succeeded\n";
    if (ok == 0) {
        throw Error(ErrorKind::fit, "every (series, family, arm) combination failed");
    }
}

void cmd_evaluate(const RunConfig& cfg)
{
    const fs::path index_path = cfg.output_dir / "forecasts" / "index.json";
    if (!fs::exists(index_path)) {
        throw Error(ErrorKind::dependency, "missing " + index_path.string() + " (run forecast first)");
    }
    const json index = read_json(index_path);
    std::vector<MetricRecord> records;
    json skipped = json::array();
    for (const auto& e : index.at("entries")) {
        if (e.at("status") != "ok") continue;
        const fs::path trace_path = cfg.output_dir / e.at("trace").get<std::string>();
        std::ifstream in(trace_path, std::ios::binary);
        if (!in) throw Error(ErrorKind::dependency, "missing trace " + trace_path.string());
        const ForecastTrace trace = read_trace_csv(in);
        if (!trace.actual) {
            throw Error(ErrorKind::evaluation, "trace " + e.at("trace").get<std::string>() + " has no actuals");
        }
        MetricRecord r;
        r.series_id = e.at("series_id").get<std::string>();
        r.model = e.at("family").get<std::string>();
        r.exogenous = e.at("exogenous").get<bool>();
        r.smape = smape(*trace.actual, trace.predicted);
        r.dstat = dstat(*trace.actual, trace.predicted);
        try {
            r.theils_u = theils_u(*trace.actual, trace.predicted);
        } catch (const Error& err) {
            skipped.push_back({{"trace", e.at("trace")}, {"metric", "theils_u"}, {"reason", err.what()}});
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) {
        throw Error(ErrorKind::evaluation, "no successful forecasts to evaluate");
    }
    const EvaluationReport report = aggregate(records);
    const auto tests = top_three_tests(report, cfg.ttest_mode);

    const fs::path dir = cfg.output_dir / "evaluation";
    std::ostringstream agg, rec, tt;
    write_aggregate_csv(agg, report);
    write_records_csv(rec, report.records);
    tt << "exogenous,model_a,model_b,n,t,p,df,mode,degenerate,significant_0_05\n";
    json tests_json = json::array();
    for (const auto& t : tests) {
        const auto& r = t.result;
        tt << (t.exogenous ? "true" : "false") << ',' << t.a << ',' << t.b << ',' << t.n << ','
           << format_double(r.t) << ',' << format_double(r.p) << ',' << r.df << ',' << to_string(r.mode) << ','
           << (r.degenerate ? "true" : "false") << ',' << (r.p < 0.05 ? "true" : "false") << '\n';
        json row = to_json(r);
        row["exogenous"] = t.exogenous;
        row["model_a"] = t.a;
        row["model_b"] = t.b;
        row["n"] = t.n;
        row["significant_0_05"] = r.p < 0.05;
        tests_json.push_back(row);
    }
    write_text(dir / "aggregate.csv", agg.str());
    write_text(dir / "records.csv", rec.str());
    write_text(dir / "ttests.csv", tt.str());
    write_json(dir / "evaluation.json", {{"report", to_json(report)},
                                         {"ttests", tests_json},
                                         {"ttest_mode", to_string(cfg.ttest_mode)},
                                         {"skipped_metrics", skipped}});
    std::cerr << "evaluate: " << records.size() << " traces scored\n";
}

void cmd_report(const RunConfig& cfg)
{
    const fs::path out = cfg.output_dir;
    const fs::path summary_path = out / "analysis" / "summary.json";
    const fs::path index_path = out / "forecasts" / "index.json";
    const fs::path eval_path = out / "evaluation" / "evaluation.json";
    std::vector<std::string> absent;
    for (const auto& p : {summary_path, index_path, eval_path}) {
        if (!fs::exists(p)) absent.push_back(p.string());
    }
    json summary, index;
    if (absent.empty()) {
        summary = read_json(summary_path);
        index = read_json(index_path);
        for (const auto& r : summary.at("retained")) {
            const fs::path p = out / "analysis" / r.at("document").get<std::string>();
            if (!fs::exists(p)) absent.push_back(p.string());
        }
        for (const auto& e : index.at("entries")) {
            if (e.contains("leaderboard") && !fs::exists(out / e.at("leaderboard").get<std::string>())) {
                absent.push_back((out / e.at("leaderboard").get<std::string>()).string());
            }
        }
    }
    if (!absent.empty()) {
        std::string list;
        for (const auto& a : absent) list += "\n  " + a;
        throw Error(ErrorKind::dependency, "report inputs are missing:" + list);
    }
    const json evaluation = read_json(eval_path);

    json series = json::array();
    std::string divergence = "series_id,step,mean_log_divergence\n";
    for (const auto& r : summary.at("retained")) {
        const json doc = read_json(out / "analysis" / r.at("document").get<std::string>());
        series.push_back({{"series_id", doc.at("series_id")},
                          {"profile", doc.at("profile")},
                          {"embedding", doc.at("embedding")},
                          {"adf", doc.at("adf")},
                          {"cao_saturated", doc.at("cao").at("saturated")},
                          {"seasonal_index", doc.at("seasonal_index").at("factors")}});
        const auto& d = doc.at("divergence");
        for (std::size_t i = 0; i < d.at("steps").size(); ++i) {
            const auto& v = d.at("mean_log_divergence")[i];
            divergence += csv_quote(doc.at("series_id").get<std::string>()) + "," + d.at("steps")[i].dump() + "," +
                          (v.is_number() ? format_double(v.get<double>()) : std::string()) + "\n";
        }
    }

    json leaderboards = json::array();
    for (const auto& e : index.at("entries")) {
        json row = {{"series_id", e.at("series_id")},
                    {"family", e.at("family")},
                    {"exogenous", e.at("exogenous")},
                    {"status", e.at("status")}};
        if (e.at("status") == "ok") {
            row["winner"] = e.at("spec");
            row["val_smape"] = e.at("val_smape");
        } else {
            row["error"] = e.at("error");
        }
        leaderboards.push_back(row);
    }

    const auto& rep = evaluation.at("report");
    std::string box = "model,exogenous,count,min,q1,median,q3,max,iqr\n";
    for (const auto& g : rep.at("aggregates")) {
        const auto& b = g.at("smape_boxplot");
        box += g.at("model").get<std::string>() + "," + (g.at("exogenous").get<bool>() ? "true" : "false") + "," +
               g.at("smape").at("count").dump();
        for (const char* k : {"min", "q1", "median", "q3", "max", "iqr"}) box += "," + format_double(b.at(k).get<double>());
        box += "\n";
    }
    std::string per_series = "series_id,model,exogenous,smape\n";
    for (const auto& r : rep.at("records")) {
        per_series += csv_quote(r.at("series_id").get<std::string>()) + "," + r.at("model").get<std::string>() + "," +
                      (r.at("exogenous").get<bool>() ? "true" : "false") + "," +
                      format_double(r.at("smape").get<double>()) + "\n";
    }

    const json report = {{"tool", {{"name", "atmcast"}, {"version", kToolVersion}}},
                         {"config", cfg.to_json()},
                         {"analysis",
                          {{"series", series},
                           {"filtered", summary.at("filtered")},
                           {"failed", summary.at("failed")}}},
                         {"leaderboards", leaderboards},
                         {"evaluation", rep},
                         {"ttests", evaluation.at("ttests")},
                         {"ttest_mode", evaluation.at("ttest_mode")}};
    write_json(out / "report" / "report.json", report);
    write_text(out / "report" / "boxplot.csv", box);
    write_text(out / "report" / "divergence_curves.csv", divergence);
    write_text(out / "report" / "series_smape.csv", per_series);
    std::cerr << "report: wrote " << (out / "report" / "report.json").string() << "\n";
}

void cmd_run(const RunConfig& cfg)
{
    cmd_analyze(cfg);
    cmd_forecast(cfg);
    cmd_evaluate(cfg);
    cmd_report(cfg);
}

} // namespace atmcast
