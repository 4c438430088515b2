#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "atmcast/chaos.hpp"
#include "atmcast/evaluation.hpp"
#include "atmcast/features.hpp"
#include "atmcast/models/model.hpp"
#include "atmcast/preprocess.hpp"
#include "atmcast/series.hpp"
#include "atmcast/synthgen.hpp"

namespace atmcast {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExogenousArms { without, with, both };

struct SynthEntry {
    GeneratorSpec spec;
    /// Copies get ids `<id>_01`, `<id>_02`, ... and seeds derived from the spec seed.
    std::size_t copies = 1;
};

struct RunConfig {
    static constexpr int kSchemaVersion = 1;

    std::filesystem::path input_path;
    std::filesystem::path output_dir;
    std::size_t horizon = 30;
    std::size_t missing_threshold = 110;
    LagMethod lag_method = LagMethod::pacf_cutoff;
    std::size_t max_embedding = 12;
    /// (tau, m) used for modelling instead of the analysed values.
    std::optional<std::pair<std::size_t, std::size_t>> fixed_embedding;
    std::vector<Family> families = all_families();
    ExogenousArms use_exogenous = ExogenousArms::both;
    ForecastMode forecast_mode = ForecastMode::recursive;
    std::uint64_t base_seed = 0;
    std::map<Family, nlohmann::json> grids;
    ImputeScope impute_scope = ImputeScope::per_series;
    TTestMode ttest_mode = TTestMode::paired;
    /// One hyperparameter choice per (family, arm) shared by every series.
    bool global_tuning = false;
    int threads = 0;
    std::vector<SynthEntry> synth;

    /// Relative paths resolve against `base_dir`. Unknown keys raise a config error.
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    /// Normalised settings, without the output directory.
    nlohmann::json to_json() const;
};

RunConfig load_config(const std::filesystem::path& path);

std::vector<bool> arms(ExogenousArms a);
const char* arm_name(bool exogenous);

struct ImputationSummary {
    std::size_t missing = 0;
    double fill_value = 0.0;
};

struct SeriesAnalysis {
    std::string id;
    ImputationSummary imputation;
    Date train_start, train_end;
    std::optional<ADFResult> adf;
    std::string adf_error;
    SeasonalIndex season;
    std::size_t tau = 1;
    CaoCurve cao;
    LyapunovResult lyapunov;
    ChaosProfile profile;
    /// (tau, m) the models use: the profile's unless the config fixes them.
    std::size_t model_tau = 1, model_m = 1;

    nlohmann::json to_json() const;
};

/// Training span after imputation, deseasonalized, scaled, and the inverses.
struct PreparedSeries {
    std::string id;
    DatedSeries imputed;
    DatedSeries deseasonalized;
    DatedSeries scaled;
    std::size_t train_length = 0;
    Inverses inverses;

    Date train_end() const { return imputed.date_at(train_length - 1); }
    std::vector<double> test_actual() const;
    std::vector<double> train_raw() const;
};

PreparedSeries prepare_series(const DatedSeries& imputed, std::size_t horizon);
SeriesAnalysis analyze_series(const PreparedSeries& prepared, const ImputationSummary& imputation,
                              const RunConfig& cfg);

struct LoadedPanel {
    std::vector<DatedSeries> imputed;
    std::vector<ImputationSummary> imputation;
    std::vector<std::pair<std::string, std::size_t>> filtered;
};

LoadedPanel load_and_impute(const RunConfig& cfg);

// CLI verbs. Each writes under cfg.output_dir.
void cmd_synth(const RunConfig& cfg);
void cmd_analyze(const RunConfig& cfg);
void cmd_forecast(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);
void cmd_run(const RunConfig& cfg);

} // namespace atmcast
