#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atmcast/preprocess.hpp"
#include "atmcast/series.hpp"

namespace atmcast {

/// Lag coordinates (scaled units) followed by the nine calendar one-hots of the
/// target date when exogenous features are enabled.
struct SupervisedDataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> feature_names;
    std::vector<Date> target_dates;
    std::size_t lag_columns = 0;

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t exogenous_columns() const { return feature_names.size() - lag_columns; }
};

/// Column labels: `lag_<offset>` for each coordinate (offset in days before the
/// target, oldest first), then the calendar names.
std::vector<std::string> supervised_feature_names(std::size_t tau, std::size_t m, bool use_exogenous);

SupervisedDataset assemble_supervised(const DatedSeries& series, std::size_t tau, std::size_t m, bool use_exogenous);

/// Rows whose target date lies in [from, to].
SupervisedDataset select_rows(const SupervisedDataset& ds, Date from, Date to);

enum class ForecastMode { one_step, recursive };

const char* to_string(ForecastMode m);
ForecastMode parse_forecast_mode(const std::string& text);

struct ForecastTrace {
    std::vector<Date> dates;
    /// Currency units.
    std::vector<double> predicted;
    std::optional<std::vector<double>> actual;
    ForecastMode mode = ForecastMode::recursive;
};

struct Inverses {
    ScalerParams scaler;
    SeasonalIndex season;
};

class FittedModel;

/// Multi-step forecast from the end of `history` (scaled, deseasonalized, complete).
/// In one_step mode `future_scaled` supplies the observed values that feed the
/// lag window; calendar features always come from the true future dates.
ForecastTrace forecast_horizon(const FittedModel& model, const DatedSeries& history, std::size_t tau, std::size_t m,
                               std::size_t horizon, ForecastMode mode, const Inverses& inverses,
                               const std::vector<double>* future_scaled = nullptr);

/// `date,predicted,actual`, actual blank when absent.
void write_trace_csv(std::ostream& out, const ForecastTrace& trace);
ForecastTrace read_trace_csv(std::istream& in, ForecastMode mode = ForecastMode::recursive);

} // namespace atmcast
