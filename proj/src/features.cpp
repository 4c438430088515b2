#include "atmcast/features.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "atmcast/chaos.hpp"
#include "atmcast/error.hpp"
#include "atmcast/models/model.hpp"

namespace atmcast {

std::vector<std::string> supervised_feature_names(std::size_t tau, std::size_t m, bool use_exogenous)
{
    std::vector<std::string> names;
    for (std::size_t k = 0; k < m; ++k) {
        names.push_back("lag_" + std::to_string(1 + (m - 1 - k) * tau));
    }
    if (use_exogenous) {
        names.insert(names.end(), kCalendarNames.begin(), kCalendarNames.end());
    }
    return names;
}

SupervisedDataset assemble_supervised(const DatedSeries& series, std::size_t tau, std::size_t m, bool use_exogenous)
{
    const auto values = series.dense();
    const auto emb = reconstruct_phase_space(values, tau, m);
    const std::size_t rows = static_cast<std::size_t>(emb.X.rows());
    const std::size_t cols = m + (use_exogenous ? kCalendarColumns : 0);
    const std::size_t offset = (m - 1) * tau + 1;

    SupervisedDataset ds;
    ds.X.resize(rows, cols);
    ds.X.leftCols(m) = emb.X;
    ds.y = emb.y;
    ds.lag_columns = m;
    ds.feature_names = supervised_feature_names(tau, m, use_exogenous);
    ds.target_dates.reserve(rows);
    double cal[kCalendarColumns];
    for (std::size_t i = 0; i < rows; ++i) {
        const Date target = series.date_at(i + offset);
        ds.target_dates.push_back(target);
        if (use_exogenous) {
            calendar_row(target, cal);
            for (std::size_t c = 0; c < kCalendarColumns; ++c) {
                ds.X(i, m + c) = cal[c];
            }
        }
    }
    return ds;
}

SupervisedDataset select_rows(const SupervisedDataset& ds, Date from, Date to)
{
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < ds.target_dates.size(); ++i) {
        if (ds.target_dates[i] >= from && ds.target_dates[i] <= to) {
            keep.push_back(static_cast<Eigen::Index>(i));
        }
    }
    SupervisedDataset out;
    out.feature_names = ds.feature_names;
    out.lag_columns = ds.lag_columns;
    out.X.resize(static_cast<Eigen::Index>(keep.size()), ds.X.cols());
    out.y.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.X.row(r) = ds.X.row(keep[r]);
        out.y(r) = ds.y(keep[r]);
        out.target_dates.push_back(ds.target_dates[keep[r]]);
    }
    return out;
}

const char* to_string(ForecastMode m)
{
    return m == ForecastMode::one_step ? "one_step" : "recursive";
}

ForecastMode parse_forecast_mode(const std::string& text)
{
    if (text == "one_step") return ForecastMode::one_step;
    if (text == "recursive") return ForecastMode::recursive;
    throw Error(ErrorKind::config, "unknown forecast mode '" + text + "'");
}

ForecastTrace forecast_horizon(const FittedModel& model, const DatedSeries& history, std::size_t tau, std::size_t m,
                               std::size_t horizon, ForecastMode mode, const Inverses& inverses,
                               const std::vector<double>* future_scaled)
{
    if (horizon == 0) {
        throw Error(ErrorKind::length, "forecast horizon must be at least 1");
    }
    if (mode == ForecastMode::one_step && (future_scaled == nullptr || future_scaled->size() < horizon)) {
        throw Error(ErrorKind::mode, "one_step forecasting needs observed values covering the horizon");
    }
    const std::size_t lag_count = model.feature_names().size();
    bool exogenous = false;
    if (lag_count == m + kCalendarColumns) {
        exogenous = true;
    } else if (lag_count != m) {
        throw Error(ErrorKind::shape, "model expects " + std::to_string(lag_count) + " features, embedding gives m=" +
                                          std::to_string(m));
    }
    if (model.feature_names() != supervised_feature_names(tau, m, exogenous)) {
        throw Error(ErrorKind::shape, "model feature names do not match the (tau, m) embedding");
    }
    std::vector<double> working = history.dense();
    const std::size_t span = (m - 1) * tau;
    if (working.size() < span + 1) {
        throw Error(ErrorKind::length, "history too short to form the first input row");
    }

    ForecastTrace trace;
    trace.mode = mode;
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(lag_count));
    double cal[kCalendarColumns];
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t len = working.size();
        const Date target = history.start + static_cast<std::int64_t>(len);
        for (std::size_t k = 0; k < m; ++k) {
            row(0, k) = working[len - 1 - (m - 1 - k) * tau];
        }
        if (exogenous) {
            calendar_row(target, cal);
            for (std::size_t c = 0; c < kCalendarColumns; ++c) {
                row(0, m + c) = cal[c];
            }
        }
        const double scaled = model.predict(row)(0);
        if (!std::isfinite(scaled)) {
            throw Error(ErrorKind::numeric, "non-finite prediction at forecast step " + std::to_string(h + 1));
        }
        working.push_back(mode == ForecastMode::recursive ? scaled : (*future_scaled)[h]);
        trace.dates.push_back(target);
        trace.predicted.push_back(scaler_inverse(scaled, inverses.scaler) * inverses.season.at(target));
    }
    return trace;
}

void write_trace_csv(std::ostream& out, const ForecastTrace& trace)
{
    out << "date,predicted,actual\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.dates.size(); ++i) {
        out << trace.dates[i].iso() << ',';
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, trace.predicted[i]);
        out.write(buf, p - buf);
        out << ',';
        if (trace.actual) {
            auto [q, ec2] = std::to_chars(buf, buf + sizeof buf, (*trace.actual)[i]);
            out.write(buf, q - buf);
        }
        out << '\n';
    }
}

ForecastTrace read_trace_csv(std::istream& in, ForecastMode mode)
{
    ForecastTrace trace;
    trace.mode = mode;
    std::string line;
    if (!std::getline(in, line) || (line != "date,predicted,actual" && line != "date,predicted,actual\r")) {
        throw Error(ErrorKind::parse, "trace CSV: bad header");
    }
    std::vector<double> actual;
    bool any_missing = false;
    std::size_t line_no = 1;
    auto parse_num = [&](std::string_view s, double& v) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
        if (text.empty()) continue;
        const auto c1 = text.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
        if (c2 == std::string_view::npos) {
            throw Error(ErrorKind::parse, "trace CSV line " + std::to_string(line_no) + ": expected 3 fields");
        }
        const auto date = Date::parse(text.substr(0, c1));
        double pred = 0.0;
        if (!date || !parse_num(text.substr(c1 + 1, c2 - c1 - 1), pred)) {
            throw Error(ErrorKind::parse, "trace CSV line " + std::to_string(line_no) + ": bad field");
        }
        trace.dates.push_back(*date);
        trace.predicted.push_back(pred);
        const auto rest = text.substr(c2 + 1);
        if (rest.empty()) {
            any_missing = true;
            actual.push_back(0.0);
        } else {
            double a = 0.0;
            if (!parse_num(rest, a)) {
                throw Error(ErrorKind::parse, "trace CSV line " + std::to_string(line_no) + ": bad actual");
            }
            actual.push_back(a);
        }
    }
    if (!any_missing && !actual.empty()) {
        trace.actual = std::move(actual);
    }
    return trace;
}

} // namespace atmcast
