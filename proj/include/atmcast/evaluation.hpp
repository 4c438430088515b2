#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace atmcast {

/// Percent; a pair with both values zero contributes 0.
double smape(std::span<const double> actual, std::span<const double> predicted);
/// Relative one-step errors against the naive no-change forecast.
double theils_u(std::span<const double> actual, std::span<const double> predicted);
/// Percent of steps whose direction of change is matched.
double dstat(std::span<const double> actual, std::span<const double> predicted);

enum class TTestMode { paired, paper_compat };

const char* to_string(TTestMode m);
TTestMode parse_ttest_mode(const std::string& text);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t df = 0;
    TTestMode mode = TTestMode::paired;
    /// Set when the differences have zero spread but nonzero mean: t is infinite and p is 0.
    bool degenerate = false;
};

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, TTestMode mode = TTestMode::paired);

struct MetricRecord {
    std::string series_id;
    std::string model;
    bool exogenous = false;
    double smape = 0.0;
    double dstat = 0.0;
    /// Absent when the actuals contain a zero in a denominator position or are constant.
    std::optional<double> theils_u;
};

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;
};

struct FiveNumber {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);
FiveNumber five_number(std::vector<double> values);
Summary summarize(std::span<const double> values);

struct GroupAggregate {
    std::string model;
    bool exogenous = false;
    Summary smape, dstat, theils_u;
    FiveNumber smape_box;
    std::vector<std::string> series_ids;
};

struct EvaluationReport {
    std::vector<MetricRecord> records;
    /// Ordered by (model, exogenous).
    std::vector<GroupAggregate> aggregates;
};

EvaluationReport aggregate(std::vector<MetricRecord> records);

/// One row per group with mean/median/std of each metric.
void write_aggregate_csv(std::ostream& out, const EvaluationReport& report);
void write_records_csv(std::ostream& out, const std::vector<MetricRecord>& records);
nlohmann::json to_json(const EvaluationReport& report);
nlohmann::json to_json(const TTestResult& r);

} // namespace atmcast
