#include "atmcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

#include "atmcast/error.hpp"
#include "atmcast/io_format.hpp"

namespace atmcast {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, std::size_t min_len, const char* what)
{
    if (a.size() != b.size()) {
        throw Error(ErrorKind::shape, std::string(what) + ": length mismatch " + std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()));
    }
    if (a.size() < min_len) {
        throw Error(ErrorKind::shape, std::string(what) + ": needs at least " + std::to_string(min_len) + " values");
    }
}

nlohmann::json summary_json(const Summary& s)
{
    return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"std", s.std}};
}

} // namespace

double smape(std::span<const double> actual, std::span<const double> predicted)
{
    require_same_length(actual, predicted, 1, "smape");
    double total = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        const double denom = (std::abs(predicted[t]) + std::abs(actual[t])) / 2.0;
        if (denom > 0.0) {
            total += std::abs(predicted[t] - actual[t]) / denom;
        }
    }
    return 100.0 * total / double(actual.size());
}

double theils_u(std::span<const double> actual, std::span<const double> predicted)
{
    require_same_length(actual, predicted, 2, "theils_u");
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t + 1 < actual.size(); ++t) {
        if (actual[t] == 0.0) {
            throw Error(ErrorKind::division_guard, "theils_u: actual value at position " + std::to_string(t) + " is zero");
        }
        const double e = (predicted[t + 1] - actual[t + 1]) / actual[t];
        const double n = (actual[t + 1] - actual[t]) / actual[t];
        num += e * e;
        den += n * n;
    }
    if (den == 0.0) {
        throw Error(ErrorKind::degenerate, "theils_u: actual series is constant");
    }
    return std::sqrt(num / den);
}

double dstat(std::span<const double> actual, std::span<const double> predicted)
{
    require_same_length(actual, predicted, 2, "dstat");
    std::size_t hits = 0;
    for (std::size_t i = 1; i < actual.size(); ++i) {
        if ((actual[i] - actual[i - 1]) * (predicted[i] - predicted[i - 1]) > 0.0) {
            ++hits;
        }
    }
    return 100.0 * double(hits) / double(actual.size() - 1);
}

const char* to_string(TTestMode m)
{
    return m == TTestMode::paired ? "paired" : "paper_compat";
}

TTestMode parse_ttest_mode(const std::string& text)
{
    if (text == "paired") return TTestMode::paired;
    if (text == "paper_compat") return TTestMode::paper_compat;
    throw Error(ErrorKind::config, "unknown t-test mode '" + text + "'");
}

double student_t_two_sided_p(double t, double df)
{
    if (std::isinf(t)) {
        return 0.0;
    }
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, TTestMode mode)
{
    require_same_length(a, b, 2, "paired_t_test");
    const std::size_t n = a.size();
    TTestResult r;
    r.mode = mode;

    double mean_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_diff += a[i] - b[i];
    mean_diff /= double(n);

    double se = 0.0;
    if (mode == TTestMode::paired) {
        r.df = n - 1;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a[i] - b[i] - mean_diff;
            ss += d * d;
        }
        se = std::sqrt(ss / double(n - 1) / double(n));
    } else {
        r.df = 2 * n - 2;
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= double(n);
        mb /= double(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (a[i] - ma) * (a[i] - ma) + (b[i] - mb) * (b[i] - mb);
        const double pooled = ss / double(2 * n - 2);
        se = std::sqrt(pooled * 2.0 / double(n));
        mean_diff = ma - mb;
    }

    if (se == 0.0) {
        if (mean_diff == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = std::copysign(std::numeric_limits<double>::infinity(), mean_diff);
            r.p = 0.0;
            r.degenerate = true;
        }
        return r;
    }
    r.t = mean_diff / se;
    r.p = student_t_two_sided_p(r.t, double(r.df));
    return r;
}

double quantile_sorted(std::span<const double> sorted, double q)
{
    if (sorted.empty()) {
        throw Error(ErrorKind::length, "quantile of empty data");
    }
    const double pos = q * double(sorted.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - double(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FiveNumber five_number(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75),
            values.back()};
}

Summary summarize(std::span<const double> values)
{
    Summary s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    s.mean = sum / double(s.count);
    s.median = quantile_sorted(sorted, 0.5);
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / double(s.count - 1));
    }
    return s;
}

EvaluationReport aggregate(std::vector<MetricRecord> records)
{
    if (records.empty()) {
        throw Error(ErrorKind::evaluation, "no metric records to aggregate");
    }
    std::sort(records.begin(), records.end(), [](const MetricRecord& x, const MetricRecord& y) {
        return std::tie(x.model, x.exogenous, x.series_id) < std::tie(y.model, y.exogenous, y.series_id);
    });
    std::map<std::pair<std::string, bool>, std::vector<const MetricRecord*>> groups;
    for (const auto& r : records) groups[{r.model, r.exogenous}].push_back(&r);

    EvaluationReport report;
    for (const auto& [key, members] : groups) {
        GroupAggregate g;
        g.model = key.first;
        g.exogenous = key.second;
        std::vector<double> s, d, u;
        for (const auto* r : members) {
            s.push_back(r->smape);
            d.push_back(r->dstat);
            if (r->theils_u) u.push_back(*r->theils_u);
            g.series_ids.push_back(r->series_id);
        }
        g.smape = summarize(s);
        g.dstat = summarize(d);
        g.theils_u = summarize(u);
        g.smape_box = five_number(s);
        report.aggregates.push_back(std::move(g));
    }
    report.records = std::move(records);
    return report;
}

void write_aggregate_csv(std::ostream& out, const EvaluationReport& report)
{
    out << "model,exogenous,count,smape_mean,smape_median,smape_std,dstat_mean,dstat_median,dstat_std,"
           "theils_u_count,theils_u_mean,theils_u_median,theils_u_std\n";
    for (const auto& g : report.aggregates) {
        out << g.model << ',' << (g.exogenous ? "true" : "false") << ',' << g.smape.count;
        for (const Summary* s : {&g.smape, &g.dstat}) {
            out << ',' << format_double(s->mean) << ',' << format_double(s->median) << ',' << format_double(s->std);
        }
        out << ',' << g.theils_u.count << ',' << format_double(g.theils_u.mean) << ','
            << format_double(g.theils_u.median) << ',' << format_double(g.theils_u.std) << '\n';
    }
}

void write_records_csv(std::ostream& out, const std::vector<MetricRecord>& records)
{
    out << "series_id,model,exogenous,smape,dstat,theils_u\n";
    for (const auto& r : records) {
        out << r.series_id << ',' << r.model << ',' << (r.exogenous ? "true" : "false") << ','
            << format_double(r.smape) << ',' << format_double(r.dstat) << ','
            << (r.theils_u ? format_double(*r.theils_u) : std::string()) << '\n';
    }
}

nlohmann::json to_json(const EvaluationReport& report)
{
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) {
        records.push_back({{"series_id", r.series_id},
                           {"model", r.model},
                           {"exogenous", r.exogenous},
                           {"smape", r.smape},
                           {"dstat", r.dstat},
                           {"theils_u", r.theils_u ? nlohmann::json(*r.theils_u) : nlohmann::json(nullptr)}});
    }
    nlohmann::json aggregates = nlohmann::json::array();
    for (const auto& g : report.aggregates) {
        const auto& b = g.smape_box;
        aggregates.push_back({{"model", g.model},
                              {"exogenous", g.exogenous},
                              {"smape", summary_json(g.smape)},
                              {"dstat", summary_json(g.dstat)},
                              {"theils_u", summary_json(g.theils_u)},
                              {"smape_boxplot",
                               {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max},
                                {"iqr", b.iqr()}}},
                              {"series_ids", g.series_ids}});
    }
    return {{"records", records}, {"aggregates", aggregates}};
}

nlohmann::json to_json(const TTestResult& r)
{
    auto finite_or_string = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return v > 0 ? "inf" : "-inf";
    };
    return {{"t", finite_or_string(r.t)}, {"p", r.p}, {"df", r.df}, {"mode", to_string(r.mode)},
            {"degenerate", r.degenerate}};
}

} // namespace atmcast
