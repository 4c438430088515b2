#include "atmcast/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "atmcast/error.hpp"

namespace atmcast {

const std::array<const char*, kCalendarColumns> kCalendarNames = {
    "is_monday", "is_tuesday", "is_wednesday", "is_thursday", "is_friday",
    "is_saturday", "is_sunday", "is_weekend_yes", "is_weekend_no",
};

std::size_t DatedSeries::missing_count() const
{
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](const auto& v) { return !v.has_value(); }));
}

std::vector<double> DatedSeries::dense() const
{
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) {
            throw Error(ErrorKind::domain,
                        "series '" + id + "' has a missing entry at " + date_at(i).iso());
        }
        out.push_back(*values[i]);
    }
    return out;
}

DatedSeries make_series(std::string id, Date start, const std::vector<double>& values)
{
    DatedSeries s{std::move(id), start, {}};
    s.values.reserve(values.size());
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::domain, "non-finite value in series '" + s.id + "'");
        }
        s.values.emplace_back(v);
    }
    return s;
}

namespace {

std::string_view trim_cr(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

struct RawRow {
    Date date;
    std::optional<double> amount;
};

} // namespace

PanelDataset load_panel(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::parse, "line 1: missing header");
    }
    ++line_no;
    std::string_view header = trim_cr(line);
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") {
        header.remove_prefix(3);
    }
    if (header != "id,date,amount") {
        throw Error(ErrorKind::parse, "line 1: expected header 'id,date,amount'");
    }

    std::map<std::string, std::map<Date, std::optional<double>>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim_cr(line);
        if (text.empty()) {
            continue;
        }
        const auto fields = split_fields(text);
        const std::string where = "line " + std::to_string(line_no);
        if (fields.size() != 3) {
            throw Error(ErrorKind::parse, where + ": expected 3 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw Error(ErrorKind::parse, where + ": empty id");
        }
        const auto date = Date::parse(fields[1]);
        if (!date) {
            throw Error(ErrorKind::parse, where + ": bad date '" + std::string(fields[1]) + "'");
        }
        std::optional<double> amount;
        if (!fields[2].empty()) {
            double value = 0.0;
            const char* first = fields[2].data();
            const char* last = first + fields[2].size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
                throw Error(ErrorKind::parse, where + ": bad amount '" + std::string(fields[2]) + "'");
            }
            if (value < 0.0) {
                throw Error(ErrorKind::domain, where + ": negative amount " + std::string(fields[2]));
            }
            amount = value;
        }
        auto& per_id = rows[std::string(fields[0])];
        if (!per_id.emplace(*date, amount).second) {
            throw Error(ErrorKind::duplicate_key,
                        where + ": duplicate (" + std::string(fields[0]) + ", " + date->iso() + ")");
        }
    }

    std::vector<DatedSeries> series;
    for (auto& [id, by_date] : rows) {
        const Date first = by_date.begin()->first;
        const Date last = by_date.rbegin()->first;
        DatedSeries s{id, first, std::vector<std::optional<double>>(std::size_t(last - first) + 1)};
        for (const auto& [date, amount] : by_date) {
            s.values[std::size_t(date - first)] = amount;
        }
        series.push_back(std::move(s));
    }
    return make_panel(std::move(series));
}

PanelDataset load_panel_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open '" + path + "'");
    }
    return load_panel(in);
}

PanelDataset make_panel(std::vector<DatedSeries> series)
{
    PanelDataset panel;
    if (series.empty()) {
        return panel;
    }
    panel.first = series.front().start;
    panel.last = series.front().end();
    for (const auto& s : series) {
        if (s.values.empty()) {
            throw Error(ErrorKind::domain, "series '" + s.id + "' is empty");
        }
        panel.first = std::min(panel.first, s.start);
        panel.last = std::max(panel.last, s.end());
    }
    for (auto& s : series) {
        if (s.start != panel.first || s.end() != panel.last) {
            std::vector<std::optional<double>> aligned(std::size_t(panel.last - panel.first) + 1);
            std::copy(s.values.begin(), s.values.end(), aligned.begin() + (s.start - panel.first));
            s.values = std::move(aligned);
            s.start = panel.first;
        }
        const std::string id = s.id;
        if (!panel.series.emplace(id, std::move(s)).second) {
            throw Error(ErrorKind::duplicate_key, "duplicate series id '" + id + "'");
        }
    }
    return panel;
}

void write_panel(std::ostream& out, const PanelDataset& panel)
{
    out << "id,date,amount\n";
    char buf[64];
    for (const auto& [id, s] : panel.series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << id << ',' << s.date_at(i).iso() << ',';
            if (s.values[i]) {
                auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *s.values[i]);
                out.write(buf, ptr - buf);
            }
            out << '\n';
        }
    }
}

PanelDataset filter_by_missing(const PanelDataset& panel, std::size_t max_missing)
{
    PanelDataset out;
    out.first = panel.first;
    out.last = panel.last;
    for (const auto& [id, s] : panel.series) {
        if (s.missing_count() <= max_missing) {
            out.series.emplace(id, s);
        }
    }
    return out;
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        throw Error(ErrorKind::length, "median of an empty set");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

namespace {

std::vector<double> present_values(const DatedSeries& s)
{
    std::vector<double> out;
    for (const auto& v : s.values) {
        if (v) {
            out.push_back(*v);
        }
    }
    return out;
}

} // namespace

DatedSeries impute_with(const DatedSeries& series, double fill)
{
    DatedSeries out = series;
    for (auto& v : out.values) {
        if (!v) {
            v = fill;
        }
    }
    return out;
}

DatedSeries impute_median(const DatedSeries& series)
{
    auto present = present_values(series);
    if (present.empty()) {
        throw Error(ErrorKind::unimputable, "series '" + series.id + "' has no present values");
    }
    if (present.size() == series.size()) {
        return series;
    }
    return impute_with(series, median(std::move(present)));
}

double panel_median(const PanelDataset& panel)
{
    std::vector<double> all;
    for (const auto& [id, s] : panel.series) {
        auto p = present_values(s);
        all.insert(all.end(), p.begin(), p.end());
    }
    if (all.empty()) {
        throw Error(ErrorKind::unimputable, "panel has no present values");
    }
    return median(std::move(all));
}

void calendar_row(Date date, double* out)
{
    const unsigned wd = date.iso_weekday();
    for (std::size_t k = 0; k < 7; ++k) {
        out[k] = (k + 1 == wd) ? 1.0 : 0.0;
    }
    const bool weekend = wd >= 6;
    out[7] = weekend ? 1.0 : 0.0;
    out[8] = weekend ? 0.0 : 1.0;
}

CalendarMatrix calendar_features(Date start, std::size_t n)
{
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, kCalendarColumns);
    for (std::size_t t = 0; t < n; ++t) {
        calendar_row(start + static_cast<std::int64_t>(t), rows.row(t).data());
    }
    return CalendarMatrix{rows};
}

std::pair<DatedSeries, DatedSeries> split_train_test(const DatedSeries& series, std::size_t horizon)
{
    if (horizon == 0) {
        throw Error(ErrorKind::split, "horizon must be at least 1");
    }
    if (horizon >= series.size()) {
        throw Error(ErrorKind::split, "horizon " + std::to_string(horizon) + " leaves no training data in series of length " +
                                          std::to_string(series.size()));
    }
    const std::size_t cut = series.size() - horizon;
    DatedSeries train{series.id, series.start, {series.values.begin(), series.values.begin() + cut}};
    DatedSeries test{series.id, series.date_at(cut), {series.values.begin() + cut, series.values.end()}};
    return {std::move(train), std::move(test)};
}

} // namespace atmcast
