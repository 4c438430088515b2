#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "atmcast/date.hpp"

namespace atmcast {

/// One ATM's daily amounts on a gap-free calendar index. Absent observations are
/// explicit `std::nullopt` entries, never removed rows.
struct DatedSeries {
    std::string id;
    Date start;
    std::vector<std::optional<double>> values;

    std::size_t size() const { return values.size(); }
    Date date_at(std::size_t i) const { return start + static_cast<std::int64_t>(i); }
    Date end() const { return start + static_cast<std::int64_t>(values.size()) - 1; }
    std::size_t missing_count() const;
    bool complete() const { return missing_count() == 0; }

    /// Present values as a plain vector; throws if any entry is missing.
    std::vector<double> dense() const;
};

DatedSeries make_series(std::string id, Date start, const std::vector<double>& values);

struct PanelDataset {
    std::map<std::string, DatedSeries> series;
    Date first;
    Date last;

    bool empty() const { return series.empty(); }
};

/// Reads the `id,date,amount` CSV. Series are aligned onto the panel-wide date
/// range; any day without a row becomes a missing entry.
PanelDataset load_panel(std::istream& in);
PanelDataset load_panel_file(const std::string& path);

/// Writes every entry, missing ones with an empty amount, series in id order.
void write_panel(std::ostream& out, const PanelDataset& panel);

PanelDataset make_panel(std::vector<DatedSeries> series);

/// Keeps series with at most `max_missing` missing entries.
PanelDataset filter_by_missing(const PanelDataset& panel, std::size_t max_missing = 110);

double median(std::vector<double> values);

/// Replaces missing entries with the median of the series' present values.
DatedSeries impute_median(const DatedSeries& series);
/// Replaces missing entries with a caller-supplied value (panel-wide median mode).
DatedSeries impute_with(const DatedSeries& series, double fill);

enum class ImputeScope { per_series, panel };
/// Median of every present value in the panel.
double panel_median(const PanelDataset& panel);

inline constexpr std::size_t kCalendarColumns = 9;
extern const std::array<const char*, kCalendarColumns> kCalendarNames;

/// One row per date: is_monday..is_sunday, is_weekend_yes, is_weekend_no.
struct CalendarMatrix {
    Eigen::MatrixXd rows;
};

CalendarMatrix calendar_features(Date start, std::size_t n);
/// Writes the nine one-hot entries for a single date into `out`.
void calendar_row(Date date, double* out);

std::pair<DatedSeries, DatedSeries> split_train_test(const DatedSeries& series, std::size_t horizon = 30);

} // namespace atmcast
