#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace atmcast {

/// Civil calendar date (proleptic Gregorian), stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;

    static Date from_ymd(int year, unsigned month, unsigned day);
    static constexpr Date from_days(std::int32_t days) { return Date(days); }

    /// Parses strict `YYYY-MM-DD`; nullopt on anything else.
    static std::optional<Date> parse(std::string_view text);

    std::string iso() const;

    /// ISO weekday: Monday = 1 ... Sunday = 7.
    unsigned iso_weekday() const;

    constexpr std::int32_t days() const { return days_; }

    constexpr Date operator+(std::int64_t n) const { return Date(static_cast<std::int32_t>(days_ + n)); }
    constexpr Date operator-(std::int64_t n) const { return Date(static_cast<std::int32_t>(days_ - n)); }
    constexpr std::int64_t operator-(Date other) const { return std::int64_t(days_) - other.days_; }

    constexpr auto operator<=>(const Date&) const = default;

private:
    constexpr explicit Date(std::int32_t days) : days_(days) {}

    std::int32_t days_ = 0;
};

} // namespace atmcast
