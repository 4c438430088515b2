#include "atmcast/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "atmcast/error.hpp"

namespace atmcast {

namespace chr = std::chrono;

Date Date::from_ymd(int year, unsigned month, unsigned day)
{
    const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) {
        throw Error(ErrorKind::domain, "invalid calendar date");
    }
    return Date(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

std::optional<Date> Date::parse(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int value = 0;
        const char* first = text.data() + pos;
        const char* last = first + len;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) {
            return std::nullopt;
        }
        return value;
    };
    const auto y = field(0, 4);
    const auto m = field(5, 2);
    const auto d = field(8, 2);
    if (!y || !m || !d || *m < 1 || *d < 1) {
        return std::nullopt;
    }
    const chr::year_month_day ymd{chr::year{*y}, chr::month{unsigned(*m)}, chr::day{unsigned(*d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Date(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

std::string Date::iso() const
{
    const chr::year_month_day ymd{chr::sys_days{chr::days{days_}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

unsigned Date::iso_weekday() const
{
    return chr::weekday{chr::sys_days{chr::days{days_}}}.iso_encoding();
}

} // namespace atmcast
