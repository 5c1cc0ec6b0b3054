#include "lsv/date.hpp"

#include <chrono>
#include <cstdio>

namespace lsv {

namespace {

std::chrono::sys_days to_sys(Date d) {
    return std::chrono::sys_days{std::chrono::days{d.days}};
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    return Date{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

std::optional<Date> Date::parse_iso(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len) -> int {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (text[i] < '0' || text[i] > '9') return -1;
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    const int y = digits(0, 4);
    const int m = digits(5, 2);
    const int d = digits(8, 2);
    if (y < 0 || m < 0 || d < 0) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

std::string Date::iso() const {
    const std::chrono::year_month_day ymd{to_sys(*this)};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

int Date::year() const {
    return int(std::chrono::year_month_day{to_sys(*this)}.year());
}

int Date::weekday() const {
    // 1970-01-01 was a Thursday.
    const int w = (days % 7 + 7 + 3) % 7;
    return w;
}

Date Date::next_weekday() const {
    Date d{days + 1};
    while (d.weekday() >= 5) ++d.days;
    return d;
}

}  // namespace lsv
