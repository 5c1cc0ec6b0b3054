#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lsv {

/// Calendar date without time of day, stored as days since 1970-01-01.
struct Date {
    std::int32_t days = 0;

    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`; returns nullopt for anything else or invalid dates.
    static std::optional<Date> parse_iso(std::string_view text);

    std::string iso() const;
    int year() const;

    /// Monday = 0 ... Sunday = 6.
    int weekday() const;

    /// Next Monday-to-Friday date strictly after this one.
    Date next_weekday() const;

    auto operator<=>(const Date&) const = default;
};

}  // namespace lsv
