#pragma once

#include "lsv/date.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lsv {

/// Daily closes of one index. Dates strictly increasing, values finite and > 0.
class MarketSeries {
public:
    MarketSeries() = default;
    /// Throws InputError when any invariant is violated.
    MarketSeries(std::vector<Date> dates, std::vector<double> values);

    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }

    /// Multiplies every value by `factor` (> 0).
    MarketSeries scaled(double factor) const;

private:
    std::vector<Date> dates_;
    std::vector<double> values_;
};

/// Spot index and volatility index observed on the same dates.
/// `vix` is in volatility points (20 means 20%).
class JointSeries {
public:
    JointSeries() = default;
    JointSeries(std::vector<Date> dates, std::vector<double> spx, std::vector<double> vix);

    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<double>& spx() const { return spx_; }
    const std::vector<double>& vix() const { return vix_; }
    std::size_t size() const { return dates_.size(); }

    MarketSeries spx_series() const { return MarketSeries(dates_, spx_); }
    MarketSeries vix_series() const { return MarketSeries(dates_, vix_); }

    /// Same dates and VIX, spot multiplied by `factor`.
    JointSeries with_scaled_spx(double factor) const;

    bool operator==(const JointSeries&) const = default;

private:
    std::vector<Date> dates_;
    std::vector<double> spx_;
    std::vector<double> vix_;
};

/// A data row skipped during loading, with its 1-based file line number.
struct RejectedRow {
    std::size_t line = 0;
    std::string reason;
};

struct LoadedSeries {
    MarketSeries series;
    std::vector<RejectedRow> rejected;
};

/// Reads a `date,<column>` CSV (extra columns allowed, `#` lines ignored).
/// Rows with an empty, unparsable, non-finite or non-positive value are
/// rejected and reported; a missing file or column, a bad date, or a
/// non-increasing date raise InputError naming the line.
LoadedSeries load_series(const std::filesystem::path& path, std::string_view column);
LoadedSeries parse_series(std::istream& in, std::string_view column,
                          std::string_view source_name = "<stream>");

struct Alignment {
    JointSeries joint;
    std::size_t dropped_spx = 0;  ///< spx rows without a matching vix date
    std::size_t dropped_vix = 0;  ///< vix rows without a matching spx date
};

/// Inner join on dates. Throws InputError("empty intersection") when no date is shared.
Alignment align(const MarketSeries& spx, const MarketSeries& vix);

/// Rows with start <= date < end. Throws InputError on start >= end or an empty result.
JointSeries slice(const JointSeries& series, Date start, Date end);

/// `date,spx,vix` with shortest round-trip number formatting.
void write_joint_csv(const JointSeries& series, std::ostream& out);
JointSeries read_joint_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace lsv
