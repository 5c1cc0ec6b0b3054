#include "lsv/market_data.hpp"

#include "lsv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lsv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                          s.front() == '"'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                          s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

void check_dates(const std::vector<Date>& dates) {
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw InputError("dates not strictly increasing at index " + std::to_string(i) + " (" +
                             dates[i].iso() + ")");
        }
    }
}

void check_values(const std::vector<double>& values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] <= 0.0) {
            throw InputError(std::string(what) + " value at index " + std::to_string(i) +
                             " must be finite and positive");
        }
    }
}

}  // namespace

MarketSeries::MarketSeries(std::vector<Date> dates, std::vector<double> values)
    : dates_(std::move(dates)), values_(std::move(values)) {
    if (dates_.size() != values_.size()) throw InputError("dates and values differ in length");
    check_dates(dates_);
    check_values(values_, "series");
}

MarketSeries MarketSeries::scaled(double factor) const {
    if (!(factor > 0.0)) throw InputError("scale factor must be positive");
    std::vector<double> v(values_);
    for (double& x : v) x *= factor;
    return MarketSeries(dates_, std::move(v));
}

JointSeries::JointSeries(std::vector<Date> dates, std::vector<double> spx, std::vector<double> vix)
    : dates_(std::move(dates)), spx_(std::move(spx)), vix_(std::move(vix)) {
    if (dates_.size() != spx_.size() || dates_.size() != vix_.size()) {
        throw InputError("joint series arrays differ in length");
    }
    check_dates(dates_);
    check_values(spx_, "spx");
    check_values(vix_, "vix");
}

JointSeries JointSeries::with_scaled_spx(double factor) const {
    if (!(factor > 0.0)) throw InputError("scale factor must be positive");
    std::vector<double> s(spx_);
    for (double& x : s) x *= factor;
    return JointSeries(dates_, std::move(s), vix_);
}

LoadedSeries parse_series(std::istream& in, std::string_view column, std::string_view source) {
    const std::string where(source);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> header;
    std::string header_line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line).front() == '#') continue;
        header_line = line;
        break;
    }
    if (header_line.empty()) throw InputError(where + ": no header row");
    header = split(header_line);
    std::size_t date_col = header.size();
    std::size_t value_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (iequals(header[i], "date")) date_col = i;
        if (iequals(header[i], column)) value_col = i;
    }
    if (date_col == header.size()) throw InputError(where + ": missing column 'date'");
    if (value_col == header.size()) {
        throw InputError(where + ": missing column '" + std::string(column) + "'");
    }

    LoadedSeries out;
    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = split(line);
        const std::string_view date_text = date_col < fields.size() ? fields[date_col] : "";
        const auto date = Date::parse_iso(date_text);
        if (!date) {
            throw InputError(where + ": line " + std::to_string(line_no) + ": unparsable date '" +
                             std::string(date_text) + "'");
        }
        if (!dates.empty() && !(dates.back() < *date)) {
            const bool dup = dates.back() == *date;
            throw InputError(where + ": line " + std::to_string(line_no) + ": " +
                             (dup ? "duplicated date " : "date out of order ") + date->iso());
        }
        const std::string_view value_text = value_col < fields.size() ? fields[value_col] : "";
        const auto value = parse_number(value_text);
        std::string reason;
        if (value_text.empty()) {
            reason = "empty value";
        } else if (!value) {
            reason = "unparsable value '" + std::string(value_text) + "'";
        } else if (!std::isfinite(*value)) {
            reason = "non-finite value";
        } else if (*value <= 0.0) {
            reason = "non-positive value " + std::string(value_text);
        }
        if (!reason.empty()) {
            out.rejected.push_back({line_no, reason});
            // Keep the date for ordering checks even though the row is dropped.
            dates.push_back(*date);
            values.push_back(std::nan(""));
            continue;
        }
        dates.push_back(*date);
        values.push_back(*value);
    }
    std::vector<Date> kept_dates;
    std::vector<double> kept_values;
    kept_dates.reserve(dates.size());
    kept_values.reserve(values.size());
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (std::isnan(values[i])) continue;
        kept_dates.push_back(dates[i]);
        kept_values.push_back(values[i]);
    }
    out.series = MarketSeries(std::move(kept_dates), std::move(kept_values));
    return out;
}

LoadedSeries load_series(const std::filesystem::path& path, std::string_view column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file: " + path.string());
    return parse_series(in, column, path.string());
}

Alignment align(const MarketSeries& spx, const MarketSeries& vix) {
    if (spx.empty() || vix.empty()) throw InputError("cannot align an empty series");
    std::vector<Date> dates;
    std::vector<double> s;
    std::vector<double> v;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < spx.size() && j < vix.size()) {
        const Date a = spx.dates()[i];
        const Date b = vix.dates()[j];
        if (a < b) {
            ++i;
        } else if (b < a) {
            ++j;
        } else {
            dates.push_back(a);
            s.push_back(spx.values()[i]);
            v.push_back(vix.values()[j]);
            ++i;
            ++j;
        }
    }
    if (dates.empty()) throw InputError("empty intersection");
    Alignment out;
    out.dropped_spx = spx.size() - dates.size();
    out.dropped_vix = vix.size() - dates.size();
    out.joint = JointSeries(std::move(dates), std::move(s), std::move(v));
    return out;
}

JointSeries slice(const JointSeries& series, Date start, Date end) {
    if (!(start < end)) throw InputError("slice: start must precede end");
    const auto& d = series.dates();
    const auto lo = std::lower_bound(d.begin(), d.end(), start) - d.begin();
    const auto hi = std::lower_bound(d.begin(), d.end(), end) - d.begin();
    if (lo >= hi) throw InputError("empty slice [" + start.iso() + ", " + end.iso() + ")");
    return JointSeries(std::vector<Date>(d.begin() + lo, d.begin() + hi),
                       std::vector<double>(series.spx().begin() + lo, series.spx().begin() + hi),
                       std::vector<double>(series.vix().begin() + lo, series.vix().begin() + hi));
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_joint_csv(const JointSeries& series, std::ostream& out) {
    out << "date,spx,vix\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.dates()[i].iso() << ',' << format_double(series.spx()[i]) << ','
            << format_double(series.vix()[i]) << '\n';
    }
}

JointSeries read_joint_csv(const std::filesystem::path& path) {
    const auto spx = load_series(path, "spx");
    const auto vix = load_series(path, "vix");
    if (!spx.rejected.empty() || !vix.rejected.empty()) {
        const auto& r = spx.rejected.empty() ? vix.rejected.front() : spx.rejected.front();
        throw InputError(path.string() + ": line " + std::to_string(r.line) + ": " + r.reason);
    }
    return align(spx.series, vix.series).joint;
}

}  // namespace lsv
