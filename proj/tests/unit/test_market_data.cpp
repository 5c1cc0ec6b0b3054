#include "lsv/errors.hpp"
#include "lsv/market_data.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace lsv;

namespace {

LoadedSeries parse(const std::string& text, const std::string& column = "close") {
    std::istringstream in(text);
    return parse_series(in, column, "mem.csv");
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

MarketSeries series(std::initializer_list<const char*> dates, std::vector<double> values) {
    std::vector<Date> d;
    for (auto s : dates) d.push_back(*Date::parse_iso(s));
    return MarketSeries(d, std::move(values));
}

}  // namespace

TEST_CASE("load three rows") {
    auto r = parse("date,close\n2020-01-02,100\n2020-01-03,101\n2020-01-06,102\n");
    REQUIRE(r.series.size() == 3);
    CHECK(r.series.values() == std::vector<double>{100, 101, 102});
    CHECK(r.rejected.empty());
}

TEST_CASE("duplicate date names the row") {
    auto msg = message_of([] { parse("date,close\n2020-01-02,100\n2020-01-02,101\n"); });
    CHECK(msg.find("line 3") != std::string::npos);
}

TEST_CASE("non-positive and empty values are rejected with line numbers") {
    auto r = parse("date,close\n2020-01-02,100\n2020-01-03,-5\n2020-01-06,\n2020-01-07,nan\n2020-01-08,7\n");
    CHECK(r.series.size() == 2);
    REQUIRE(r.rejected.size() == 3);
    CHECK(r.rejected[0].line == 3);
    CHECK(r.rejected[1].line == 4);
    CHECK(r.rejected[2].line == 5);
}

TEST_CASE("structural errors") {
    CHECK(message_of([] { parse("date,open\n2020-01-02,1\n"); }).find("close") != std::string::npos);
    CHECK(message_of([] { parse("date,close\n02/01/2020,1\n"); }).find("line 2") != std::string::npos);
    CHECK(message_of([] { parse("date,close\n2020-01-03,1\n2020-01-02,1\n"); }).find("line 3") !=
          std::string::npos);
    CHECK(message_of([] { load_series("/nonexistent/x.csv", "close"); }).find("/nonexistent/x.csv") !=
          std::string::npos);
}

TEST_CASE("extra columns and comments are tolerated") {
    auto r = parse("# vendor dump\nopen,date,close\n1,2020-01-02,100\n2,2020-01-03,101\n");
    CHECK(r.series.size() == 2);
}

TEST_CASE("series invariants") {
    CHECK_THROWS_AS(series({"2020-01-02"}, {0.0}), InputError);
    CHECK_THROWS_AS(series({"2020-01-02", "2020-01-03"}, {1.0}), InputError);
    CHECK_THROWS_AS(series({"2020-01-03", "2020-01-02"}, {1.0, 2.0}), InputError);
}

TEST_CASE("align") {
    auto a = series({"2020-01-02", "2020-01-03", "2020-01-06"}, {1, 2, 3});
    auto b = series({"2020-01-02", "2020-01-03", "2020-01-06"}, {10, 20, 30});
    auto r = align(a, b);
    CHECK(r.dropped_spx == 0);
    CHECK(r.dropped_vix == 0);
    CHECK(r.joint.size() == 3);

    auto holiday = series({"2020-01-02", "2020-01-03", "2020-01-04", "2020-01-06"}, {1, 2, 2.5, 3});
    auto h = align(holiday, b);
    CHECK(h.dropped_spx == 1);
    CHECK(h.dropped_vix == 0);
    CHECK(align(holiday, b).joint.dates() == align(b, holiday).joint.dates());

    auto later = series({"2021-01-04"}, {5});
    CHECK(message_of([&] { align(a, later); }) == "empty intersection");
}

TEST_CASE("slice") {
    std::vector<Date> d;
    std::vector<double> s, v;
    for (Date x = Date::from_ymd(1990, 1, 2); x < Date::from_ymd(2000, 1, 1); x = x.next_weekday()) {
        d.push_back(x);
        s.push_back(100);
        v.push_back(20);
    }
    JointSeries j(d, s, v);
    CHECK(slice(j, Date::from_ymd(1980, 1, 1), Date::from_ymd(2001, 1, 1)) == j);
    auto p = slice(j, Date::from_ymd(1990, 1, 1), Date::from_ymd(1995, 1, 1));
    CHECK(p.dates().back().year() == 1994);
    CHECK(p.dates().front() == d.front());
    CHECK(message_of([&] { slice(j, Date::from_ymd(2030, 1, 1), Date::from_ymd(2031, 1, 1)); })
              .find("empty slice") != std::string::npos);
    CHECK_THROWS_AS(slice(j, Date::from_ymd(1995, 1, 1), Date::from_ymd(1995, 1, 1)), InputError);
}

TEST_CASE("joint csv round trip is exact") {
    std::vector<Date> d{Date::from_ymd(2020, 1, 2), Date::from_ymd(2020, 1, 3)};
    JointSeries j(d, {3234.8500000000001, 0.1 + 0.2}, {12.47, 1.0 / 3.0});
    const auto path = std::filesystem::temp_directory_path() / "lsv_joint_roundtrip.csv";
    {
        std::ofstream out(path);
        write_joint_csv(j, out);
    }
    CHECK(read_joint_csv(path) == j);
    auto spx = load_series(path, "spx").series;
    auto vix = load_series(path, "vix").series;
    CHECK(align(spx, vix).joint == j);
    std::filesystem::remove(path);
}

TEST_CASE("format_double is shortest round trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(100.0) == "100");
    for (double x : {1.0 / 3.0, 2.718281828459045, 1e-300, 123456789.125}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("scaled spot") {
    std::vector<Date> d{Date::from_ymd(2020, 1, 2)};
    JointSeries j(d, {2.0}, {20.0});
    auto k = j.with_scaled_spx(1000.0);
    CHECK(k.spx()[0] == 2000.0);
    CHECK(k.vix()[0] == 20.0);
    CHECK_THROWS_AS(j.with_scaled_spx(0.0), InputError);
}
