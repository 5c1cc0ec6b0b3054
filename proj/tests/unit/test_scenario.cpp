#include "lsv/calibration.hpp"
#include "lsv/errors.hpp"
#include "lsv/market_data.hpp"
#include "lsv/numeric.hpp"
#include "lsv/scenario.hpp"

#include "reference_model.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace lsv;
using lsv::testing::reference_model;

namespace {

const QuadraticFit kFit{75.02, 3.47, -57.13, 88.55};
const ARFit kAr{0.9822, 0.0026, 96.75, 0.0, 0};

JointSeries as_history(const ScenarioSet& s, std::size_t p) {
    return JointSeries(s.grid, s.spx_paths[p], s.vix_paths[p]);
}

double divergence(const ValidationReport& r, const std::string& name) {
    for (const auto& row : r.summary.at("statistics")) {
        if (row.at("statistic") == name) return row.at("divergence").is_null() ? NAN : row.at("divergence").get<double>();
    }
    return NAN;
}

}  // namespace

TEST_CASE("zero innovations put the vix on the fitted curve") {
    auto m = reference_model();
    auto s = generate(m, kFit, ARFit{0.9822, 0.0, 0, 0, 0}, 1.0, 20, 3);
    REQUIRE(s.paths() == 20);
    REQUIRE(s.steps() == 252);
    for (std::size_t p = 0; p < s.paths(); ++p) {
        double a = m.a0;
        for (std::size_t i = 0; i <= s.steps(); ++i) {
            const double spot = s.spx_paths[p][i];
            CHECK(s.vix_paths[p][i] == doctest::Approx(kFit(spot / a)).epsilon(1e-13));
            CHECK(s.y_paths[p][i] == 0.0);
            a += m.kappa_kernel * (spot - a) / 252.0;
        }
    }
}

TEST_CASE("innovation variance and persistence") {
    auto s = generate(reference_model(), kFit, kAr, 20.0, 20, 7);
    std::vector<double> y, lag0, lag1;
    for (const auto& path : s.y_paths) {
        y.insert(y.end(), path.begin(), path.end());
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            lag0.push_back(path[i]);
            lag1.push_back(path[i + 1]);
        }
    }
    CHECK(y.size() >= 100000);
    const double stationary = kAr.sigma * kAr.sigma / (1 - kAr.phi * kAr.phi);
    CHECK(stationary == doctest::Approx(1.916e-4).epsilon(1e-3));
    double second = 0.0;
    for (double v : y) second += v * v;
    CHECK(std::abs(second / y.size() / stationary - 1.0) < 0.10);
    auto ar = fit_ar1(y);  // path joins add a handful of spurious pairs; negligible
    CHECK(std::abs(ar.phi - kAr.phi) <= 3.0 * ar.phi_std_error + 1e-3);
}

TEST_CASE("positivity, shapes and the risk-neutral martingale") {
    auto m = reference_model();
    m.r = 0.03;
    m.q = 0.01;
    auto s = generate(m, kFit, kAr, 1.0, 4000, 12);
    std::vector<double> disc;
    for (std::size_t p = 0; p < s.paths(); ++p) {
        CHECK(s.spx_paths[p].size() == s.grid.size());
        CHECK(s.vix_paths[p].size() == s.grid.size());
        bool positive = true;
        for (std::size_t i = 0; i < s.grid.size(); ++i) positive &= s.spx_paths[p][i] > 0 && s.vix_paths[p][i] > 0;
        CHECK(positive);
        disc.push_back(s.spx_paths[p].back() * std::exp(-(m.r - m.q) * 1.0));
    }
    const double se = std::sqrt(sample_variance(disc) / disc.size());
    CHECK(std::abs(mean(disc) - m.s0) <= 3.0 * se);
    for (std::size_t i = 1; i < s.grid.size(); ++i) CHECK(s.grid[i].weekday() < 5);
}

TEST_CASE("index drift follows the running-average dynamics") {
    // With I = S / A and dA = kappa (S - A) dt the exact drift of dI / I is
    // (r - q) + kappa - kappa I, so the slope on ((r - q) - kappa I) dt is 1.
    auto m = reference_model();
    auto s = generate(m, kFit, kAr, 1.0, 1500, 21);
    std::vector<double> x, y;
    for (const auto& path : s.spx_paths) {
        double a = m.a0;
        double prev = path[0] / a;
        for (std::size_t i = 1; i < path.size(); ++i) {
            a += m.kappa_kernel * (path[i - 1] - a) / 252.0;
            const double cur = path[i] / a;
            x.push_back(((m.r - m.q) - m.kappa_kernel * prev) / 252.0);
            y.push_back(cur / prev - 1.0);
            prev = cur;
        }
    }
    auto f = fit_linear(x, y);
    CHECK(std::abs(f.slope - 1.0) < 0.10);
}

TEST_CASE("scenarios are identical across thread counts and differ across seeds") {
    auto m = reference_model();
    ScenarioOptions one, many;
    many.threads = 4;
    auto a = generate(m, kFit, kAr, 0.5, 37, 5, one);
    auto b = generate(m, kFit, kAr, 0.5, 37, 5, many);
    CHECK(a.spx_paths == b.spx_paths);
    CHECK(a.vix_paths == b.vix_paths);
    auto c = generate(m, kFit, kAr, 0.5, 37, 6, one);
    CHECK(a.spx_paths != c.spx_paths);

    ScenarioOptions rw;
    rw.use_real_world_drift = true;
    rw.real_world_drift = 0.5;
    auto d = generate(m, kFit, kAr, 1.0, 2000, 5, rw);
    double total = 0.0;
    for (const auto& p : d.spx_paths) total += p.back();
    CHECK(total / 2000 > 140.0);
}

TEST_CASE("validation against a history from the same model") {
    auto m = reference_model();
    auto history = generate(m, kFit, kAr, 100.0, 1, 101);
    auto sims = generate(m, kFit, kAr, 10.0, 10, 202);
    auto report = validate(sims, as_history(history, 0), m.kappa_kernel);
    CHECK(divergence(report, "ks_index") < 0.1);
    CHECK(report.flags.empty());

    auto own = generate(m, kFit, kAr, 2.0, 1, 9);
    auto self = validate(own, as_history(own, 0), m.kappa_kernel);
    CHECK(divergence(self, "ks_index") == 0.0);
    CHECK(divergence(self, "lag1_autocorrelation_log_vix") == 0.0);
    CHECK(divergence(self, "excess_kurtosis_daily_returns") == 0.0);

    auto empty = validate(ScenarioSet{}, JointSeries{}, m.kappa_kernel);
    CHECK(std::find(empty.flags.begin(), empty.flags.end(), "no_simulated_data") != empty.flags.end());
    CHECK(std::find(empty.flags.begin(), empty.flags.end(), "no_reference_data") != empty.flags.end());
    CHECK(empty.summary["statistics"][0]["divergence"].is_null());
    std::ostringstream csv;
    write_validation_csv(empty, csv);
    CHECK(csv.str().find("ks_index,,,\n") != std::string::npos);
}

TEST_CASE("ks statistic") {
    CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_statistic({1, 2, 3}, {4, 5}) == 1.0);
    CHECK(ks_statistic({1, 1, 2, 2}, {1, 2}) == 0.0);
    CHECK(ks_statistic({1, 2, 3, 4}, {2.5}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_statistic({}, {1.0}), InputError);
}

TEST_CASE("scenario csv layout") {
    std::ostringstream out;
    write_scenario_csv({{100, 101, 102}, {100, 99, 98}}, out);
    CHECK(out.str() == "path_id,t_index,value\n0,1,101\n0,2,102\n1,1,99\n1,2,98\n");
    CHECK_THROWS_AS(generate(reference_model(), kFit, kAr, 0.0, 1, 1), InputError);
    CHECK_THROWS_AS(generate(reference_model(), kFit, kAr, 1.0, 0, 1), InputError);
}
