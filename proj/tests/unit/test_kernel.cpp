#include "lsv/errors.hpp"
#include "lsv/kernel.hpp"
#include "lsv/market_data.hpp"
#include "lsv/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace lsv;

namespace {

void check_simplex(const Kernel& k) {
    double s = 0.0;
    for (double w : k.weights()) {
        CHECK(w >= 0.0);
        s += w;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
}

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    NormalStream z(seed, 0, 0);
    std::vector<double> s(n);
    double x = std::log(100.0);
    for (auto& v : s) {
        v = std::exp(x);
        x += 0.01 * z.next();
    }
    return s;
}

}  // namespace

TEST_CASE("flat kernel") {
    auto k3 = flat_kernel(3);
    for (double w : k3.weights()) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(flat_kernel(1).weights()[0] == 1.0);
    auto k250 = flat_kernel(250);
    CHECK(k250.size() == 250);
    for (double w : k250.weights()) CHECK(w == doctest::Approx(0.004).epsilon(1e-14));
    CHECK_THROWS_AS(flat_kernel(0), InputError);
}

TEST_CASE("exponential kernel") {
    auto k = exp_kernel(std::log(2.0), 2);
    CHECK(k.at_lag(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(k.at_lag(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    auto zero = exp_kernel(0.0, 7);
    for (std::size_t j = 0; j < 7; ++j) CHECK(zero.weights()[j] == doctest::Approx(flat_kernel(7).weights()[j]));
    auto dec = exp_kernel(0.05, 50);
    for (std::size_t j = 1; j < 50; ++j) CHECK(dec.weights()[j] < dec.weights()[j - 1]);
    CHECK_THROWS_AS(exp_kernel(-0.1, 3), InputError);
}

TEST_CASE("power-law kernel") {
    auto flat = powerlaw_kernel({0, 0, 0}, 9);
    for (double w : flat.weights()) CHECK(w == doctest::Approx(1.0 / 9.0));
    auto harm = powerlaw_kernel({0, -1, 0}, 3);
    CHECK(harm.at_lag(1) == doctest::Approx(6.0 / 11.0).epsilon(1e-14));
    CHECK(harm.at_lag(2) == doctest::Approx(3.0 / 11.0).epsilon(1e-14));
    CHECK(harm.at_lag(3) == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
    auto fast = powerlaw_kernel({0, -0.38, -0.08}, 200);
    for (std::size_t j = 1; j < 200; ++j) CHECK(fast.weights()[j] < fast.weights()[j - 1]);
    CHECK(fast.at_lag(1) > 50 * fast.at_lag(200));
    CHECK_THROWS_AS(powerlaw_kernel({0, NAN, 0}, 200), InputError);
    CHECK(powerlaw_kernel({0, 0, 1e6}, 200).at_lag(200) == 1.0);
}

TEST_CASE("softmax weights") {
    auto k = softmax_weights(std::vector<double>{0, 0, 0});
    for (double w : k.weights()) CHECK(w == doctest::Approx(1.0 / 3.0));
    auto two = softmax_weights(std::vector<double>{std::log(2.0), 0.0});
    CHECK(two.at_lag(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    std::vector<double> psi{0.3, -1.2, 2.5, 0.0};
    auto shifted = psi;
    for (auto& p : shifted) p += 700.0;
    auto a = softmax_weights(psi), b = softmax_weights(shifted);
    for (std::size_t j = 0; j < 4; ++j) CHECK(a.weights()[j] == doctest::Approx(b.weights()[j]).epsilon(1e-14));
    check_simplex(b);
    CHECK_THROWS_AS(softmax_weights(std::vector<double>{NAN}), InputError);
}

TEST_CASE("every constructor lands on the simplex") {
    for (std::size_t n : {1u, 2u, 17u, 250u}) {
        check_simplex(flat_kernel(n));
        check_simplex(exp_kernel(0.3, n));
        check_simplex(powerlaw_kernel({0.4, 0.82, -0.23}, n));
        std::vector<double> psi(n);
        NormalStream z(9, 0, n);
        for (auto& p : psi) p = 3.0 * z.next();
        check_simplex(softmax_weights(psi));
    }
    CHECK_THROWS_AS(Kernel({1.0, -0.5}), InputError);
    CHECK_THROWS_AS(Kernel({0.0, 0.0}), InputError);
    CHECK_THROWS_AS(Kernel({}), InputError);
}

TEST_CASE("scale index") {
    std::vector<double> constant(40, 1234.5);
    for (double v : scale_index(constant, powerlaw_kernel({0, 0.82, -0.23}, 30))) {
        CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
    auto i = scale_index(std::vector<double>{100, 110}, flat_kernel(1));
    REQUIRE(i.size() == 1);
    CHECK(i[0] == doctest::Approx(1.1).epsilon(1e-15));
    CHECK_THROWS_AS(scale_index(std::vector<double>{100, 110}, flat_kernel(2)), InputError);

    auto s = random_walk(600, 3);
    auto scaled = s;
    for (auto& v : scaled) v *= 1000.0;
    auto k = powerlaw_kernel({0, -0.38, -0.08}, 200);
    auto a = scale_index(s, k), b = scale_index(scaled, k);
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(std::abs(b[t] / a[t] - 1.0) <= 1e-12);

    std::vector<Date> dates;
    Date d = Date::from_ymd(2020, 1, 2);
    for (std::size_t t = 0; t < 10; ++t, d = d.next_weekday()) dates.push_back(d);
    auto series = scale_index(MarketSeries(dates, std::vector<double>(s.begin(), s.begin() + 10)), flat_kernel(4));
    CHECK(series.dates.front() == dates[4]);
    CHECK(series.values.size() == 6);
}

TEST_CASE("ewma update") {
    CHECK(ewma_state_update(100.0, 100.0, 4.53, 1.0 / 252) == 100.0);
    CHECK(ewma_state_update(100.0, 130.0, 0.0, 1.0 / 252) == 100.0);
    CHECK(ewma_state_update(100.0, 110.0, 4.53, 1.0 / 252) == doctest::Approx(100.1798).epsilon(1e-6));
    CHECK_THROWS_AS(ewma_state_update(100.0, 110.0, 300.0, 1.0 / 252), InputError);
    CHECK_THROWS_AS(ewma_state_update(-1.0, 110.0, 1.0, 1.0 / 252), InputError);
}

TEST_CASE("ewma recursion equals the explicit exponential sum") {
    // A_t = A_{t-1} + lambda (S_{t-1} - A_{t-1}) puts weight lambda (1 - lambda)^{j-1}
    // on lag j: an exponential kernel with daily rate -ln(1 - lambda).
    const double kappa = 4.53, dt = 1.0 / 252.0, lambda = kappa * dt;
    const std::size_t n = 2000;
    auto s = random_walk(4000, 11);
    auto k = exp_kernel(-std::log1p(-lambda), n);
    auto explicit_index = scale_index(s, k);
    double a = s[0];
    double worst = 0.0;
    for (std::size_t t = 1; t < s.size(); ++t) {
        a = ewma_state_update(a, s[t - 1], kappa, dt);
        if (t >= n) worst = std::max(worst, std::abs((s[t] / a) / explicit_index[t - n] - 1.0));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("mean lag and equivalent rate") {
    CHECK(mean_lag(flat_kernel(3)) == doctest::Approx(2.0));
    // An EWMA step of size dt has mean lag 1 / (kappa dt).
    const double kappa = 12.0;
    auto k = exp_kernel(-std::log1p(-kappa / 252.0), 5000);
    CHECK(equivalent_ewma_rate(k) == doctest::Approx(kappa).epsilon(1e-9));
}

TEST_CASE("kernel serialization") {
    auto k = powerlaw_kernel({0, -0.38, -0.08}, 20);
    auto j = kernel_to_json(k);
    CHECK(j["n"] == 20);
    CHECK(j["type"] == "powerlaw");
    CHECK(kernel_from_json(j) == k);
    std::ostringstream csv;
    write_kernel_csv(flat_kernel(2), csv);
    CHECK(csv.str() == "lag,weight\n1,0.5\n2,0.5\n");
    j["n"] = 3;
    CHECK_THROWS_AS(kernel_from_json(j), InputError);
}
