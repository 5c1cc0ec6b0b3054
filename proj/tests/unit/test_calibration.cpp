#include "lsv/calibration.hpp"
#include "lsv/errors.hpp"
#include "lsv/market_data.hpp"
#include "lsv/rng.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace lsv;

namespace {

// Independent oracles: closed-form normal equations, solved by Cramer's rule.
LinearFit linear_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const long double det = n * sxx - sx * sx;
    LinearFit f;
    f.slope = static_cast<double>((n * sxy - sx * sy) / det);
    f.intercept = static_cast<double>((sy * sxx - sx * sxy) / det);
    return f;
}

std::array<double, 3> quadratic_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    long double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double r[3] = {1.0L, x[i], static_cast<long double>(x[i]) * x[i]};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) m[a][b] += r[a] * r[b];
            m[a][3] += r[a] * y[i];
        }
    }
    auto det3 = [](long double a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    long double base[3][3];
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) base[a][b] = m[a][b];
    const long double d = det3(base);
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) {
        long double c[3][3];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) c[a][b] = b == k ? m[a][3] : m[a][b];
        out[k] = static_cast<double>(det3(c) / d);
    }
    return out;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed, std::uint64_t path = 0) {
    NormalStream z(seed, 0, path);
    std::vector<double> v(n);
    for (auto& x : v) x = z.next();
    return v;
}

JointSeries small_synthetic(double vix_noise, std::uint64_t seed = 1) {
    testing::SyntheticSpec spec;
    spec.lags = 40;
    spec.days = 1500;
    spec.period = 300.0;
    spec.vix_noise = vix_noise;
    spec.seed = seed;
    return testing::make_synthetic(spec).data;
}

}  // namespace

TEST_CASE("linear fit") {
    std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
    auto f = fit_linear(x, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.r2 == doctest::Approx(100.0).epsilon(1e-14));

    auto xs = normals(20, 4, 0), ys = normals(20, 4, 1);
    for (std::size_t i = 0; i < 20; ++i) ys[i] += 0.7 * xs[i] + 3.0;
    auto got = fit_linear(xs, ys);
    auto want = linear_oracle(xs, ys);
    CHECK(std::abs(got.slope - want.slope) <= 1e-10);
    CHECK(std::abs(got.intercept - want.intercept) <= 1e-10);
    CHECK(got.r2 <= 100.0);

    CHECK_THROWS_AS(fit_linear(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), InputError);
    CHECK_THROWS_AS(fit_linear(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InputError);
}

TEST_CASE("quadratic fit") {
    std::vector<double> i, v;
    for (int k = 0; k < 30; ++k) {
        i.push_back(0.5 + 0.03 * k);
        v.push_back(1.0 - i.back() * i.back());
    }
    auto f = fit_quadratic(i, v);
    CHECK(f.a == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(f.b) < 1e-9);
    CHECK(f.c == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(f.r2 == doctest::Approx(100.0).epsilon(1e-12));

    auto x = normals(200, 8, 0), e = normals(200, 8, 1), y = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = 1.0 + 0.2 * x[k];
        y[k] = 70 + 4 * x[k] - 50 * x[k] * x[k] + e[k];
    }
    auto g = fit_quadratic(x, y);
    auto o = quadratic_oracle(x, y);
    CHECK(g.a == doctest::Approx(o[0]).epsilon(1e-9));
    CHECK(g.b == doctest::Approx(o[1]).epsilon(1e-9));
    CHECK(g.c == doctest::Approx(o[2]).epsilon(1e-9));
    CHECK(g.r2 <= 100.0);

    auto z = fit_quadratic(x, y, true);
    CHECK(z.a == 0.0);

    CHECK_THROWS_AS(fit_quadratic(std::vector<double>(10, 1.0), std::vector<double>(10, 2.0)), InputError);
    CHECK_THROWS_AS(fit_quadratic(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), InputError);
}

TEST_CASE("profile objective gradient matches central differences") {
    auto data = small_synthetic(0.5);
    ProfileObjective obj(data.spx(), data.vix(), 40);
    auto psi = normals(40, 2);
    for (auto& p : psi) p *= 0.3;
    std::vector<double> grad(40), scratch(40);
    obj(psi, grad);
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    for (std::size_t j : {0u, 1u, 7u, 20u, 39u}) {
        const double h = 1e-5;
        auto up = psi, dn = psi;
        up[j] += h;
        dn[j] -= h;
        const double fd = (obj(up, scratch) - obj(dn, scratch)) / (2 * h);
        CHECK(std::abs(fd - grad[j]) <= 1e-5 * scale + 1e-9);
    }
}

TEST_CASE("noiseless synthetic data is recovered exactly") {
    testing::SyntheticSpec spec;
    spec.vix_noise = 0.0;
    auto data = testing::make_synthetic(spec).data;
    auto r = optimize_kernel(data, spec.lags, flat_kernel(spec.lags), 1000, 5);
    CHECK(std::abs(r.in_sample_r2 - 100.0) <= 1e-6);
    CHECK(std::abs(r.fit.a - spec.a) <= 1e-4);
    CHECK(std::abs(r.fit.b - spec.b) <= 1e-4);
    CHECK(std::abs(r.fit.c - spec.c) <= 1e-4);
}

TEST_CASE("optimizer descends and evaluates consistently") {
    auto data = small_synthetic(0.5);
    auto r = optimize_kernel(data, 40, flat_kernel(40), 150, 3);
    REQUIRE(r.objective_trace.size() >= 2);
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
        CHECK(r.objective_trace[k] <= r.objective_trace[k - 1]);
    }
    ProfileObjective obj(data.spx(), data.vix(), 40);
    const double flat_value = obj.evaluate_weights(flat_kernel(40).weights());
    CHECK(r.objective_trace.back() <= flat_value);
    CHECK(r.improved);
    CHECK(evaluate_fit(r, data) == r.in_sample_r2);
    CHECK(r.in_sample_r2 <= 100.0);
    CHECK(r.fit(1.0) > 0.0);

    // Same inputs, same seed, more threads: same answer.
    OptimizeOptions par;
    par.threads = 3;
    auto p = optimize_kernel(data, 40, flat_kernel(40), 150, 3, par);
    CHECK(p.kernel == r.kernel);
    CHECK(p.in_sample_r2 == r.in_sample_r2);

    CHECK_THROWS_AS(optimize_kernel(data, 1530, flat_kernel(1530), 10, 1), InputError);
}

TEST_CASE("calibration is invariant to the spot unit") {
    auto data = small_synthetic(0.5, 2);
    auto a = optimize_kernel(data, 40, flat_kernel(40), 120, 9);
    auto b = optimize_kernel(data.with_scaled_spx(1000.0), 40, flat_kernel(40), 120, 9);
    for (std::size_t j = 0; j < 40; ++j) {
        CHECK(std::abs(b.kernel.weights()[j] / a.kernel.weights()[j] - 1.0) <= 1e-9);
    }
    CHECK(std::abs(b.fit.a / a.fit.a - 1.0) <= 1e-9);
    CHECK(std::abs(b.fit.b / a.fit.b - 1.0) <= 1e-9);
    CHECK(std::abs(b.fit.c / a.fit.c - 1.0) <= 1e-9);
    CHECK(std::abs(b.in_sample_r2 / a.in_sample_r2 - 1.0) <= 1e-9);
}

TEST_CASE("frozen model on a white-noise target scores near zero") {
    auto data = small_synthetic(0.5);
    auto r = optimize_kernel(data, 40, flat_kernel(40), 60, 1);
    auto noise = normals(data.size(), 77);
    std::vector<double> vix(data.size());
    for (std::size_t t = 0; t < vix.size(); ++t) vix[t] = 40.0 + 5.0 * noise[t];
    JointSeries white(data.dates(), data.spx(), vix);
    CHECK(evaluate_fit(r, white) < 5.0);
}

TEST_CASE("power-law fit") {
    const std::array<double, 3> p{0.0, 0.82, -0.23};
    auto f = fit_power_law(powerlaw_kernel(p, 250));
    CHECK(std::abs(f.p[1] - p[1]) <= 1e-8);
    CHECK(std::abs(f.p[2] - p[2]) <= 1e-8);
    CHECK(f.p[0] == 0.0);
    CHECK(f.score == doctest::Approx(1.0).epsilon(1e-12));
    auto flat = fit_power_law(flat_kernel(50));
    CHECK(std::abs(flat.p[1]) <= 1e-10);
    CHECK(std::abs(flat.p[2]) <= 1e-10);
    CHECK(flat.score == 1.0);
    CHECK_THROWS_AS(fit_power_law(flat_kernel(3)), InputError);
}

TEST_CASE("innovations") {
    auto syn = testing::make_synthetic([] {
        testing::SyntheticSpec s;
        s.lags = 20;
        s.days = 200;
        s.vix_noise = 0.0;
        return s;
    }());
    QuadraticFit f{75.0, 3.5, -57.0, 100.0};
    auto y = innovations(syn.data, syn.kernel, f);
    REQUIRE(y.values.size() == 200);
    for (double v : y.values) CHECK(std::abs(v) < 1e-12);
    CHECK(y.dates.front() == syn.data.dates()[20]);

    auto vix = syn.data.vix();
    for (auto& v : vix) v *= std::exp(1.0);
    auto e = innovations(JointSeries(syn.data.dates(), syn.data.spx(), vix), syn.kernel, f);
    for (double v : e.values) CHECK(std::abs(v - 1.0) < 1e-12);

    QuadraticFit negative{-10.0, 0.0, 0.0, 0.0};
    auto floored = innovations(syn.data, syn.kernel, negative);
    CHECK(floored.floored == 200);
    CHECK(floored.floored_dates.size() == 200);
    CHECK_THROWS_AS(innovations(syn.data, syn.kernel, negative, 1.0, true), InputError);
}

TEST_CASE("ar1 fit") {
    std::vector<double> y{1.0};
    for (int t = 0; t < 30; ++t) y.push_back(0.5 * y.back());
    auto exact = fit_ar1(y);
    CHECK(exact.phi == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(exact.sigma == 0.0);

    const std::size_t n = 100000;
    auto eps = normals(n, 21);
    std::vector<double> s(n);
    s[0] = 0.0;
    for (std::size_t t = 1; t < n; ++t) s[t] = 0.9 * s[t - 1] + 0.01 * eps[t];
    auto f = fit_ar1(s);
    CHECK(std::abs(f.phi - 0.9) <= 3.0 * f.phi_std_error);
    CHECK(f.phi_std_error == doctest::Approx(std::sqrt((1 - 0.81) / n)).epsilon(0.05));
    CHECK(f.sigma == doctest::Approx(0.01).epsilon(0.02));
    CHECK(f.r2 <= 100.0);

    CHECK_THROWS_AS(fit_ar1(std::vector<double>(5, 0.1)), InputError);
    CHECK_THROWS_AS(fit_ar1(std::vector<double>(50, 0.0)), InputError);
}

TEST_CASE("ar1 to ou bridge") {
    const double phi = std::exp(-1.0);
    ARFit unit{phi, std::sqrt((1.0 - phi * phi) / 2.0), 0.0, 0.0, 0};
    auto ou = map_ar1_to_ou(unit, 1.0);
    CHECK(ou.kappa_y == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ou.nu == doctest::Approx(1.0).epsilon(1e-14));

    auto daily = map_ar1_to_ou(ARFit{0.9822, 0.0026, 0.0, 0.0, 0});
    CHECK(daily.kappa_y == doctest::Approx(4.526).epsilon(1e-3));
    CHECK(daily.nu == doctest::Approx(0.04165).epsilon(1e-3));

    CHECK_THROWS_AS(map_ar1_to_ou(ARFit{1.0, 0.01, 0, 0, 0}), InputError);
    CHECK_THROWS_AS(map_ar1_to_ou(ARFit{-0.2, 0.01, 0, 0, 0}), InputError);

    // Exact OU transition at step dt, then refit.
    const double dt = 1.0 / 252.0;
    const double decay = std::exp(-daily.kappa_y * dt);
    const double sd = daily.nu * std::sqrt((1 - decay * decay) / (2 * daily.kappa_y));
    auto eps = normals(50000, 5);
    std::vector<double> y(eps.size(), 0.0);
    for (std::size_t t = 1; t < y.size(); ++t) y[t] = decay * y[t - 1] + sd * eps[t];
    auto refit = fit_ar1(y);
    CHECK(std::abs(refit.phi - 0.9822) <= 3.0 * refit.phi_std_error);
}

TEST_CASE("calibration json round trip") {
    auto data = small_synthetic(0.5);
    auto r = optimize_kernel(data, 40, flat_kernel(40), 20, 1);
    auto back = calibration_from_json(to_json(r));
    CHECK(back.kernel.weights().size() == 40);
    for (std::size_t j = 0; j < 40; ++j) CHECK(back.kernel.weights()[j] == r.kernel.weights()[j]);
    CHECK(back.fit.b == r.fit.b);
    CHECK(back.in_sample_r2 == r.in_sample_r2);
    CHECK(back.objective_trace == r.objective_trace);
}
