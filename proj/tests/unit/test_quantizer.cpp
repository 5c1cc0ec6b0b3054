#include "lsv/errors.hpp"
#include "lsv/quantizer.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace lsv;

namespace {

// Composite Simpson rule, written out independently of the library.
template <class F>
double simpson(F f, double lo, double hi, int intervals = 20000) {
    const double h = (hi - lo) / intervals;
    double s = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
}

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double ou_terminal_variance(const OUParams& ou, double t) {
    return ou.nu * ou.nu * (1.0 - std::exp(-2.0 * ou.kappa_y * t)) / (2.0 * ou.kappa_y);
}

double terminal_square_error(const QuantizerSet& q) {
    const double exact = ou_terminal_variance(q.ou, q.horizon);
    const double approx = quadrature([](const PathView& p) { return p.y.back() * p.y.back(); }, q);
    return std::abs(approx / exact - 1.0);
}

const OUParams kCalibrated{4.526, 0.04165, 0.0};

}  // namespace

TEST_CASE("brownian karhunen-loeve pairs") {
    auto kl = kl_coordinates(1.0, 100);
    for (std::size_t k = 1; k < 100; ++k) CHECK(kl.eigenvalues[k] < kl.eigenvalues[k - 1]);
    double total = 0.0;
    for (double l : kl.eigenvalues) total += l;
    CHECK(std::abs(total - 0.5) < 0.005);
    CHECK(kl.eigenvalues[0] == doctest::Approx(4.0 / (std::numbers::pi * std::numbers::pi)));

    auto two = kl_coordinates(2.0, 6);
    for (std::size_t a = 1; a <= 6; ++a) {
        for (std::size_t b = a; b <= 6; ++b) {
            const double ip = simpson(
                [&](double t) { return two.eigenfunction(a, t) * two.eigenfunction(b, t); }, 0.0, 2.0, 10000);
            CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) <= 1e-8);
        }
        const double h = 1e-6, t = 0.7;
        const double fd = (two.eigenfunction(a, t + h) - two.eigenfunction(a, t - h)) / (2 * h);
        CHECK(two.eigenfunction_derivative(a, t) == doctest::Approx(fd).epsilon(1e-7));
    }
    CHECK_THROWS_AS(kl_coordinates(1.0, 0), InputError);
    CHECK_THROWS_AS(kl_coordinates(0.0, 2), InputError);
}

TEST_CASE("one-dimensional normal quantizers") {
    auto one = gaussian_quantizer(1);
    CHECK(one.points == std::vector<double>{0.0});
    CHECK(one.cell_probs == std::vector<double>{1.0});

    auto two = gaussian_quantizer(2);
    CHECK(two.points[1] == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-10));
    CHECK(two.points[0] == doctest::Approx(-std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-10));
    CHECK(two.cell_probs[0] == doctest::Approx(0.5).epsilon(1e-14));

    // Stationarity oracle: each point is the conditional mean of its Voronoi
    // cell, checked by quadrature on truncated cells.
    for (std::size_t n : {3u, 5u, 8u}) {
        auto q = gaussian_quantizer(n);
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = i == 0 ? -12.0 : 0.5 * (q.points[i - 1] + q.points[i]);
            const double hi = i + 1 == n ? 12.0 : 0.5 * (q.points[i] + q.points[i + 1]);
            const double p = simpson(phi, lo, hi);
            const double m = simpson([](double z) { return z * phi(z); }, lo, hi);
            CHECK(std::abs(m / p - q.points[i]) <= 1e-6);
            CHECK(std::abs(p - q.cell_probs[i]) <= 1e-9);
            CHECK(std::abs(q.points[i] + q.points[n - 1 - i]) <= 1e-12);
            mass += q.cell_probs[i];
        }
        CHECK(std::abs(mass - 1.0) <= 1e-12);
    }
    auto three = gaussian_quantizer(3);
    CHECK(three.points[2] == doctest::Approx(1.2240).epsilon(1e-4));
    CHECK(three.cell_probs[0] == doctest::Approx(0.2703).epsilon(1e-3));
    CHECK(three.cell_probs[1] == doctest::Approx(0.4595).epsilon(1e-3));
    CHECK_THROWS_AS(gaussian_quantizer(0), InputError);
    CHECK_THROWS_AS(gaussian_quantizer(7, 1e-10, 2), NumericalError);
}

TEST_CASE("degenerate quantizers collapse to the mean path") {
    OUParams ou{3.0, 0.0, 0.2};
    auto q = build_quantizer(ou, 1.0, 50, {3, 2});
    REQUIRE(q.size() == 6);
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t k = 0; k < q.grid.size(); ++k) {
            CHECK(q.paths[i][k] == doctest::Approx(0.2 * std::exp(-3.0 * q.grid[k])).epsilon(1e-14));
        }
    }
    OUParams noisy{3.0, 0.5, 0.2};
    auto single = build_quantizer(noisy, 1.0, 50, {1});
    REQUIRE(single.size() == 1);
    CHECK(single.probs[0] == 1.0);
    for (std::size_t k = 0; k < single.grid.size(); ++k) {
        CHECK(single.paths[0][k] == doctest::Approx(0.2 * std::exp(-3.0 * single.grid[k])).epsilon(1e-14));
        CHECK(single.dpaths[0][k] == doctest::Approx(-0.6 * std::exp(-3.0 * single.grid[k])).epsilon(1e-14));
    }
    CHECK(build_quantizer(noisy, 1.0, 50, {1, 1, 1}).size() == 1);
}

TEST_CASE("one-coordinate quantizer is ordered and carries the 1-D masses") {
    for (auto basis : {QuantizerBasis::terminal_anchored, QuantizerBasis::brownian_kl}) {
        auto q = build_quantizer(kCalibrated, 1.0, 252, {3}, basis);
        auto g = gaussian_quantizer(3);
        REQUIRE(q.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) CHECK(q.probs[i] == doctest::Approx(g.cell_probs[i]).epsilon(1e-14));
        for (std::size_t k = 1; k < q.grid.size(); ++k) {
            CHECK(q.paths[0][k] < q.paths[1][k]);
            CHECK(q.paths[1][k] < q.paths[2][k]);
        }
    }
}

TEST_CASE("probabilities, start values and symmetry") {
    for (auto alloc : std::vector<std::vector<std::size_t>>{{1}, {2}, {3}, {5, 3}, {7, 5, 3}, {4, 4, 2, 2}}) {
        auto q = build_quantizer(OUParams{4.526, 0.04165, 0.01}, 1.0, 100, alloc);
        double total = 0.0;
        for (double p : q.probs) {
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
        for (const auto& path : q.paths) CHECK(path.front() == 0.01);
        CHECK(quadrature([](const PathView&) { return 1.0; }, q) == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto centered = build_quantizer(kCalibrated, 1.0, 100, {5, 3});
    CHECK(std::abs(quadrature([](const PathView& p) { return p.y.back(); }, centered)) <= 1e-10);
    CHECK_THROWS_AS(quadrature([](const PathView&) { return NAN; }, centered), NumericalError);
    CHECK_THROWS_AS(build_quantizer(kCalibrated, 1.0, 100, {}), InputError);
    CHECK_THROWS_AS(build_quantizer(kCalibrated, 1.0, 100, {3, 0}), InputError);
}

TEST_CASE("terminal variance converges along the allocation ladder") {
    std::vector<std::vector<std::size_t>> ladder{{1}, {3}, {5, 3}, {7, 5, 3}};
    double previous = 2.0;
    for (const auto& alloc : ladder) {
        const double err = terminal_square_error(build_quantizer(kCalibrated, 1.0, 252, alloc));
        CHECK(err < previous);
        previous = err;
    }
    const double q25 = terminal_square_error(build_quantizer(kCalibrated, 1.0, 252, {5, 5}));
    CHECK(q25 < 0.10);
    CHECK(ou_terminal_variance(kCalibrated, 1.0) == doctest::Approx(1.917e-4).epsilon(1e-3));
}

TEST_CASE("analytic derivatives match finite differences") {
    auto q = build_quantizer(kCalibrated, 1.0, 2000, {3, 3});
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t k = 1; k + 1 < q.grid.size(); ++k) {
            const double fd = (q.paths[i][k + 1] - q.paths[i][k - 1]) / (q.grid[k + 1] - q.grid[k - 1]);
            worst = std::max(worst, std::abs(fd - q.dpaths[i][k]));
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("daily grid by default and csv export") {
    auto q = build_quantizer(kCalibrated, 0.5, 0, {2});
    CHECK(q.grid.size() == 127);
    CHECK(q.grid.back() == 0.5);
    std::ostringstream out;
    write_quantizer_csv(q, out);
    CHECK(out.str().rfind("t,y_1,y_2,dy_1,dy_2\n", 0) == 0);
    auto header = quantizer_header_json(q);
    CHECK(header["probs"].size() == 2);
}
