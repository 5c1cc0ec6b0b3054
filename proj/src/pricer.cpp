#include "lsv/pricer.hpp"

#include "lsv/errors.hpp"
#include "lsv/kernel.hpp"
#include "lsv/numeric.hpp"
#include "lsv/rng.hpp"

#include <algorithm>
#include <cmath>

namespace lsv {

ConditionalCoeffs conditional_coeffs(std::span<const double> y, std::span<const double> dy,
                                     const OUParams& ou, double rho) {
    if (y.size() != dy.size()) throw InputError("conditional_coeffs: y and dy lengths differ");
    if (rho != 0.0 && !(ou.nu > 0.0)) {
        throw InputError("conditional_coeffs: nonzero rho needs nu > 0");
    }
    ConditionalCoeffs c;
    c.mu.resize(y.size());
    c.sig.resize(y.size());
    const double orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double ey = std::exp(y[i]);
        c.mu[i] = rho == 0.0 ? 0.0 : (rho / ou.nu) * (dy[i] + ou.kappa_y * y[i]) * ey;
        c.sig[i] = orth * ey;
    }
    return c;
}

PathStatistics simulate_conditional(const ModelParams& model, const ConditionalCoeffs& coeffs,
                                    std::span<const double> grid, std::size_t n_paths,
                                    std::uint64_t seed, std::uint32_t stream,
                                    const SimulationOptions& options,
                                    std::vector<std::vector<double>>* kept_paths) {
    if (grid.size() < 2) throw InputError("simulate_conditional: grid needs at least two times");
    if (coeffs.mu.size() != grid.size() || coeffs.sig.size() != grid.size()) {
        throw InputError("simulate_conditional: grid and coefficient lengths differ");
    }
    if (n_paths == 0) throw InputError("simulate_conditional: n_paths must be >= 1");
    const std::size_t steps = grid.size() - 1;
    std::vector<double> dt(steps), sqdt(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        dt[i] = grid[i + 1] - grid[i];
        if (!(dt[i] > 0.0)) throw InputError("simulate_conditional: grid must be increasing");
        sqdt[i] = std::sqrt(dt[i]);
        if (model.kappa_kernel * dt[i] >= 1.0) {
            throw InputError("simulate_conditional: kappa_kernel * dt must be below 1");
        }
    }

    PathStatistics out;
    out.terminal.resize(n_paths);
    out.running_max.resize(n_paths);
    out.realized_variance.resize(n_paths);
    const std::size_t keep = kept_paths ? std::min(options.keep_paths, n_paths) : 0;
    if (kept_paths) kept_paths->assign(keep, std::vector<double>(grid.size()));

    const double carry = model.r - model.q;
    const double s_floor = 1e-8 * model.s0;
    const double annual = 252.0 / static_cast<double>(steps);
    const LocalVolFn& lv = model.localvol;

    parallel_for(n_paths, options.threads, [&](std::size_t p) {
        NormalStream rng(seed, stream, p, StreamDomain::spot);
        double s = model.s0;
        double a = model.a0;
        double smax = 0.0;
        double rv = 0.0;
        double* kept = p < keep ? (*kept_paths)[p].data() : nullptr;
        if (kept) kept[0] = s;
        for (std::size_t i = 0; i < steps; ++i) {
            const double vol = lv(s / a);
            const double eps = rng.next();
            double next = s * (1.0 + carry * dt[i] + coeffs.mu[i] * vol * dt[i] +
                               coeffs.sig[i] * vol * eps * sqdt[i]);
            next = std::max(next, s_floor);
            a += model.kappa_kernel * (s - a) * dt[i];
            if (options.realized_variance) {
                const double lr = std::log(next / s);
                rv += lr * lr;
            }
            s = next;
            smax = std::max(smax, s);
            if (kept) kept[i + 1] = s;
        }
        out.terminal[p] = s;
        out.running_max[p] = smax;
        out.realized_variance[p] = annual * rv;
    });
    return out;
}

double realized_variance(std::span<const double> path) {
    if (path.size() < 2) throw InputError("realized_variance: path needs at least two points");
    std::vector<double> sq(path.size() - 1);
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (!(path[i] > 0.0)) throw InputError("realized_variance: non-positive spot in path");
        if (i > 0) {
            const double lr = std::log(path[i] / path[i - 1]);
            sq[i - 1] = lr * lr;
        }
    }
    return 252.0 / static_cast<double>(sq.size()) * pairwise_sum(sq);
}

double variance_swap_quote(std::span<const double> realized) {
    if (realized.empty()) throw InputError("variance_swap_quote: empty sample");
    return 100.0 * std::sqrt(mean(realized));
}

double volatility_swap_quote(std::span<const double> realized) {
    if (realized.empty()) throw InputError("volatility_swap_quote: empty sample");
    std::vector<double> v(realized.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(realized[i]);
    return 100.0 * mean(v);
}

double interpolate(std::span<const double> grid, std::span<const double> values, double t) {
    if (grid.empty() || grid.size() != values.size()) {
        throw InputError("interpolate: grid and values lengths differ");
    }
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
}

std::vector<double> daily_grid(double maturity) {
    if (!(maturity > 0.0)) throw InputError("daily_grid: maturity must be positive");
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(252.0 * maturity)));
    std::vector<double> g(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        g[i] = maturity * static_cast<double>(i) / static_cast<double>(steps);
    }
    g.back() = maturity;
    return g;
}

namespace {

struct SampleMoments {
    double mean = 0.0;
    double se = 0.0;
};

SampleMoments moments(std::span<const double> v) {
    SampleMoments m;
    m.mean = mean(v);
    m.se = std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
    return m;
}

std::vector<double> payoffs(const Product& product, const ModelParams& model,
                            const PathStatistics& stats) {
    const std::size_t n = stats.terminal.size();
    std::vector<double> v(n);
    const double df = std::exp(-model.r * maturity(product));
    if (const auto* c = std::get_if<VanillaCall>(&product)) {
        for (std::size_t i = 0; i < n; ++i) v[i] = df * std::max(stats.terminal[i] - c->strike, 0.0);
    } else if (const auto* p = std::get_if<VanillaPut>(&product)) {
        for (std::size_t i = 0; i < n; ++i) v[i] = df * std::max(p->strike - stats.terminal[i], 0.0);
    } else if (const auto* u = std::get_if<UpAndOutCall>(&product)) {
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = stats.running_max[i] >= u->barrier ? 0.0
                                                      : df * std::max(stats.terminal[i] - u->strike, 0.0);
        }
    } else if (std::holds_alternative<VarianceSwap>(product)) {
        for (std::size_t i = 0; i < n; ++i) v[i] = 1e4 * stats.realized_variance[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) v[i] = 100.0 * std::sqrt(stats.realized_variance[i]);
    }
    return v;
}

void finish(PriceResult& r, bool variance_swap) {
    std::vector<double> weighted(r.probs.size()), weighted_var(r.probs.size());
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
        weighted[i] = r.probs[i] * r.per_quantizer[i];
        const double s = r.probs[i] * r.per_quantizer_se[i];
        weighted_var[i] = s * s;
    }
    r.assembled = pairwise_sum(weighted);
    const double se = std::sqrt(pairwise_sum(weighted_var));
    if (variance_swap) {
        r.value = std::sqrt(std::max(r.assembled, 0.0));
        r.std_error = r.value > 0.0 ? se / (2.0 * r.value) : 0.0;
    } else {
        r.value = r.assembled;
        r.std_error = se;
    }
}

}  // namespace

std::vector<PriceResult> price_mc(std::span<const Product> products, const ModelParams& model,
                                  const QuantizerSet& q, std::size_t n_paths, std::uint64_t seed,
                                  const McOptions& options) {
    if (products.empty()) return {};
    model.validate();
    const double mat = maturity(products.front());
    for (const auto& p : products) {
        validate(p);
        if (maturity(p) != mat) throw InputError("price_mc: products must share a maturity");
    }
    if (q.size() == 0) throw InputError("price_mc: empty quantizer");
    if (q.horizon < mat * (1.0 - 1e-12)) {
        throw InputError("price_mc: quantizer horizon is shorter than the product maturity");
    }
    const auto grid = daily_grid(mat);

    std::vector<PriceResult> results(products.size());
    for (std::size_t k = 0; k < products.size(); ++k) {
        results[k].engine = "mc";
        results[k].product = product_name(products[k]);
        results[k].probs = q.probs;
        results[k].per_quantizer.resize(q.size());
        results[k].per_quantizer_se.resize(q.size());
        results[k].n_paths = n_paths;
    }

    SimulationOptions sim;
    sim.threads = options.threads;
    sim.realized_variance = std::any_of(products.begin(), products.end(), [](const Product& p) {
        return std::holds_alternative<VarianceSwap>(p) || std::holds_alternative<VolatilitySwap>(p);
    });
    std::vector<double> y(grid.size()), dy(grid.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            y[j] = interpolate(q.grid, q.paths[i], grid[j]);
            dy[j] = interpolate(q.grid, q.dpaths[i], grid[j]);
        }
        const auto coeffs = conditional_coeffs(y, dy, model.ou, model.rho);
        const auto stats = simulate_conditional(model, coeffs, grid, n_paths, seed,
                                                static_cast<std::uint32_t>(i), sim);
        for (std::size_t k = 0; k < products.size(); ++k) {
            const auto m = moments(payoffs(products[k], model, stats));
            results[k].per_quantizer[i] = m.mean;
            results[k].per_quantizer_se[i] = m.se;
        }
    }
    for (std::size_t k = 0; k < products.size(); ++k) {
        finish(results[k], std::holds_alternative<VarianceSwap>(products[k]));
    }
    return results;
}

PriceResult price_mc(const Product& product, const ModelParams& model, const QuantizerSet& q,
                     std::size_t n_paths, std::uint64_t seed, const McOptions& options) {
    return price_mc(std::span<const Product>(&product, 1), model, q, n_paths, seed, options).front();
}

nlohmann::json to_json(const PriceResult& r) {
    return {{"engine", r.engine},
            {"product", r.product},
            {"value", r.value},
            {"std_error", r.std_error},
            {"assembled", r.assembled},
            {"n_paths", r.n_paths},
            {"probs", r.probs},
            {"per_quantizer", r.per_quantizer},
            {"per_quantizer_se", r.per_quantizer_se}};
}

}  // namespace lsv
