#include "lsv/optimizer.hpp"

#include "lsv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace lsv {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> lbfgs_direction(const std::deque<Pair>& memory, const std::vector<double>& g) {
    std::vector<double> q(g);
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
        alpha[k] = memory[k].rho * dot(memory[k].s, q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * memory[k].y[i];
    }
    if (!memory.empty()) {
        const auto& last = memory.back();
        const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (double& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
        const double beta = memory[k].rho * dot(memory[k].y, q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * memory[k].s[i];
    }
    for (double& v : q) v = -v;
    return q;
}

}  // namespace

LbfgsResult minimize_lbfgs(const GradientObjective& objective, std::vector<double> x0,
                           const LbfgsOptions& options) {
    LbfgsResult result;
    const std::size_t n = x0.size();
    std::vector<double> x = std::move(x0);
    std::vector<double> g(n);
    double f = objective(x, g);
    ++result.evaluations;
    if (!std::isfinite(f)) throw NumericalError("objective is not finite at the starting point");
    result.trace.push_back(f);

    std::deque<Pair> memory;
    std::vector<double> x_new(n);
    std::vector<double> g_new(n);
    result.status = "iteration budget exhausted";

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        if (max_abs(g) <= options.gradient_tolerance * std::max(1.0, std::abs(f))) {
            result.converged = true;
            result.status = "gradient below tolerance";
            break;
        }
        std::vector<double> d = lbfgs_direction(memory, g);
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            memory.clear();
            d = g;
            for (double& v : d) v = -v;
            slope = dot(g, d);
        }
        // First step of a fresh memory: unit move in the largest coordinate.
        double step = memory.empty() ? std::min(1.0, 1.0 / max_abs(d)) : 1.0;

        bool accepted = false;
        double f_new = f;
        for (std::size_t bt = 0; bt <= options.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
            f_new = objective(x_new, g_new);
            ++result.evaluations;
            if (std::isfinite(f_new) && f_new <= f + options.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= options.backtrack;
        }
        if (!accepted) {
            if (!memory.empty()) {
                // Retry along steepest descent before giving up.
                memory.clear();
                --iter;
                continue;
            }
            result.status = "line search failed";
            result.converged = true;
            break;
        }

        Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = x_new[i] - x[i];
            p.y[i] = g_new[i] - g[i];
        }
        const double sy = dot(p.s, p.y);
        if (sy > 1e-300) {
            p.rho = 1.0 / sy;
            memory.push_back(std::move(p));
            if (memory.size() > options.memory) memory.pop_front();
        }

        const double decrease = f - f_new;
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
        result.trace.push_back(f);
        ++result.iterations;
        if (decrease <= options.relative_tolerance * std::max(1.0, std::abs(f))) {
            result.converged = true;
            result.status = "relative decrease below tolerance";
            break;
        }
    }
    result.x = std::move(x);
    result.value = f;
    return result;
}

}  // namespace lsv
