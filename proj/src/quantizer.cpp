#include "lsv/quantizer.hpp"

#include "lsv/errors.hpp"
#include "lsv/market_data.hpp"
#include "lsv/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

namespace lsv {

double KLBasis::frequency(std::size_t k) const {
    return (static_cast<double>(k) - 0.5) * std::numbers::pi / horizon;
}

double KLBasis::eigenfunction(std::size_t k, double t) const {
    return std::sqrt(2.0 / horizon) * std::sin(frequency(k) * t);
}

double KLBasis::eigenfunction_derivative(std::size_t k, double t) const {
    return std::sqrt(2.0 / horizon) * frequency(k) * std::cos(frequency(k) * t);
}

KLBasis kl_coordinates(double horizon, std::size_t d) {
    if (d == 0) throw InputError("kl_coordinates: dimension must be >= 1");
    if (!(horizon > 0.0)) throw InputError("kl_coordinates: horizon must be positive");
    KLBasis basis;
    basis.horizon = horizon;
    basis.eigenvalues.resize(d);
    for (std::size_t k = 1; k <= d; ++k) {
        const double w = basis.frequency(k);
        basis.eigenvalues[k - 1] = 1.0 / (w * w);
    }
    return basis;
}

ScalarQuantizer gaussian_quantizer(std::size_t levels, double tolerance,
                                   std::size_t max_iterations) {
    if (levels == 0) throw InputError("gaussian_quantizer: need at least one level");
    ScalarQuantizer q;
    const std::size_t n = levels;
    q.points.resize(n);
    q.cell_probs.resize(n);
    if (n == 1) {
        q.points[0] = 0.0;
        q.cell_probs[0] = 1.0;
        return q;
    }
    for (std::size_t i = 0; i < n; ++i) {
        q.points[i] = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    }
    std::vector<double> edges(n + 1);
    auto update_cells = [&] {
        edges[0] = -std::numeric_limits<double>::infinity();
        edges[n] = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < n; ++i) edges[i] = 0.5 * (q.points[i - 1] + q.points[i]);
        for (std::size_t i = 0; i < n; ++i) {
            // Mass from the tail nearest to the cell keeps small probabilities accurate.
            const double lo = edges[i];
            const double hi = edges[i + 1];
            q.cell_probs[i] = hi <= 0.0 ? normal_cdf(hi) - normal_cdf(lo)
                                        : normal_cdf(-lo) - normal_cdf(-hi);
        }
    };
    for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
        update_cells();
        double move = 0.0;
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = edges[i];
            const double hi = edges[i + 1];
            const double dens_lo = std::isfinite(lo) ? normal_pdf(lo) : 0.0;
            const double dens_hi = std::isfinite(hi) ? normal_pdf(hi) : 0.0;
            next[i] = (dens_lo - dens_hi) / q.cell_probs[i];
        }
        // The fixed point is symmetric; enforce it exactly.
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double s = 0.5 * (next[n - 1 - i] - next[i]);
            next[i] = -s;
            next[n - 1 - i] = s;
        }
        if (n % 2 == 1) next[n / 2] = 0.0;
        for (std::size_t i = 0; i < n; ++i) move = std::max(move, std::abs(next[i] - q.points[i]));
        q.points = std::move(next);
        q.iterations = iter;
        if (move < tolerance) {
            update_cells();
            const double total = pairwise_sum(q.cell_probs);
            for (double& p : q.cell_probs) p /= total;
            return q;
        }
    }
    throw NumericalError("gaussian_quantizer: Lloyd iteration did not converge for " +
                         std::to_string(levels) + " levels");
}

namespace {

// A white-noise basis function h on [0, T] together with its OU response
// O(t) = int_0^t e^{-kappa (t - s)} h(s) ds.
struct NoiseMode {
    bool terminal = false;  // g(s) = e^{-kappa (T - s)}; otherwise sqrt(2/T) cos(omega s)
    double omega = 0.0;

    double value(double t, double kappa, double horizon) const {
        if (terminal) return std::exp(-kappa * (horizon - t));
        return std::sqrt(2.0 / horizon) * std::cos(omega * t);
    }

    double response(double t, double kappa, double horizon) const {
        if (terminal) {
            return (std::exp(-kappa * (horizon - t)) - std::exp(-kappa * (horizon + t))) /
                   (2.0 * kappa);
        }
        const double w = omega;
        return std::sqrt(2.0 / horizon) *
               (kappa * std::cos(w * t) + w * std::sin(w * t) - kappa * std::exp(-kappa * t)) /
               (kappa * kappa + w * w);
    }
};

}  // namespace

QuantizerSet build_quantizer(const OUParams& ou, double horizon, std::size_t grid_steps,
                             const std::vector<std::size_t>& allocation, QuantizerBasis basis) {
    if (!(ou.kappa_y > 0.0)) throw InputError("build_quantizer: kappa_y must be positive");
    if (!(ou.nu >= 0.0)) throw InputError("build_quantizer: nu must be nonnegative");
    if (!(horizon > 0.0)) throw InputError("build_quantizer: horizon must be positive");
    if (allocation.empty()) throw InputError("build_quantizer: empty level allocation");
    std::size_t total = 1;
    for (std::size_t levels : allocation) {
        if (levels == 0) throw InputError("build_quantizer: level counts must be >= 1");
        total *= levels;
    }

    const std::size_t d = allocation.size();
    const double kappa = ou.kappa_y;
    const KLBasis kl = kl_coordinates(horizon, d);

    std::vector<NoiseMode> modes;
    if (basis == QuantizerBasis::terminal_anchored) {
        modes.push_back({true, 0.0});
        for (std::size_t k = 1; k < d; ++k) modes.push_back({false, kl.frequency(k)});
    } else {
        for (std::size_t k = 1; k <= d; ++k) modes.push_back({false, kl.frequency(k)});
    }

    // Orthonormalize in L2[0, T] (Gram-Schmidt in the listed order via Cholesky).
    // For plain K-L modes the Gram matrix is the identity.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                     static_cast<Eigen::Index>(d));
    if (basis == QuantizerBasis::terminal_anchored) {
        gram(0, 0) = (1.0 - std::exp(-2.0 * kappa * horizon)) / (2.0 * kappa);
        for (std::size_t k = 1; k < d; ++k) {
            // <g, c_k> = int_0^T e^{-kappa (T - s)} c_k(s) ds, the OU response of c_k at T.
            const double v = modes[k].response(horizon, kappa, horizon);
            gram(0, static_cast<Eigen::Index>(k)) = v;
            gram(static_cast<Eigen::Index>(k), 0) = v;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("build_quantizer: degenerate basis");
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::MatrixXd coeff =
        lower.transpose().triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));

    QuantizerSet q;
    q.ou = ou;
    q.horizon = horizon;
    q.allocation = allocation;
    q.basis = basis;
    const std::size_t m = grid_steps == 0
                              ? std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(252.0 * horizon)))
                              : grid_steps;
    q.grid.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        q.grid[i] = horizon * static_cast<double>(i) / static_cast<double>(m);
    }
    q.grid[m] = horizon;

    // Per coordinate j: Y response R_j(t) and its derivative.
    std::vector<std::vector<double>> resp(d, std::vector<double>(m + 1));
    std::vector<std::vector<double>> dresp(d, std::vector<double>(m + 1));
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i <= m; ++i) {
            const double t = q.grid[i];
            double r = 0.0;
            double h = 0.0;
            for (std::size_t b = 0; b <= j; ++b) {
                const double c = coeff(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
                r += c * modes[b].response(t, kappa, horizon);
                h += c * modes[b].value(t, kappa, horizon);
            }
            resp[j][i] = ou.nu * r;
            dresp[j][i] = -kappa * ou.nu * r + ou.nu * h;
        }
    }

    std::vector<ScalarQuantizer> scalar;
    scalar.reserve(d);
    for (std::size_t levels : allocation) scalar.push_back(gaussian_quantizer(levels));

    q.paths.assign(total, std::vector<double>(m + 1));
    q.dpaths.assign(total, std::vector<double>(m + 1));
    q.probs.assign(total, 1.0);
    q.coordinates.assign(total, std::vector<double>(d));
    for (std::size_t idx = 0; idx < total; ++idx) {
        // Lexicographic order, first coordinate slowest.
        std::size_t rest = idx;
        for (std::size_t j = d; j-- > 0;) {
            const std::size_t level = rest % allocation[j];
            rest /= allocation[j];
            q.coordinates[idx][j] = scalar[j].points[level];
            q.probs[idx] *= scalar[j].cell_probs[level];
        }
        for (std::size_t i = 0; i <= m; ++i) {
            const double t = q.grid[i];
            const double mean_path = ou.y0 * std::exp(-kappa * t);
            double y = mean_path;
            double dy = -kappa * mean_path;
            for (std::size_t j = 0; j < d; ++j) {
                y += q.coordinates[idx][j] * resp[j][i];
                dy += q.coordinates[idx][j] * dresp[j][i];
            }
            q.paths[idx][i] = y;
            q.dpaths[idx][i] = dy;
        }
    }
    const double mass = pairwise_sum(q.probs);
    for (double& p : q.probs) p /= mass;
    return q;
}

PathView path_view(const QuantizerSet& q, std::size_t i) {
    return {q.grid, q.paths.at(i), q.dpaths.at(i)};
}

double quadrature(const std::function<double(const PathView&)>& functional, const QuantizerSet& q) {
    std::vector<double> terms(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double v = functional(path_view(q, i));
        if (!std::isfinite(v)) {
            throw NumericalError("quadrature: functional is not finite on path " + std::to_string(i));
        }
        terms[i] = q.probs[i] * v;
    }
    return pairwise_sum(terms);
}

void write_quantizer_csv(const QuantizerSet& q, std::ostream& out) {
    out << 't';
    for (std::size_t i = 1; i <= q.size(); ++i) out << ",y_" << i;
    for (std::size_t i = 1; i <= q.size(); ++i) out << ",dy_" << i;
    out << '\n';
    for (std::size_t k = 0; k < q.grid.size(); ++k) {
        out << format_double(q.grid[k]);
        for (const auto& p : q.paths) out << ',' << format_double(p[k]);
        for (const auto& p : q.dpaths) out << ',' << format_double(p[k]);
        out << '\n';
    }
}

nlohmann::json quantizer_header_json(const QuantizerSet& q) {
    return {{"probs", q.probs},
            {"allocation", q.allocation},
            {"coordinates", q.coordinates},
            {"basis", q.basis == QuantizerBasis::terminal_anchored ? "terminal_anchored" : "brownian_kl"},
            {"horizon", q.horizon},
            {"grid_steps", q.grid.size() - 1},
            {"ou", to_json(q.ou)}};
}

}  // namespace lsv
