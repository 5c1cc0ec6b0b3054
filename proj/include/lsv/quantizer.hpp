#pragma once

#include "lsv/calibration.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

namespace lsv {

/// First d Karhunen-Loeve eigenpairs of Brownian motion on [0, T]:
/// e_k(t) = sqrt(2/T) sin(omega_k t), lambda_k = 1 / omega_k^2,
/// omega_k = (k - 1/2) pi / T.
struct KLBasis {
    double horizon = 1.0;
    std::vector<double> eigenvalues;

    double frequency(std::size_t k) const;  ///< omega_k, k 1-based
    double eigenfunction(std::size_t k, double t) const;
    double eigenfunction_derivative(std::size_t k, double t) const;
};

/// Throws InputError for d == 0 or T <= 0.
KLBasis kl_coordinates(double horizon, std::size_t d);

/// Stationary (Lloyd) quantizer of the standard normal.
struct ScalarQuantizer {
    std::vector<double> points;      ///< increasing cell centroids
    std::vector<double> cell_probs;  ///< normal mass of each Voronoi cell
    std::size_t iterations = 0;
};

/// Lloyd fixed point started from normal quantiles; converged when the largest
/// centroid move drops below `tolerance`. Throws NumericalError past `max_iterations`.
ScalarQuantizer gaussian_quantizer(std::size_t levels, double tolerance = 1e-10,
                                   std::size_t max_iterations = 10000);

/// How Gaussian coordinates map to driving Brownian paths.
enum class QuantizerBasis {
    /// Coordinate 1 is the normalized terminal value Y_T; the rest are the
    /// Brownian K-L modes orthogonalized against it.
    terminal_anchored,
    /// Plain Brownian K-L modes.
    brownian_kl,
};

/// Q deterministic OU paths with derivatives and companion probabilities.
struct QuantizerSet {
    OUParams ou;
    double horizon = 0.0;
    std::vector<double> grid;                 ///< 0 = t_0 < ... < t_M = T
    std::vector<std::vector<double>> paths;   ///< Q x (M + 1)
    std::vector<std::vector<double>> dpaths;  ///< Q x (M + 1), dY/dt
    std::vector<double> probs;                ///< Q companion probabilities
    std::vector<std::vector<double>> coordinates;  ///< Q x d quantized Gaussian coordinates
    std::vector<std::size_t> allocation;
    QuantizerBasis basis = QuantizerBasis::terminal_anchored;

    std::size_t size() const { return paths.size(); }
};

/// Product quantizer of the OU factor. For every combination of 1-D optimal
/// normal quantizer points z, the Brownian path W = sum_k z_k int h_k is mapped
/// exactly to y(t) = y0 e^{-kt} + nu int_0^t e^{-k(t-s)} dW(s); derivatives are
/// analytic and probabilities are products of 1-D cell masses. `grid_steps == 0`
/// means one step per trading day. Throws InputError for a zero or empty allocation.
QuantizerSet build_quantizer(const OUParams& ou, double horizon, std::size_t grid_steps,
                             const std::vector<std::size_t>& allocation,
                             QuantizerBasis basis = QuantizerBasis::terminal_anchored);

/// Read-only view of quantizer path i.
struct PathView {
    std::span<const double> t;
    std::span<const double> y;
    std::span<const double> dy;
};

PathView path_view(const QuantizerSet& q, std::size_t i);

/// sum_i probs[i] F(path_i). Throws NumericalError when F is non-finite on a path.
double quadrature(const std::function<double(const PathView&)>& functional, const QuantizerSet& q);

/// `t,y_1..y_Q,dy_1..dy_Q` rows.
void write_quantizer_csv(const QuantizerSet& q, std::ostream& out);
/// Probabilities, allocation, OU parameters and quantized coordinates.
nlohmann::json quantizer_header_json(const QuantizerSet& q);

}  // namespace lsv
