#pragma once

#include "lsv/model.hpp"
#include "lsv/quantizer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsv {

/// Drift and volatility multipliers of the spot conditioned on one
/// vol-factor path:
///   mu_t  = (rho / nu) (y'_t + kappa_y y_t) e^{y_t}
///   sig_t = sqrt(1 - rho^2) e^{y_t}
struct ConditionalCoeffs {
    std::vector<double> mu;
    std::vector<double> sig;
};

/// Throws InputError on length mismatch, or rho != 0 with nu == 0.
ConditionalCoeffs conditional_coeffs(std::span<const double> y, std::span<const double> dy,
                                     const OUParams& ou, double rho);

/// Per-path statistics of one conditional simulation, indexed by path.
struct PathStatistics {
    std::vector<double> terminal;            ///< S_T
    std::vector<double> running_max;         ///< max over fixings t_1..t_M
    std::vector<double> realized_variance;   ///< (252/N) sum ln(S_i/S_{i-1})^2
};

struct SimulationOptions {
    unsigned threads = 1;
    /// Keep the per-step spot path of the first `keep_paths` paths.
    std::size_t keep_paths = 0;
    /// Accumulate realized variance (left at 0 otherwise).
    bool realized_variance = true;
};

/// Euler scheme for the conditional spot with the running average state:
///   S_{i+1} = S_i (1 + (r-q) D + mu_i s_i D + sig_i s_i eps_i sqrt(D)),
///   s_i = localvol(S_i / A_i),  A_{i+1} = A_i + kappa (S_i - A_i) D.
/// `grid` has M + 1 times starting at 0; coefficients are read at t_0..t_{M-1}.
/// Path p of stream `stream` draws from the substream (seed, stream, p), so the
/// result does not depend on `threads`.
PathStatistics simulate_conditional(const ModelParams& model, const ConditionalCoeffs& coeffs,
                                    std::span<const double> grid, std::size_t n_paths,
                                    std::uint64_t seed, std::uint32_t stream = 0,
                                    const SimulationOptions& options = {},
                                    std::vector<std::vector<double>>* kept_paths = nullptr);

/// Realized variance of one daily path, annualized with 252 / N.
/// Throws InputError for fewer than two points or a non-positive spot.
double realized_variance(std::span<const double> path);
/// 100 sqrt(E[RV]) and 100 E[sqrt(RV)] over a sample of realized variances.
double variance_swap_quote(std::span<const double> realized);
double volatility_swap_quote(std::span<const double> realized);

/// Price assembled from conditional prices with companion weights.
struct PriceResult {
    std::string engine;
    std::string product;
    /// Quote: discounted price for options, volatility points for swaps.
    double value = 0.0;
    double std_error = 0.0;
    /// Conditional values per quantizer path. For options they are discounted
    /// prices; for variance swaps conditional fair variances (points^2);
    /// for volatility swaps conditional quotes (points).
    std::vector<double> per_quantizer;
    std::vector<double> per_quantizer_se;
    std::vector<double> probs;
    /// sum_i probs[i] per_quantizer[i]; equals `value` except for variance
    /// swaps, where value = sqrt(assembled).
    double assembled = 0.0;
    std::size_t n_paths = 0;  ///< per quantizer path
};

struct McOptions {
    unsigned threads = 1;
};

/// Hybrid engine: for each quantizer path, conditional coefficients, then
/// Monte Carlo on the spot. Throws InputError when the quantizer horizon is
/// shorter than the product maturity.
PriceResult price_mc(const Product& product, const ModelParams& model, const QuantizerSet& q,
                     std::size_t n_paths, std::uint64_t seed, const McOptions& options = {});

/// Several products on the same simulated paths (they must share a maturity).
std::vector<PriceResult> price_mc(std::span<const Product> products, const ModelParams& model,
                                  const QuantizerSet& q, std::size_t n_paths,
                                  std::uint64_t seed, const McOptions& options = {});

/// Linear interpolation of a path sampled on `grid` at time t (clamped to the ends).
double interpolate(std::span<const double> grid, std::span<const double> values, double t);

/// Uniform simulation grid with one step per trading day (at least one step).
std::vector<double> daily_grid(double maturity);

nlohmann::json to_json(const PriceResult& r);

}  // namespace lsv
