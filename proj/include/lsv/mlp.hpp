#pragma once

#include "lsv/model.hpp"
#include "lsv/pricer.hpp"
#include "lsv/quantizer.hpp"

#include <span>

namespace lsv {

struct MlpResult {
    double value = 0.0;
    double effective_vol = 0.0;   ///< lognormal volatility used for the price
    double forward = 0.0;         ///< conditional forward used for the price
};

/// Most-likely-path approximation of a vanilla conditioned on one vol-factor path.
///
/// Pass 1 follows the proxy spot path running from s0 to the strike linearly
/// in log space, updates the running average along it, and integrates
/// (sig_t sigma_loc(S*_t / A*_t))^2 into an effective variance. Pass 2 uses the
/// pass-1 local volatilities to shift the forward by the conditional drift
/// integral of mu_t sigma_loc, then prices with the lognormal formula.
/// Throws InputError for non-vanilla products.
MlpResult price_mlp(const Product& product, const ModelParams& model, std::span<const double> grid,
                    std::span<const double> y, std::span<const double> dy);

PriceResult price_mlp(const Product& product, const ModelParams& model, const QuantizerSet& q);

}  // namespace lsv
