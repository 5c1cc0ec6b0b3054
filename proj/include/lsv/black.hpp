#pragma once

namespace lsv {

enum class OptionType { call, put };

/// Lognormal (Black-Scholes) price with continuous rate and dividend yield.
/// vol == 0 or T == 0 gives the discounted intrinsic value on the forward.
double black_formula(double spot, double strike, double maturity, double vol, double rate,
                     double dividend, OptionType type);

double black_vega(double spot, double strike, double maturity, double vol, double rate,
                  double dividend);

/// Inverts black_formula by Newton steps safeguarded with bisection, to 1e-10
/// in volatility. Throws InputError when the price violates no-arbitrage bounds.
double implied_vol(double price, double spot, double strike, double maturity, double rate,
                   double dividend, OptionType type);

}  // namespace lsv
