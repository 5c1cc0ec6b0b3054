#include "lsv/black.hpp"

#include "lsv/errors.hpp"
#include "lsv/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace lsv {

double black_formula(double spot, double strike, double maturity, double vol, double rate,
                     double dividend, OptionType type) {
    const double df = std::exp(-rate * maturity);
    const double forward = spot * std::exp((rate - dividend) * maturity);
    const double sign = type == OptionType::call ? 1.0 : -1.0;
    const double stdev = vol * std::sqrt(maturity);
    if (!(stdev > 0.0)) return df * std::max(sign * (forward - strike), 0.0);
    const double d1 = (std::log(forward / strike) + 0.5 * stdev * stdev) / stdev;
    const double d2 = d1 - stdev;
    return df * sign * (forward * normal_cdf(sign * d1) - strike * normal_cdf(sign * d2));
}

double black_vega(double spot, double strike, double maturity, double vol, double rate,
                  double dividend) {
    const double forward = spot * std::exp((rate - dividend) * maturity);
    const double stdev = vol * std::sqrt(maturity);
    if (!(stdev > 0.0)) return 0.0;
    const double d1 = (std::log(forward / strike) + 0.5 * stdev * stdev) / stdev;
    return std::exp(-rate * maturity) * forward * normal_pdf(d1) * std::sqrt(maturity);
}

double implied_vol(double price, double spot, double strike, double maturity, double rate,
                   double dividend, OptionType type) {
    const double df = std::exp(-rate * maturity);
    const double forward = spot * std::exp((rate - dividend) * maturity);
    const double intrinsic = type == OptionType::call ? df * std::max(forward - strike, 0.0)
                                                      : df * std::max(strike - forward, 0.0);
    const double upper = type == OptionType::call ? df * forward : df * strike;
    if (!(price > intrinsic) || !(price < upper) || !(maturity > 0.0)) {
        throw InputError("implied_vol: price outside no-arbitrage bounds");
    }
    double lo = 0.0;
    double hi = 1.0;
    while (black_formula(spot, strike, maturity, hi, rate, dividend, type) < price) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e3) throw InputError("implied_vol: price requires volatility above 1000");
    }
    double vol = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double diff = black_formula(spot, strike, maturity, vol, rate, dividend, type) - price;
        if (diff > 0.0) hi = vol; else lo = vol;
        const double vega = black_vega(spot, strike, maturity, vol, rate, dividend);
        double next = vega > 0.0 ? vol - diff / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - vol) < 1e-14 || hi - lo < 1e-14) {
            vol = next;
            break;
        }
        vol = next;
    }
    return vol;
}

}  // namespace lsv
