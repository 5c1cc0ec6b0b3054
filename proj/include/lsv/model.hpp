#pragma once

#include "lsv/calibration.hpp"

#include <limits>
#include <string>
#include <variant>

#include <json.hpp>

namespace lsv {

/// Local volatility as a quadratic in the scale-invariant index.
///
/// sigma_loc(I) = clamp(scale * (a + b I' + c I'^2), floor, cap) with
/// I' = clamp(I, index_lo, index_hi). Coefficients are in volatility points.
struct LocalVolFn {
    double a = 20.0;
    double b = 0.0;
    double c = 0.0;
    double scale = 0.01;
    double floor = 0.01;
    double cap = 2.0;
    double index_lo = 0.0;
    double index_hi = std::numeric_limits<double>::infinity();

    double operator()(double index) const;

    /// Constant volatility `vol` (decimal) for every index.
    static LocalVolFn flat(double vol);
    /// From a fitted quadratic; the index is clamped to the observed range widened by 20%.
    static LocalVolFn from_fit(const QuadraticFit& fit, double observed_lo, double observed_hi);

    void validate() const;
};

/// Complete pricing model.
struct ModelParams {
    double r = 0.0;             ///< risk-free rate, per year
    double q = 0.0;             ///< dividend yield, per year
    double rho = 0.0;           ///< spot / vol-factor correlation
    OUParams ou;
    double kappa_kernel = 12.0; ///< EWMA rate of the running average, per year
    LocalVolFn localvol;
    double s0 = 100.0;
    double a0 = 100.0;          ///< initial running average; I_0 = s0 / a0

    /// Throws InputError when an invariant fails.
    void validate() const;

    /// Same model with spot and running average multiplied by `factor`.
    ModelParams scaled(double factor) const;
};

struct VanillaCall { double strike; double maturity; };
struct VanillaPut { double strike; double maturity; };
/// Knocked out when any daily fixing after inception reaches the barrier.
struct UpAndOutCall { double strike; double barrier; double maturity; };
struct VarianceSwap { double maturity; };
struct VolatilitySwap { double maturity; };

using Product = std::variant<VanillaCall, VanillaPut, UpAndOutCall, VarianceSwap, VolatilitySwap>;

double maturity(const Product& product);
std::string product_name(const Product& product);
/// Throws InputError on K <= 0, B <= K, or T <= 0.
void validate(const Product& product);

/// Same contract with strike and barrier multiplied by `factor`.
Product scaled(const Product& product, double factor);

nlohmann::json to_json(const LocalVolFn& f);
nlohmann::json to_json(const ModelParams& m);
nlohmann::json to_json(const Product& p);
LocalVolFn localvol_from_json(const nlohmann::json& j);
ModelParams model_from_json(const nlohmann::json& j);
/// Accepts {"type": "vanilla_call" | "vanilla_put" | "up_and_out_call" |
/// "variance_swap" | "volatility_swap", "strike", "barrier", "maturity"}.
/// Throws InputError naming the offending field.
Product product_from_json(const nlohmann::json& j);

}  // namespace lsv
