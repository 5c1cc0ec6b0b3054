#include "lsv/mlp.hpp"

#include "lsv/black.hpp"
#include "lsv/errors.hpp"
#include "lsv/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace lsv {

MlpResult price_mlp(const Product& product, const ModelParams& model, std::span<const double> grid,
                    std::span<const double> y, std::span<const double> dy) {
    double strike = 0.0;
    OptionType type = OptionType::call;
    if (const auto* c = std::get_if<VanillaCall>(&product)) {
        strike = c->strike;
    } else if (const auto* p = std::get_if<VanillaPut>(&product)) {
        strike = p->strike;
        type = OptionType::put;
    } else {
        throw InputError("price_mlp: only vanilla calls and puts are supported");
    }
    validate(product);
    model.validate();
    if (grid.size() != y.size() || grid.size() != dy.size() || grid.size() < 2) {
        throw InputError("price_mlp: grid, y and dy lengths differ");
    }
    const double T = maturity(product);
    if (grid.back() < T * (1.0 - 1e-12)) {
        throw InputError("price_mlp: factor path is shorter than the product maturity");
    }
    const auto coeffs = conditional_coeffs(y, dy, model.ou, model.rho);

    // Integration on the daily grid of the option.
    const auto t = daily_grid(T);
    const std::size_t m = t.size() - 1;
    const double log_moneyness = std::log(strike / model.s0);

    // Pass 1: proxy path and local volatilities at step midpoints.
    std::vector<double> var(m), drift(m);
    double a = model.a0;
    double s = model.s0;
    for (std::size_t i = 0; i < m; ++i) {
        const double h = t[i + 1] - t[i];
        const double tm = 0.5 * (t[i] + t[i + 1]);
        const double sm = model.s0 * std::exp(log_moneyness * tm / T);
        const double s_next = model.s0 * std::exp(log_moneyness * t[i + 1] / T);
        const double am = a + model.kappa_kernel * (s - a) * 0.5 * h;
        const double vol = model.localvol(sm / am);
        const double sg = interpolate(grid, coeffs.sig, tm);
        const double mu = interpolate(grid, coeffs.mu, tm);
        var[i] = sg * sg * vol * vol * h;
        drift[i] = mu * vol * h;
        a += model.kappa_kernel * (s - a) * h;
        s = s_next;
    }
    // Pass 2: drift shift of the forward from the pass-1 volatilities.
    const double shift = pairwise_sum(drift);
    MlpResult res;
    res.effective_vol = std::sqrt(pairwise_sum(var) / T);
    const double spot = model.s0 * std::exp(shift);
    res.forward = spot * std::exp((model.r - model.q) * T);
    res.value = black_formula(spot, strike, T, res.effective_vol, model.r, model.q, type);
    return res;
}

PriceResult price_mlp(const Product& product, const ModelParams& model, const QuantizerSet& q) {
    if (q.size() == 0) throw InputError("price_mlp: empty quantizer");
    if (q.horizon < maturity(product) * (1.0 - 1e-12)) {
        throw InputError("price_mlp: quantizer horizon is shorter than the product maturity");
    }
    PriceResult r;
    r.engine = "mlp";
    r.product = product_name(product);
    r.probs = q.probs;
    r.per_quantizer.resize(q.size());
    r.per_quantizer_se.assign(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        r.per_quantizer[i] = price_mlp(product, model, q.grid, q.paths[i], q.dpaths[i]).value;
    }
    std::vector<double> w(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) w[i] = q.probs[i] * r.per_quantizer[i];
    r.assembled = pairwise_sum(w);
    r.value = r.assembled;
    return r;
}

}  // namespace lsv
