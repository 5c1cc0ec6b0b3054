#include "lsv/kernel.hpp"

#include "lsv/errors.hpp"
#include "lsv/market_data.hpp"
#include "lsv/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace lsv {

Kernel::Kernel(std::vector<double> weights, std::string family, std::vector<double> params)
    : weights_(std::move(weights)), family_(std::move(family)), params_(std::move(params)) {
    if (weights_.empty()) throw InputError("kernel needs at least one weight");
    for (double w : weights_) {
        if (!std::isfinite(w)) throw InputError("kernel weights must be finite");
        if (w < 0.0) throw InputError("kernel weights must be nonnegative");
    }
    const double total = pairwise_sum(weights_);
    if (!(total > 0.0)) throw InputError("kernel weights sum to zero");
    for (double& w : weights_) w /= total;
}

Kernel flat_kernel(std::size_t n) {
    if (n == 0) throw InputError("flat_kernel: n must be >= 1");
    return Kernel(std::vector<double>(n, 1.0 / static_cast<double>(n)), "flat",
                  {static_cast<double>(n)});
}

Kernel exp_kernel(double kappa_per_day, std::size_t n) {
    if (n == 0) throw InputError("exp_kernel: n must be >= 1");
    if (!(kappa_per_day >= 0.0) || !std::isfinite(kappa_per_day)) {
        throw InputError("exp_kernel: decay rate must be finite and >= 0");
    }
    // Relative to lag 1 so that large rates do not underflow the whole vector.
    std::vector<double> w(n);
    for (std::size_t j = 1; j <= n; ++j) {
        w[j - 1] = std::exp(-kappa_per_day * static_cast<double>(j - 1));
    }
    return Kernel(std::move(w), "exponential", {kappa_per_day});
}

Kernel powerlaw_kernel(const std::array<double, 3>& p, std::size_t n) {
    if (n == 0) throw InputError("powerlaw_kernel: n must be >= 1");
    std::vector<double> logw(n);
    for (std::size_t j = 1; j <= n; ++j) {
        const double l = std::log(static_cast<double>(j));
        logw[j - 1] = p[0] + p[1] * l + p[2] * l * l;
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) throw InputError("powerlaw_kernel: non-finite weights");
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        w[j] = std::exp(logw[j] - top);
        if (!std::isfinite(w[j])) throw InputError("powerlaw_kernel: non-finite weights");
    }
    return Kernel(std::move(w), "powerlaw", {p[0], p[1], p[2]});
}

void softmax_into(std::span<const double> psi, std::span<double> out) {
    const double top = *std::max_element(psi.begin(), psi.end());
    for (std::size_t i = 0; i < psi.size(); ++i) out[i] = std::exp(psi[i] - top);
    const double total = pairwise_sum(std::span<const double>(out.data(), out.size()));
    for (double& w : out) w /= total;
}

Kernel softmax_weights(std::span<const double> psi) {
    if (psi.empty()) throw InputError("softmax_weights: empty parameter vector");
    for (double v : psi) {
        if (!std::isfinite(v)) throw InputError("softmax_weights: non-finite parameter");
    }
    std::vector<double> w(psi.size());
    softmax_into(psi, w);
    return Kernel(std::move(w), "softmax");
}

std::vector<double> scale_index(std::span<const double> prices, const Kernel& kernel) {
    const std::size_t n = kernel.size();
    if (prices.size() <= n) {
        throw InputError("scale_index: series of length " + std::to_string(prices.size()) +
                         " is too short for a kernel of " + std::to_string(n) + " lags");
    }
    const auto w = kernel.weights();
    std::vector<double> out(prices.size() - n);
    for (std::size_t t = n; t < prices.size(); ++t) {
        double avg = 0.0;
        for (std::size_t j = 1; j <= n; ++j) avg += w[j - 1] * prices[t - j];
        out[t - n] = prices[t] / avg;
    }
    return out;
}

IndexSeries scale_index(const MarketSeries& prices, const Kernel& kernel) {
    IndexSeries out;
    out.values = scale_index(prices.values(), kernel);
    out.dates.assign(prices.dates().begin() + static_cast<std::ptrdiff_t>(kernel.size()),
                     prices.dates().end());
    return out;
}

double ewma_state_update(double average, double spot, double kappa_per_year, double dt) {
    if (!(average > 0.0) || !(spot > 0.0) || !(dt > 0.0)) {
        throw InputError("ewma_state_update: average, spot and dt must be positive");
    }
    if (!(kappa_per_year >= 0.0)) throw InputError("ewma_state_update: negative rate");
    if (kappa_per_year * dt >= 1.0) {
        throw InputError("ewma_state_update: unstable step, kappa * dt >= 1");
    }
    return average + kappa_per_year * (spot - average) * dt;
}

double mean_lag(const Kernel& kernel) {
    double m = 0.0;
    const auto w = kernel.weights();
    for (std::size_t j = 1; j <= w.size(); ++j) m += static_cast<double>(j) * w[j - 1];
    return m;
}

double equivalent_ewma_rate(const Kernel& kernel, double days_per_year) {
    return days_per_year / mean_lag(kernel);
}

nlohmann::json kernel_to_json(const Kernel& kernel) {
    return {{"type", kernel.family()},
            {"params", kernel.params()},
            {"n", kernel.size()},
            {"weights", std::vector<double>(kernel.weights().begin(), kernel.weights().end())}};
}

Kernel kernel_from_json(const nlohmann::json& j) {
    try {
        auto w = j.at("weights").get<std::vector<double>>();
        if (j.contains("n") && j.at("n").get<std::size_t>() != w.size()) {
            throw InputError("kernel json: n does not match the number of weights");
        }
        return Kernel(std::move(w), j.value("type", std::string("custom")),
                      j.value("params", std::vector<double>{}));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("kernel json: ") + e.what());
    }
}

void write_kernel_csv(const Kernel& kernel, std::ostream& out) {
    out << "lag,weight\n";
    const auto w = kernel.weights();
    for (std::size_t j = 1; j <= w.size(); ++j) out << j << ',' << format_double(w[j - 1]) << '\n';
}

}  // namespace lsv
