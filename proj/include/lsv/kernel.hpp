#pragma once

#include "lsv/date.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsv {

class MarketSeries;

/// Nonnegative lag weights on the probability simplex.
///
/// `weights()[j - 1]` applies to the price j trading days before today
/// (lag 1 = yesterday). In the oldest-first notation phi_1..phi_n used for
/// moving averages, phi_k corresponds to lag n + 1 - k.
class Kernel {
public:
    /// Normalizes `weights` to sum 1. Throws InputError on an empty vector,
    /// negative or non-finite entries, or an all-zero vector.
    explicit Kernel(std::vector<double> weights, std::string family = "custom",
                    std::vector<double> params = {});

    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    /// Weight of lag `lag`, 1-based.
    double at_lag(std::size_t lag) const { return weights_.at(lag - 1); }

    /// Constructor family ("flat", "exponential", "powerlaw", "softmax", "custom")
    /// and the parameters it was built from, kept for serialization.
    const std::string& family() const { return family_; }
    const std::vector<double>& params() const { return params_; }

    bool operator==(const Kernel&) const = default;

private:
    std::vector<double> weights_;
    std::string family_;
    std::vector<double> params_;
};

Kernel flat_kernel(std::size_t n);

/// weights[j] proportional to exp(-kappa_per_day * j).
Kernel exp_kernel(double kappa_per_day, std::size_t n);

/// weights[j] proportional to exp(p0 + p1 ln j + p2 (ln j)^2).
Kernel powerlaw_kernel(const std::array<double, 3>& p, std::size_t n);

/// Softmax of free parameters, stabilized by subtracting max(psi).
Kernel softmax_weights(std::span<const double> psi);
/// Same map written into `out` without building a Kernel (optimizer hot path).
void softmax_into(std::span<const double> psi, std::span<double> out);

/// Dimensionless ratio of spot to its kernel-weighted past.
struct IndexSeries {
    std::vector<Date> dates;
    std::vector<double> values;
};

/// values[t] = S_t / sum_j w_j S_{t-j}, defined from row n onward.
/// Throws InputError when prices has n rows or fewer.
IndexSeries scale_index(const MarketSeries& prices, const Kernel& kernel);
std::vector<double> scale_index(std::span<const double> prices, const Kernel& kernel);

/// One explicit step of dA = kappa (S - A) dt.
/// Throws InputError for non-positive inputs or kappa * dt >= 1.
double ewma_state_update(double average, double spot, double kappa_per_year, double dt);

/// Mean lag in trading days, sum_j j w_j.
double mean_lag(const Kernel& kernel);

/// EWMA rate (per year) with the same mean lag as `kernel`:
/// an EWMA step of size dt has mean lag 1 / (kappa dt) steps.
double equivalent_ewma_rate(const Kernel& kernel, double days_per_year = 252.0);

nlohmann::json kernel_to_json(const Kernel& kernel);
Kernel kernel_from_json(const nlohmann::json& j);
/// `lag,weight` rows, lag 1..n.
void write_kernel_csv(const Kernel& kernel, std::ostream& out);

}  // namespace lsv
