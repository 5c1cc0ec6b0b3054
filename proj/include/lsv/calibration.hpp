#pragma once

#include "lsv/date.hpp"
#include "lsv/kernel.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsv {

class JointSeries;

/// Ordinary least squares line. `r2` in percent.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};

/// vix = a + b I + c I^2 in volatility points; `r2` in percent.
struct QuadraticFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double r2 = 0.0;

    double operator()(double index) const { return a + index * (b + c * index); }
};

/// y_{t+1} = phi y_t + sigma eps, fitted without intercept; `r2` in percent.
struct ARFit {
    double phi = 0.0;
    double sigma = 0.0;
    double r2 = 0.0;
    double phi_std_error = 0.0;
    std::size_t observations = 0;
};

/// Parameters of dY = -kappa_y Y dt + nu dW.
struct OUParams {
    double kappa_y = 1.0;  ///< per year
    double nu = 0.0;       ///< per sqrt-year
    double y0 = 0.0;
};

/// Coefficient of determination in percent: 100 (1 - SS_res / SS_tot).
double r2_percent(std::span<const double> observed, std::span<const double> predicted);

/// Throws InputError on mismatched or short (< 3) inputs or constant x.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Least squares of vix on (1, I, I^2), or (I, I^2) when `force_zero_intercept`.
/// Throws InputError on short input (< 4) or a singular design.
QuadraticFit fit_quadratic(std::span<const double> index, std::span<const double> vix,
                           bool force_zero_intercept = false);

/// Mean squared VIX error of the best quadratic in the kernel index, as a
/// function of the softmax parameters psi. The quadratic is re-solved exactly
/// at every evaluation, so by the envelope theorem the gradient only needs
/// the derivative of the residuals with respect to the index. Spot prices are
/// held as ratios to the first price, rounded to 2^-30 in log space.
class ProfileObjective {
public:
    /// Rows [n, size) enter the objective; the first n rows are history only.
    ProfileObjective(std::span<const double> spx, std::span<const double> vix, std::size_t n);

    std::size_t lags() const { return lags_; }
    std::size_t rows() const { return spot_.size() - lags_; }

    double operator()(std::span<const double> psi, std::span<double> grad) const;

    /// Objective and best quadratic for explicit kernel weights.
    double evaluate_weights(std::span<const double> weights, QuadraticFit* fit = nullptr) const;

private:
    std::vector<double> spot_;
    std::vector<double> vix_;
    std::size_t lags_;
};

struct OptimizeOptions {
    /// Extra restarts besides `init`: flat, exponential, and seeded perturbations of flat.
    bool restart_flat = true;
    bool restart_exponential = true;
    std::size_t random_restarts = 1;
    unsigned threads = 1;
};

struct RestartSummary {
    std::string label;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    std::size_t iterations = 0;
};

struct CalibrationResult {
    Kernel kernel = Kernel({1.0});
    QuadraticFit fit;
    double in_sample_r2 = 0.0;
    /// Objective per accepted iteration of the selected restart; non-increasing.
    std::vector<double> objective_trace;
    /// False when no restart accepted a single step; the kernel is then `init`.
    bool improved = false;
    bool converged = false;
    std::vector<RestartSummary> restarts;
    std::size_t selected_restart = 0;
};

/// Minimizes the mean squared VIX error over kernel weights (softmax
/// parameters) and the quadratic coefficients. `budget` caps L-BFGS iterations
/// per restart. Deterministic given (data, n, init, budget, seed); restarts may
/// run in parallel and are reduced by index. Throws InputError when the data
/// has n + 10 rows or fewer, NumericalError on a non-finite objective.
CalibrationResult optimize_kernel(const JointSeries& data, std::size_t n, const Kernel& init,
                                  std::size_t budget, std::uint64_t seed,
                                  const OptimizeOptions& options = {});

/// R^2 (percent) of a frozen kernel + quadratic on new data; no refitting.
double evaluate_fit(const CalibrationResult& model, const JointSeries& data);
double evaluate_fit(const Kernel& kernel, const QuadraticFit& fit, const JointSeries& data);

/// Log-quadratic-in-log-lag fit of kernel weights.
struct PowerLawFit {
    /// weights proportional to exp(p0 + p1 ln j + p2 (ln j)^2). p0 is not
    /// identifiable after normalization and is reported as 0.
    std::array<double, 3> p{};
    /// Fitted intercept of ln w on the normalized weights.
    double log_scale = 0.0;
    /// R^2 of the log weights, as a fraction.
    double score = 0.0;
};

/// Zero weights are floored at 1e-12 before the log. Throws InputError for n < 4.
PowerLawFit fit_power_law(const Kernel& kernel);

struct Innovations {
    std::vector<Date> dates;
    std::vector<double> values;  ///< y_t = ln(VIX_t / f(I_t))
    /// Rows where f(I_t) fell below the floor and was clamped.
    std::size_t floored = 0;
    std::vector<Date> floored_dates;
};

/// y_t = ln(VIX_t / max(floor, a + b I_t + c I_t^2)). With `strict` set, a
/// prediction below `floor` raises InputError naming the date instead.
Innovations innovations(const JointSeries& data, const Kernel& kernel, const QuadraticFit& fit,
                        double floor = 1.0, bool strict = false);

/// OLS of y_{t+1} on y_t without intercept. Throws InputError for fewer than
/// 10 points or a zero-variance series.
ARFit fit_ar1(std::span<const double> y);

/// Exact discretization bridge: kappa_y = -ln(phi)/dt,
/// nu = sigma sqrt(2 kappa_y / (1 - phi^2)). Throws InputError unless 0 < phi < 1.
OUParams map_ar1_to_ou(const ARFit& fit, double dt = 1.0 / 252.0);

nlohmann::json to_json(const LinearFit& f);
nlohmann::json to_json(const QuadraticFit& f);
nlohmann::json to_json(const ARFit& f);
nlohmann::json to_json(const OUParams& p);
nlohmann::json to_json(const CalibrationResult& r);
QuadraticFit quadratic_from_json(const nlohmann::json& j);
ARFit ar_from_json(const nlohmann::json& j);
OUParams ou_from_json(const nlohmann::json& j);
CalibrationResult calibration_from_json(const nlohmann::json& j);

}  // namespace lsv
