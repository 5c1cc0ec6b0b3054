#include "lsv/calibration.hpp"

#include "lsv/errors.hpp"
#include "lsv/market_data.hpp"
#include "lsv/numeric.hpp"
#include "lsv/optimizer.hpp"
#include "lsv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Dense>

namespace lsv {

namespace {

// Least squares on columns that are scaled to unit norm first, so rank
// detection does not depend on the units of the regressors.
std::optional<Eigen::VectorXd> least_squares(const Eigen::MatrixXd& design,
                                             const Eigen::VectorXd& target) {
    Eigen::VectorXd norms = design.colwise().norm();
    for (Eigen::Index k = 0; k < norms.size(); ++k) {
        if (!(norms[k] > 0.0)) return std::nullopt;
    }
    const Eigen::MatrixXd scaled = design * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) return std::nullopt;
    Eigen::VectorXd beta = qr.solve(target);
    return Eigen::VectorXd(beta.cwiseQuotient(norms));
}

std::optional<QuadraticFit> solve_quadratic(std::span<const double> index,
                                            std::span<const double> vix, bool zero_intercept) {
    const auto m = static_cast<Eigen::Index>(index.size());
    Eigen::VectorXd target(m);
    for (Eigen::Index t = 0; t < m; ++t) target[t] = vix[t];
    QuadraticFit fit;
    if (zero_intercept) {
        Eigen::MatrixXd design(m, 2);
        for (Eigen::Index t = 0; t < m; ++t) {
            design(t, 0) = index[t];
            design(t, 1) = index[t] * index[t];
        }
        const auto beta = least_squares(design, target);
        if (!beta) return std::nullopt;
        fit.a = 0.0;
        fit.b = (*beta)[0];
        fit.c = (*beta)[1];
    } else {
        // Centered regressors keep (1, I, I^2) well conditioned when I stays near 1.
        const double center = mean(index);
        Eigen::MatrixXd design(m, 3);
        for (Eigen::Index t = 0; t < m; ++t) {
            const double x = index[t] - center;
            design(t, 0) = 1.0;
            design(t, 1) = x;
            design(t, 2) = x * x;
        }
        const auto beta = least_squares(design, target);
        if (!beta) return std::nullopt;
        const double a0 = (*beta)[0];
        const double a1 = (*beta)[1];
        const double a2 = (*beta)[2];
        fit.c = a2;
        fit.b = a1 - 2.0 * a2 * center;
        fit.a = a0 - a1 * center + a2 * center * center;
    }
    std::vector<double> pred(index.size());
    for (std::size_t t = 0; t < index.size(); ++t) pred[t] = fit(index[t]);
    fit.r2 = r2_percent(vix, pred);
    return fit;
}

std::vector<double> psi_from_kernel(const Kernel& kernel) {
    std::vector<double> psi(kernel.size());
    for (std::size_t j = 0; j < psi.size(); ++j) {
        psi[j] = std::log(std::max(kernel.weights()[j], 1e-12));
    }
    return psi;
}

// Kullback-Leibler divergence of the kernel from the flat kernel.
double distance_to_flat(std::span<const double> w) {
    const double n = static_cast<double>(w.size());
    double d = 0.0;
    for (double v : w) {
        if (v > 0.0) d += v * std::log(v * n);
    }
    return d;
}

}  // namespace

double r2_percent(std::span<const double> observed, std::span<const double> predicted) {
    const double m = mean(observed);
    std::vector<double> res(observed.size());
    std::vector<double> tot(observed.size());
    for (std::size_t i = 0; i < observed.size(); ++i) {
        res[i] = (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
        tot[i] = (observed[i] - m) * (observed[i] - m);
    }
    const double ss_res = pairwise_sum(res);
    const double ss_tot = pairwise_sum(tot);
    if (ss_tot == 0.0) return ss_res == 0.0 ? 100.0 : -std::numeric_limits<double>::infinity();
    return 100.0 * (1.0 - ss_res / ss_tot);
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("fit_linear: x and y differ in length");
    if (x.size() < 3) throw InputError("fit_linear: need at least 3 points");
    const double mx = mean(x);
    const double my = mean(y);
    std::vector<double> sxx(x.size());
    std::vector<double> sxy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx[i] = (x[i] - mx) * (x[i] - mx);
        sxy[i] = (x[i] - mx) * (y[i] - my);
    }
    const double vxx = pairwise_sum(sxx);
    if (!(vxx > 0.0)) throw InputError("fit_linear: constant regressor (singular design)");
    LinearFit fit;
    fit.slope = pairwise_sum(sxy) / vxx;
    fit.intercept = my - fit.slope * mx;
    std::vector<double> pred(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pred[i] = fit.intercept + fit.slope * x[i];
    fit.r2 = r2_percent(y, pred);
    return fit;
}

QuadraticFit fit_quadratic(std::span<const double> index, std::span<const double> vix,
                           bool force_zero_intercept) {
    if (index.size() != vix.size()) throw InputError("fit_quadratic: inputs differ in length");
    if (index.size() < 4) throw InputError("fit_quadratic: need at least 4 points");
    const auto fit = solve_quadratic(index, vix, force_zero_intercept);
    if (!fit) throw InputError("fit_quadratic: singular design matrix (constant index)");
    return *fit;
}

ProfileObjective::ProfileObjective(std::span<const double> spx, std::span<const double> vix,
                                   std::size_t n)
    : spot_(spx.begin(), spx.end()), vix_(vix.begin(), vix.end()), lags_(n) {
    if (spx.size() != vix.size()) throw InputError("profile objective: inputs differ in length");
    if (n == 0 || spx.size() < n + 4) throw InputError("profile objective: series too short");
    // Prices enter only through ratios. Storing them as log ratios to the first
    // price on a 2^-30 grid makes rescaled inputs produce bit-identical
    // objectives; the optimizer would otherwise amplify last-bit differences.
    const double base = spx.front();
    if (!(base > 0.0)) throw InputError("profile objective: spot must be positive");
    for (std::size_t t = 0; t < spx.size(); ++t) {
        if (!(spx[t] > 0.0)) throw InputError("profile objective: spot must be positive");
        const double lr = std::log(spx[t] / base);
        spot_[t] = std::exp(std::ldexp(std::nearbyint(std::ldexp(lr, 30)), -30));
    }
}

double ProfileObjective::evaluate_weights(std::span<const double> weights,
                                          QuadraticFit* fit_out) const {
    const std::size_t n = lags_;
    const std::size_t m = rows();
    std::vector<double> index(m);
    for (std::size_t t = n; t < spot_.size(); ++t) {
        double avg = 0.0;
        for (std::size_t j = 1; j <= n; ++j) avg += weights[j - 1] * spot_[t - j];
        index[t - n] = spot_[t] / avg;
    }
    const std::span<const double> target(vix_.data() + n, m);
    const auto fit = solve_quadratic(index, target, false);
    if (!fit) return std::numeric_limits<double>::infinity();
    if (fit_out) *fit_out = *fit;
    std::vector<double> sq(m);
    for (std::size_t t = 0; t < m; ++t) {
        const double r = target[t] - (*fit)(index[t]);
        sq[t] = r * r;
    }
    return pairwise_sum(sq) / static_cast<double>(m);
}

double ProfileObjective::operator()(std::span<const double> psi, std::span<double> grad) const {
    const std::size_t n = lags_;
    const std::size_t m = rows();
    std::vector<double> w(n);
    softmax_into(psi, w);

    std::vector<double> avg(m);
    std::vector<double> index(m);
    for (std::size_t t = n; t < spot_.size(); ++t) {
        double a = 0.0;
        for (std::size_t j = 1; j <= n; ++j) a += w[j - 1] * spot_[t - j];
        avg[t - n] = a;
        index[t - n] = spot_[t] / a;
    }
    const std::span<const double> target(vix_.data() + n, m);
    const auto fit = solve_quadratic(index, target, false);
    if (!fit) {
        std::fill(grad.begin(), grad.end(), 0.0);
        return std::numeric_limits<double>::infinity();
    }

    std::vector<double> sq(m);
    // h_t = dJ/dI_t * dI_t/dD_t, with dI_t/dD_t = -I_t / D_t.
    std::vector<double> h(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t t = 0; t < m; ++t) {
        const double r = target[t] - (*fit)(index[t]);
        sq[t] = r * r;
        const double dj_di = -2.0 * inv_m * r * (fit->b + 2.0 * fit->c * index[t]);
        h[t] = -dj_di * index[t] / avg[t];
    }
    const double value = pairwise_sum(sq) * inv_m;

    // dJ/dw_j = sum_t h_t S_{t-j}
    std::vector<double> gw(n, 0.0);
    for (std::size_t t = n; t < spot_.size(); ++t) {
        const double ht = h[t - n];
        const double* past = spot_.data() + t;
        for (std::size_t j = 1; j <= n; ++j) gw[j - 1] += ht * past[-static_cast<std::ptrdiff_t>(j)];
    }
    double wg = 0.0;
    for (std::size_t j = 0; j < n; ++j) wg += w[j] * gw[j];
    for (std::size_t j = 0; j < n; ++j) grad[j] = w[j] * (gw[j] - wg);
    return value;
}

CalibrationResult optimize_kernel(const JointSeries& data, std::size_t n, const Kernel& init,
                                  std::size_t budget, std::uint64_t seed,
                                  const OptimizeOptions& options) {
    if (n == 0) throw InputError("optimize_kernel: n must be >= 1");
    if (data.size() <= n + 10) {
        throw InputError("optimize_kernel: need more than n + 10 rows, got " +
                         std::to_string(data.size()));
    }
    if (init.size() != n) throw InputError("optimize_kernel: init kernel length differs from n");

    const ProfileObjective objective(data.spx(), data.vix(), n);

    std::vector<std::pair<std::string, std::vector<double>>> starts;
    starts.emplace_back("init", psi_from_kernel(init));
    if (options.restart_flat && init.family() != "flat") {
        starts.emplace_back("flat", std::vector<double>(n, 0.0));
    }
    if (options.restart_exponential && n > 1) {
        starts.emplace_back("exponential", psi_from_kernel(exp_kernel(4.0 / static_cast<double>(n), n)));
    }
    for (std::size_t r = 0; r < options.random_restarts; ++r) {
        NormalStream noise(seed, static_cast<std::uint32_t>(r), 0, StreamDomain::restart);
        std::vector<double> psi(n);
        for (double& v : psi) v = 0.5 * noise.next();
        starts.emplace_back("perturbed-" + std::to_string(r), std::move(psi));
    }

    LbfgsOptions lopts;
    lopts.max_iterations = budget;
    std::vector<LbfgsResult> runs(starts.size());
    parallel_for(starts.size(), options.threads, [&](std::size_t i) {
        runs[i] = minimize_lbfgs(std::cref(objective), starts[i].second, lopts);
    });

    CalibrationResult result;
    std::size_t best = 0;
    std::vector<double> best_w(n);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        result.restarts.push_back({starts[i].first, runs[i].trace.front(), runs[i].value,
                                   runs[i].iterations});
        if (!std::isfinite(runs[i].value)) throw NumericalError("optimize_kernel: non-finite objective");
        if (i == 0) continue;
        const double fb = runs[best].value;
        const double fi = runs[i].value;
        const double tie = 1e-15 * std::max(std::abs(fb), std::abs(fi));
        if (fi < fb - tie) {
            best = i;
        } else if (std::abs(fi - fb) <= tie) {
            std::vector<double> wi(n);
            std::vector<double> wb(n);
            softmax_into(runs[i].x, wi);
            softmax_into(runs[best].x, wb);
            if (distance_to_flat(wi) < distance_to_flat(wb)) best = i;
        }
    }

    bool any_step = false;
    for (const auto& run : runs) any_step = any_step || run.iterations > 0;
    result.improved = any_step;
    result.selected_restart = best;
    if (any_step) {
        softmax_into(runs[best].x, best_w);
        result.kernel = Kernel(best_w, "softmax");
        result.objective_trace = runs[best].trace;
        result.converged = runs[best].converged;
    } else {
        result.kernel = init;
        result.objective_trace = runs[0].trace;
        result.selected_restart = 0;
    }
    QuadraticFit fit;
    objective.evaluate_weights(result.kernel.weights(), &fit);
    result.fit = fit;
    result.in_sample_r2 = evaluate_fit(result.kernel, result.fit, data);
    return result;
}

double evaluate_fit(const Kernel& kernel, const QuadraticFit& fit, const JointSeries& data) {
    if (data.size() <= kernel.size() + 1) {
        throw InputError("evaluate_fit: series too short for the kernel length");
    }
    const auto index = scale_index(data.spx(), kernel);
    const std::span<const double> target(data.vix().data() + kernel.size(), index.size());
    std::vector<double> pred(index.size());
    for (std::size_t t = 0; t < index.size(); ++t) pred[t] = fit(index[t]);
    return r2_percent(target, pred);
}

double evaluate_fit(const CalibrationResult& model, const JointSeries& data) {
    return evaluate_fit(model.kernel, model.fit, data);
}

PowerLawFit fit_power_law(const Kernel& kernel) {
    const std::size_t n = kernel.size();
    if (n < 4) throw InputError("fit_power_law: need at least 4 lags");
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd target(static_cast<Eigen::Index>(n));
    for (std::size_t j = 1; j <= n; ++j) {
        const double l = std::log(static_cast<double>(j));
        const auto row = static_cast<Eigen::Index>(j - 1);
        design(row, 0) = 1.0;
        design(row, 1) = l;
        design(row, 2) = l * l;
        target[row] = std::log(std::max(kernel.weights()[j - 1], 1e-12));
    }
    const auto beta = least_squares(design, target);
    if (!beta) throw NumericalError("fit_power_law: singular design");
    PowerLawFit out;
    out.p = {0.0, (*beta)[1], (*beta)[2]};
    out.log_scale = (*beta)[0];
    std::vector<double> obs(n);
    std::vector<double> pred(n);
    for (std::size_t j = 0; j < n; ++j) {
        obs[j] = target[static_cast<Eigen::Index>(j)];
        pred[j] = (design.row(static_cast<Eigen::Index>(j)) * (*beta))(0);
    }
    const double m = mean(obs);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        ss_res += (obs[j] - pred[j]) * (obs[j] - pred[j]);
        ss_tot += (obs[j] - m) * (obs[j] - m);
    }
    const double scale = std::max(1.0, std::abs(m));
    if (ss_tot <= 1e-24 * scale * scale * static_cast<double>(n)) {
        out.score = 1.0;
    } else {
        out.score = 1.0 - ss_res / ss_tot;
    }
    return out;
}

Innovations innovations(const JointSeries& data, const Kernel& kernel, const QuadraticFit& fit,
                        double floor, bool strict) {
    const auto index = scale_index(data.spx(), kernel);
    Innovations out;
    out.dates.assign(data.dates().begin() + static_cast<std::ptrdiff_t>(kernel.size()),
                     data.dates().end());
    out.values.resize(index.size());
    for (std::size_t t = 0; t < index.size(); ++t) {
        double pred = fit(index[t]);
        if (!(pred >= floor)) {
            if (strict) {
                throw InputError("innovations: predicted VIX " + format_double(pred) +
                                 " below floor on " + out.dates[t].iso());
            }
            pred = floor;
            ++out.floored;
            out.floored_dates.push_back(out.dates[t]);
        }
        out.values[t] = std::log(data.vix()[t + kernel.size()] / pred);
    }
    return out;
}

ARFit fit_ar1(std::span<const double> y) {
    if (y.size() < 10) throw InputError("fit_ar1: need at least 10 points");
    const std::size_t m = y.size() - 1;
    std::vector<double> xx(m);
    std::vector<double> xz(m);
    for (std::size_t t = 0; t < m; ++t) {
        xx[t] = y[t] * y[t];
        xz[t] = y[t] * y[t + 1];
    }
    const double sxx = pairwise_sum(xx);
    if (!(sxx > 0.0)) throw InputError("fit_ar1: zero-variance series");
    ARFit fit;
    fit.phi = pairwise_sum(xz) / sxx;
    std::vector<double> res(m);
    std::vector<double> pred(m);
    for (std::size_t t = 0; t < m; ++t) {
        pred[t] = fit.phi * y[t];
        res[t] = (y[t + 1] - pred[t]) * (y[t + 1] - pred[t]);
    }
    const double ss = pairwise_sum(res);
    fit.sigma = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
    fit.phi_std_error = fit.sigma / std::sqrt(sxx);
    fit.r2 = r2_percent(y.subspan(1), pred);
    fit.observations = m;
    return fit;
}

OUParams map_ar1_to_ou(const ARFit& fit, double dt) {
    if (!(fit.phi > 0.0) || !(fit.phi < 1.0)) {
        throw InputError("map_ar1_to_ou: phi must lie in (0, 1), got " + format_double(fit.phi));
    }
    if (!(dt > 0.0)) throw InputError("map_ar1_to_ou: dt must be positive");
    OUParams ou;
    ou.kappa_y = -std::log(fit.phi) / dt;
    ou.nu = fit.sigma * std::sqrt(2.0 * ou.kappa_y / (1.0 - fit.phi * fit.phi));
    return ou;
}

nlohmann::json to_json(const LinearFit& f) {
    return {{"intercept", f.intercept}, {"slope", f.slope}, {"r2", f.r2}};
}

nlohmann::json to_json(const QuadraticFit& f) {
    return {{"a", f.a}, {"b", f.b}, {"c", f.c}, {"r2", f.r2}};
}

nlohmann::json to_json(const ARFit& f) {
    return {{"phi", f.phi},
            {"sigma", f.sigma},
            {"r2", f.r2},
            {"phi_std_error", f.phi_std_error},
            {"observations", f.observations}};
}

nlohmann::json to_json(const OUParams& p) {
    return {{"kappa_y", p.kappa_y}, {"nu", p.nu}, {"y0", p.y0}};
}

nlohmann::json to_json(const CalibrationResult& r) {
    nlohmann::json restarts = nlohmann::json::array();
    for (const auto& s : r.restarts) {
        restarts.push_back({{"label", s.label},
                            {"initial_objective", s.initial_objective},
                            {"final_objective", s.final_objective},
                            {"iterations", s.iterations}});
    }
    return {{"kernel", kernel_to_json(r.kernel)},
            {"fit", to_json(r.fit)},
            {"in_sample_r2", r.in_sample_r2},
            {"objective_trace", r.objective_trace},
            {"improved", r.improved},
            {"converged", r.converged},
            {"selected_restart", r.selected_restart},
            {"restarts", restarts}};
}

QuadraticFit quadratic_from_json(const nlohmann::json& j) {
    try {
        return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>(),
                j.value("r2", 0.0)};
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("quadratic fit json: ") + e.what());
    }
}

ARFit ar_from_json(const nlohmann::json& j) {
    try {
        ARFit f;
        f.phi = j.at("phi").get<double>();
        f.sigma = j.at("sigma").get<double>();
        f.r2 = j.value("r2", 0.0);
        f.phi_std_error = j.value("phi_std_error", 0.0);
        f.observations = j.value("observations", std::size_t{0});
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("ar fit json: ") + e.what());
    }
}

OUParams ou_from_json(const nlohmann::json& j) {
    try {
        return {j.at("kappa_y").get<double>(), j.at("nu").get<double>(), j.value("y0", 0.0)};
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("ou json: ") + e.what());
    }
}

CalibrationResult calibration_from_json(const nlohmann::json& j) {
    try {
        CalibrationResult r;
        r.kernel = kernel_from_json(j.at("kernel"));
        r.fit = quadratic_from_json(j.at("fit"));
        r.in_sample_r2 = j.at("in_sample_r2").get<double>();
        r.objective_trace = j.value("objective_trace", std::vector<double>{});
        r.improved = j.value("improved", true);
        r.converged = j.value("converged", false);
        r.selected_restart = j.value("selected_restart", std::size_t{0});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("calibration json: ") + e.what());
    }
}

}  // namespace lsv
