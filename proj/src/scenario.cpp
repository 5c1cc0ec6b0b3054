#include "lsv/scenario.hpp"

#include "lsv/errors.hpp"
#include "lsv/market_data.hpp"
#include "lsv/numeric.hpp"
#include "lsv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace lsv {

ScenarioSet generate(const ModelParams& model, const QuadraticFit& fit, const ARFit& ar,
                     double horizon, std::size_t n, std::uint64_t seed,
                     const ScenarioOptions& options) {
    if (!(horizon > 0.0)) throw InputError("generate: horizon must be positive");
    if (n == 0) throw InputError("generate: n must be >= 1");
    model.validate();
    if (!(ar.sigma >= 0.0)) throw InputError("generate: AR sigma must be >= 0");
    const std::size_t steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(252.0 * horizon)));
    const double dt = 1.0 / 252.0;
    const double sqdt = std::sqrt(dt);
    if (model.kappa_kernel * dt >= 1.0) throw InputError("generate: kappa_kernel * dt must be below 1");

    ScenarioSet out;
    out.seed = seed;
    out.grid.resize(steps + 1);
    out.grid[0] = options.start;
    for (std::size_t i = 1; i <= steps; ++i) out.grid[i] = out.grid[i - 1].next_weekday();
    out.spx_paths.assign(n, std::vector<double>(steps + 1));
    out.vix_paths.assign(n, std::vector<double>(steps + 1));
    out.y_paths.assign(n, std::vector<double>(steps + 1));

    const double drift = options.use_real_world_drift ? options.real_world_drift : model.r - model.q;
    const double s_floor = 1e-8 * model.s0;
    parallel_for(n, options.threads, [&](std::size_t p) {
        NormalStream spot_rng(seed, 0, p, StreamDomain::spot);
        NormalStream vol_rng(seed, 0, p, StreamDomain::vol_factor);
        auto& sp = out.spx_paths[p];
        auto& vx = out.vix_paths[p];
        auto& yp = out.y_paths[p];
        double s = model.s0;
        double a = model.a0;
        double y = options.y0;
        for (std::size_t i = 0;; ++i) {
            sp[i] = s;
            yp[i] = y;
            vx[i] = std::max(options.vix_floor, fit(s / a)) * std::exp(y);
            if (i == steps) break;
            const double vol = model.localvol(s / a) * std::exp(y);
            const double eps = spot_rng.next();
            const double next = std::max(s * (1.0 + drift * dt + vol * eps * sqdt), s_floor);
            a += model.kappa_kernel * (s - a) * dt;
            s = next;
            y = ar.phi * y + ar.sigma * vol_rng.next();
        }
    });
    return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InputError("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

namespace {

std::vector<double> ewma_index(std::span<const double> s, double kappa) {
    const double dt = 1.0 / 252.0;
    std::vector<double> out(s.size());
    double a = s.empty() ? 0.0 : s[0];
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i] = s[i] / a;
        a += kappa * (s[i] - a) * dt;
    }
    return out;
}

double lag1_autocorrelation(std::span<const double> v) {
    if (v.size() < 3) return std::nan("");
    const double m = mean(v);
    std::vector<double> num(v.size() - 1), den(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) den[i] = (v[i] - m) * (v[i] - m);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) num[i] = (v[i] - m) * (v[i + 1] - m);
    const double d = pairwise_sum(den);
    if (!(d > 0.0)) return std::nan("");
    return pairwise_sum(num) / d;
}

double excess_kurtosis(std::span<const double> v) {
    if (v.size() < 4) return std::nan("");
    const double m = mean(v);
    std::vector<double> m2(v.size()), m4(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = (v[i] - m) * (v[i] - m);
        m2[i] = d;
        m4[i] = d * d;
    }
    const double s2 = mean(m2);
    if (!(s2 > 0.0)) return std::nan("");
    return mean(m4) / (s2 * s2) - 3.0;
}

std::vector<double> log_returns(std::span<const double> s) {
    std::vector<double> r;
    for (std::size_t i = 1; i < s.size(); ++i) r.push_back(std::log(s[i] / s[i - 1]));
    return r;
}

nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

ValidationReport validate(const ScenarioSet& scenarios, const JointSeries& reference,
                          double kappa_kernel, const ValidationThresholds& thresholds) {
    ValidationReport report;
    const bool have_sim = scenarios.paths() > 0 && scenarios.steps() > 0;
    const bool have_ref = reference.size() > 1;
    if (!have_sim) report.flags.push_back("no_simulated_data");
    if (!have_ref) report.flags.push_back("no_reference_data");

    std::vector<double> sim_index, sim_returns;
    std::vector<double> sim_acf;
    if (have_sim) {
        for (std::size_t p = 0; p < scenarios.paths(); ++p) {
            const auto idx = ewma_index(scenarios.spx_paths[p], kappa_kernel);
            sim_index.insert(sim_index.end(), idx.begin(), idx.end());
            const auto r = log_returns(scenarios.spx_paths[p]);
            sim_returns.insert(sim_returns.end(), r.begin(), r.end());
            std::vector<double> lv(scenarios.vix_paths[p].size());
            for (std::size_t i = 0; i < lv.size(); ++i) lv[i] = std::log(scenarios.vix_paths[p][i]);
            const double ac = lag1_autocorrelation(lv);
            if (std::isfinite(ac)) sim_acf.push_back(ac);
        }
    }
    std::vector<double> ref_index, ref_returns;
    double ref_acf = std::nan("");
    if (have_ref) {
        ref_index = ewma_index(reference.spx(), kappa_kernel);
        ref_returns = log_returns(reference.spx());
        std::vector<double> lv(reference.size());
        for (std::size_t i = 0; i < lv.size(); ++i) lv[i] = std::log(reference.vix()[i]);
        ref_acf = lag1_autocorrelation(lv);
    }

    auto stats = nlohmann::json::array();
    auto add = [&](const std::string& name, double sim, double hist, double div) {
        if (!std::isfinite(div)) report.flags.push_back(name + "_unavailable");
        stats.push_back({{"statistic", name},
                         {"simulated", number_or_null(sim)},
                         {"historical", number_or_null(hist)},
                         {"divergence", number_or_null(div)}});
    };

    const double nan = std::nan("");
    const double ks = have_sim && have_ref ? ks_statistic(sim_index, ref_index) : nan;
    add("ks_index", nan, nan, ks);
    if (std::isfinite(ks) && ks > thresholds.ks_index) report.flags.push_back("ks_index_above_threshold");

    const double sim_acf_mean = sim_acf.empty() ? nan : mean(sim_acf);
    add("lag1_autocorrelation_log_vix", sim_acf_mean, ref_acf, std::abs(sim_acf_mean - ref_acf));

    const double sim_kurt = excess_kurtosis(sim_returns);
    const double ref_kurt = excess_kurtosis(ref_returns);
    add("excess_kurtosis_daily_returns", sim_kurt, ref_kurt, std::abs(sim_kurt - ref_kurt));

    report.summary = {{"statistics", stats},
                      {"flags", report.flags},
                      {"ks_threshold", thresholds.ks_index},
                      {"kappa_kernel", kappa_kernel},
                      {"simulated_paths", scenarios.paths()},
                      {"simulated_steps", scenarios.steps()},
                      {"reference_points", reference.size()}};
    return report;
}

void write_scenario_csv(const std::vector<std::vector<double>>& paths, std::ostream& out) {
    out << "path_id,t_index,value\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t t = 1; t < paths[p].size(); ++t) {
            out << p << ',' << t << ',' << format_double(paths[p][t]) << '\n';
        }
    }
}

void write_validation_csv(const ValidationReport& report, std::ostream& out) {
    out << "statistic,simulated,historical,divergence\n";
    auto cell = [](const nlohmann::json& v) {
        return v.is_null() ? std::string() : format_double(v.get<double>());
    };
    for (const auto& row : report.summary.at("statistics")) {
        out << row.at("statistic").get<std::string>() << ',' << cell(row.at("simulated")) << ','
            << cell(row.at("historical")) << ',' << cell(row.at("divergence")) << '\n';
    }
}

}  // namespace lsv
