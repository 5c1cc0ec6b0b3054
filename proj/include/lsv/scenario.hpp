#pragma once

#include "lsv/calibration.hpp"
#include "lsv/date.hpp"
#include "lsv/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsv {

class JointSeries;

/// Joint spot / VIX trajectories. Each path holds M + 1 values, index 0
/// being the initial state on `grid[0]`.
struct ScenarioSet {
    std::vector<Date> grid;
    std::vector<std::vector<double>> spx_paths;
    std::vector<std::vector<double>> vix_paths;
    std::vector<std::vector<double>> y_paths;
    std::uint64_t seed = 0;

    std::size_t paths() const { return spx_paths.size(); }
    std::size_t steps() const { return grid.empty() ? 0 : grid.size() - 1; }
};

struct ScenarioOptions {
    Date start = Date::from_ymd(2023, 1, 2);
    /// Replaces r - q as the spot drift when set (real-world scenarios).
    bool use_real_world_drift = false;
    double real_world_drift = 0.0;
    /// Initial innovation; VIX_0 = max(floor, f(I_0)) e^{y0}.
    double y0 = 0.0;
    double vix_floor = 1.0;
    unsigned threads = 1;
};

/// Spot follows the zero-correlation Euler scheme with
/// sigma_loc(I) e^{y}; the innovation follows y_{t+1} = phi y_t + sigma eps.
/// VIX_t = max(floor, f(I_t)) e^{y_t} with f the fitted quadratic.
/// One step per trading day; per-path substreams keyed by (seed, path).
ScenarioSet generate(const ModelParams& model, const QuadraticFit& fit, const ARFit& ar,
                     double horizon, std::size_t n, std::uint64_t seed,
                     const ScenarioOptions& options = {});

struct ValidationThresholds {
    double ks_index = 0.1;
};

/// Simulated-versus-historical diagnostics. Statistics that cannot be computed
/// for lack of data are reported as null with a flag, never as an error.
struct ValidationReport {
    nlohmann::json summary;
    std::vector<std::string> flags;
};

/// Compares the index distribution (two-sample Kolmogorov-Smirnov), lag-1
/// autocorrelation of ln VIX, and daily log-return excess kurtosis. Both sides
/// compute the index with the same EWMA (rate `kappa_kernel`, started at the
/// first spot of each series).
ValidationReport validate(const ScenarioSet& scenarios, const JointSeries& reference,
                          double kappa_kernel, const ValidationThresholds& thresholds = {});

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// `path_id,t_index,value` rows for t_index 1..M (the simulated days).
void write_scenario_csv(const std::vector<std::vector<double>>& paths, std::ostream& out);
/// `statistic,simulated,historical,divergence` rows.
void write_validation_csv(const ValidationReport& report, std::ostream& out);

}  // namespace lsv
