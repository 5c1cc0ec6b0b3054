#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lsv {

/// Objective with gradient: returns f(x) and writes df/dx into `grad`.
using GradientObjective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
    std::size_t max_iterations = 500;
    std::size_t memory = 10;
    double gradient_tolerance = 1e-10;     ///< on max |g| scaled by max(1, |f|)
    double relative_tolerance = 1e-13;     ///< stop when f decreases less than this, relatively
    double armijo = 1e-4;
    double backtrack = 0.5;
    std::size_t max_backtracks = 50;
};

struct LbfgsResult {
    std::vector<double> x;
    double value = 0.0;
    /// Objective at the start and after every accepted step; non-increasing.
    std::vector<double> trace;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::string status;
};

/// Limited-memory BFGS with a monotone backtracking (Armijo) line search.
/// A step is only accepted if it does not increase the objective, so the
/// returned trace is non-increasing. Throws NumericalError if the objective is
/// non-finite at the starting point.
LbfgsResult minimize_lbfgs(const GradientObjective& objective, std::vector<double> x0,
                           const LbfgsOptions& options = {});

}  // namespace lsv
