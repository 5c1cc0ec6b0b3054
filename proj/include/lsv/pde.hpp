#pragma once

#include "lsv/model.hpp"
#include "lsv/pricer.hpp"
#include "lsv/quantizer.hpp"

#include <cstddef>
#include <span>

namespace lsv {

enum class AdvectionScheme {
    /// Exact characteristic of dA = kappa (s - A) dt over one step, cubic
    /// interpolation in log A. No stability limit.
    semi_lagrangian,
    /// Explicit first-order upwind differences, substepped to the target Courant number.
    upwind,
};

struct PdeGrid {
    std::size_t spot_nodes = 400;
    std::size_t average_nodes = 80;
    std::size_t time_steps = 500;
    double std_devs = 8.0;
    /// Implicit half steps replacing the first Crank-Nicolson step.
    std::size_t rannacher_steps = 4;
    /// Target Courant number of one explicit A-advection substep.
    double courant = 0.9;
    AdvectionScheme advection = AdvectionScheme::semi_lagrangian;
};

struct PdeResult {
    double value = 0.0;
    std::size_t time_steps = 0;
    /// Largest number of upwind substeps used in one time step (1 when stable as
    /// given, and always 1 for the semi-Lagrangian scheme).
    std::size_t max_substeps = 0;
};

/// Vanilla price conditioned on one vol-factor path (y, dy sampled on `grid`).
///
/// Backward equation in (s, A) with dA = kappa (s - A) dt:
///   u_t + ((r-q) + mu sigma_loc) s u_s + kappa (s - A) u_A
///       + 1/2 (sig sigma_loc)^2 s^2 u_ss - r u = 0.
/// Lie splitting per step: advection in A (see AdvectionScheme), then
/// Crank-Nicolson in log s with linear-in-s far-field boundaries. With
/// kappa == 0 the average never moves and only the A = a0 line is solved.
/// Throws InputError for non-vanilla products.
PdeResult price_pde(const Product& product, const ModelParams& model, std::span<const double> grid,
                    std::span<const double> y, std::span<const double> dy,
                    const PdeGrid& pde = {});

/// Companion-weighted PDE prices over all quantizer paths.
PriceResult price_pde(const Product& product, const ModelParams& model, const QuantizerSet& q,
                      const PdeGrid& pde = {}, unsigned threads = 1);

}  // namespace lsv
