#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace lsv {

/// Fixed-order pairwise summation. The result depends only on the values and
/// their order, never on how they were produced.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

/// Sample variance with (n - 1) denominator; 0 for fewer than two values.
double sample_variance(std::span<const double> values);

/// Runs `body(i)` for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Indices are split into contiguous blocks; each index is
/// visited exactly once, so writes to slot i of a pre-sized output are
/// scheduling-independent.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * block;
        const std::size_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
}

/// Standard normal density and distribution function.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace lsv
