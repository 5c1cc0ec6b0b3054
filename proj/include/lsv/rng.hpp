#pragma once

#include <array>
#include <cstdint>

namespace lsv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A (key, counter) pair maps to four independent 32-bit words, so any draw
/// of any stream can be produced without touching the others.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Purpose tags separating independent random streams of one path.
enum class StreamDomain : std::uint32_t {
    spot = 0,
    vol_factor = 1,
    restart = 2,
};

/// Standard normal draws for one substream keyed by (seed, stream, path, domain).
/// Draw k of a substream is a pure function of those keys and k.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t path,
                 StreamDomain domain = StreamDomain::spot);

    double next();

    /// Uniform in (0, 1), consuming one half of a block.
    double next_uniform();

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    double cached_[2] = {0.0, 0.0};
    int available_ = 0;
    double ucached_[2] = {0.0, 0.0};
    int uavailable_ = 0;
};

}  // namespace lsv
