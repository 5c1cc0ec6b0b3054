#include "lsv/rng.hpp"

#include <cmath>
#include <numbers>

namespace lsv {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53 random bits from two words, mapped to (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t path,
                           StreamDomain domain)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, static_cast<std::uint32_t>(path), stream,
               static_cast<std::uint32_t>(domain) | (static_cast<std::uint32_t>(path >> 32) << 4)} {}

void NormalStream::refill() {
    const auto w = philox4x32(counter_, key_);
    ++counter_[0];
    const double u1 = to_open_unit(w[0], w[1]);
    const double u2 = to_open_unit(w[2], w[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_[0] = radius * std::cos(angle);
    cached_[1] = radius * std::sin(angle);
    available_ = 2;
}

double NormalStream::next() {
    if (available_ == 0) refill();
    return cached_[2 - available_--];
}

double NormalStream::next_uniform() {
    if (uavailable_ == 0) {
        const auto w = philox4x32(counter_, key_);
        ++counter_[0];
        ucached_[0] = to_open_unit(w[0], w[1]);
        ucached_[1] = to_open_unit(w[2], w[3]);
        uavailable_ = 2;
    }
    return ucached_[2 - uavailable_--];
}

}  // namespace lsv
