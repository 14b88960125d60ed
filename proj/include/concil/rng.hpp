// SPDX-License-Identifier: Apache-2.0
#pragma once

// Portable deterministic random number generation.
//
// Every random stream in this library is produced by the generators below,
// never by <random> distributions, whose output is implementation-defined.
// The algorithms are pinned so that an independent implementation can
// reproduce the exact same streams; docs/FORMATS.md carries the normative
// description.
//
//   SplitMix64   Sebastiano Vigna's splitmix64: state advances by the 64-bit
//                golden gamma 0x9E3779B97F4A7C15, output is the xor-shift /
//                multiply finalizer with constants 0xBF58476D1CE4E5B9 and
//                0x94D049BB133111EB.
//   unit double  ((next() >> 11) + 1) * 2^-53, a value in (0, 1].
//   normals      Box-Muller on consecutive unit doubles u1, u2:
//                    r  = sqrt(-2 ln u1)
//                    z0 = r cos(2*pi*u2),  z1 = r sin(2*pi*u2)
//                The pair (z0, z1) is emitted in that order.
//   bounded int  rejection sampling on the top bits (no modulo bias).

#include <cmath>
#include <cstdint>

namespace concil {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in (0, 1]; never 0, so ln() below is safe.
    double next_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::uint64_t state_;
};

// Stream of standard normal deviates (Box-Muller, pair-buffered).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = gen_.next_unit();
        const double u2 = gen_.next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    SplitMix64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable derivation of secondary seeds (growth blocks, per-class shuffles)
// from a base seed and a small index. Part of the documented contract.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return SplitMix64(base ^ (0x9E3779B97F4A7C15ULL * (index + 1))).next();
}

} // namespace concil
