#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace edos {

// Counter-based splittable generator (splitmix64 finalizer). Child streams
// obtained via split() are independent of how many draws the parent made,
// so adding a draw somewhere never reshuffles unrelated streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kGolden)) {}

    Rng split(std::uint64_t stream) const {
        Rng child(0);
        child.key_ = mix(key_ ^ mix(stream + kGolden));
        child.counter_ = 0;
        return child;
    }

    Rng split(std::string_view label) const {
        std::uint64_t h = 1469598103934665603ULL; // FNV-1a
        for (unsigned char c : label) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return split(h);
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // [0, n), unbiased
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t rem = (max % n + 1) % n; // 2^64 mod n
        std::uint64_t x = next_u64();
        if (rem != 0) {
            while (x >= max - rem + 1) x = next_u64();
        }
        return x % n;
    }

    // Standard normal via Marsaglia polar; avoids libm trig for portability.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace edos
