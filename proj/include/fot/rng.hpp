#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fot {

// splitmix64-based generator. Self-contained so that generated datasets are
// reproducible across standard libraries, not just across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Decorrelated sub-stream (e.g. source vs target sample).
    static Rng stream(std::uint64_t seed, std::uint64_t idx) {
        Rng mix(seed ^ (0x9E3779B97F4A7C15ULL * (idx + 1)));
        return Rng(mix.next_u64());
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fot
