#pragma once

#include <cstdint>
#include <random>

namespace pinnelast {

/// Seeded uniform generator with an explicit bit-to-double mapping, so streams
/// are identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) { return eng_() % n; }

    /// Standard normal via Box-Muller (both values used, cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(6.283185307179586476925286766559 * u2);
        have_spare_ = true;
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::uint64_t raw() { return eng_(); }

    /// Derives an independent stream (for per-stage / per-role seeding).
    Rng fork(std::uint64_t salt) {
        return Rng(raw() ^ (salt * 0x9e3779b97f4a7c15ULL + 0x2545F4914F6CDD1DULL));
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pinnelast
