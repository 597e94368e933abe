/**
 * @file rng.hpp
 * @brief Deterministic, chunkable Gaussian sampling.
 *
 * Normal deviates are produced by Box-Muller from explicitly constructed
 * 53-bit uniforms, so streams are bit-identical for a given seed across
 * standard-library implementations. Long outputs are generated in fixed-size
 * chunks whose sub-seeds derive from (seed, chunk index) only, so the fill
 * order never affects the result.
 */

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mcdsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Stable sub-stream seed for work unit `index` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

/// Standard-normal stream (mean 0, variance 1).
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline constexpr std::size_t kGaussianChunk = 4096;

/// Fill `out` with standard normals; chunk i is seeded by derive_seed(seed, i)
/// so any partition of the work yields identical samples.
inline void fill_standard_normal(std::span<double> out, std::uint64_t seed) {
    for (std::size_t start = 0; start < out.size(); start += kGaussianChunk) {
        GaussianSampler g(derive_seed(seed, start / kGaussianChunk));
        const std::size_t stop = std::min(start + kGaussianChunk, out.size());
        for (std::size_t i = start; i < stop; ++i) out[i] = g();
    }
}

}  // namespace mcdsim
