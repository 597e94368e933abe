/**
 * @file quantum_noise.hpp
 * @brief Gaussian statistics of the two-mode squeezed probe/conjugate pair.
 *
 * The seeded phase-insensitive amplifier with gain G maps a coherent seed of
 * n photons/sample to
 *     mean_p = G n,        var_p = G (2G-1) n,
 *     mean_c = (G-1) n,    var_c = (G-1)(2G-1) n,   cov = 2 G (G-1) n,
 * giving a normalized intensity-difference variance of 1/(2G-1) before loss.
 * Beam-splitter loss eta per arm maps mean -> eta mean, Fano F -> eta F + 1
 * - eta, cov -> eta_p eta_c cov; with balanced loss the difference variance
 * normalized to the shot level becomes 1 - 2 eta (G-1)/(2G-1).
 *
 * Mean photon numbers per sample in this instrument are >> 1e3, so photon
 * counting is modeled as jointly Gaussian; configurations below 100
 * photons/sample are rejected by the synthesis layer.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcdsim/rng.hpp"

namespace mcdsim {

struct SqueezedSourceModel {
    double gain = 1.0;               // G >= 1
    double probe_mean_power = 100e-6;  // W at the cell output
    double wavelength = 795e-9;      // m, for photon-energy conversion

    double conjugate_mean_power() const { return probe_mean_power * (gain - 1.0) / gain; }

    void validate() const {
        if (!(gain >= 1.0)) throw std::invalid_argument("gain must be >= 1");
        if (!(probe_mean_power > 0.0)) throw std::invalid_argument("probe power must be > 0");
        if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
    }
};

struct LossBudget {
    std::vector<std::pair<std::string, double>> probe_path_transmissions{};
    std::vector<std::pair<std::string, double>> conjugate_path_transmissions{};
    double detector_efficiency = 1.0;

    double probe_total() const {
        double eta = detector_efficiency;
        for (const auto& [label, e] : probe_path_transmissions) eta *= e;
        return eta;
    }
    double conjugate_total() const {
        double eta = detector_efficiency;
        for (const auto& [label, e] : conjugate_path_transmissions) eta *= e;
        return eta;
    }

    void validate() const {
        auto check = [](double e, const std::string& label) {
            if (!(e > 0.0 && e <= 1.0))
                throw std::invalid_argument("transmission '" + label + "' must be in (0,1]");
        };
        for (const auto& [label, e] : probe_path_transmissions) check(e, label);
        for (const auto& [label, e] : conjugate_path_transmissions) check(e, label);
        check(detector_efficiency, "detector_efficiency");
    }
};

/// First and second moments of the two detected photocurrents, photons/sample.
struct PhotocurrentStats {
    double mean_p = 0.0;
    double mean_c = 0.0;
    double var_p = 0.0;
    double var_c = 0.0;
    double cov_pc = 0.0;

    double difference_variance() const { return var_p + var_c - 2.0 * cov_pc; }

    /// Var(p - c) normalized to the shot level of the summed means.
    double normalized_difference_variance() const {
        return difference_variance() / (mean_p + mean_c);
    }

    void validate() const {
        if (!(var_p >= 0.0 && var_c >= 0.0))
            throw std::invalid_argument("variances must be non-negative");
        if (cov_pc * cov_pc > var_p * var_c * (1.0 + 1e-9))
            throw std::invalid_argument("covariance violates Cauchy-Schwarz");
        // phase-insensitive model: no single-beam sub-Poissonian light
        if (mean_p > 0.0 && var_p / mean_p < 1.0 - 1e-9)
            throw std::invalid_argument("probe Fano factor below 1");
        if (mean_c > 0.0 && var_c / mean_c < 1.0 - 1e-9)
            throw std::invalid_argument("conjugate Fano factor below 1");
    }
};

/// Moments at the amplifier output (no propagation loss).
inline PhotocurrentStats lossless_stats(const SqueezedSourceModel& src, double n_in) {
    src.validate();
    if (!(n_in > 0.0)) throw std::invalid_argument("seed photon number must be > 0");
    const double g = src.gain;
    return {g * n_in, (g - 1.0) * n_in, g * (2.0 * g - 1.0) * n_in,
            (g - 1.0) * (2.0 * g - 1.0) * n_in, 2.0 * g * (g - 1.0) * n_in};
}

/// Uncorrelated Poisson-level moments at the same mean powers.
inline PhotocurrentStats coherent_stats(double mean_p, double mean_c) {
    if (!(mean_p >= 0.0 && mean_c >= 0.0))
        throw std::invalid_argument("means must be non-negative");
    return {mean_p, mean_c, mean_p, mean_c, 0.0};
}

/// Independent beam-splitter loss on each arm.
inline PhotocurrentStats apply_loss(const PhotocurrentStats& stats, double eta_p, double eta_c) {
    if (!(eta_p > 0.0 && eta_p <= 1.0) || !(eta_c > 0.0 && eta_c <= 1.0))
        throw std::invalid_argument("transmission must be in (0,1]");
    return {eta_p * stats.mean_p, eta_c * stats.mean_c,
            eta_p * eta_p * (stats.var_p - stats.mean_p) + eta_p * stats.mean_p,
            eta_c * eta_c * (stats.var_c - stats.mean_c) + eta_c * stats.mean_c,
            eta_p * eta_c * stats.cov_pc};
}

/// Intensity-difference noise floor relative to the shot-noise limit,
/// 10 log10(1 - 2 eta (G-1)/(2G-1)); zero iff eta = 0 or G = 1.
inline double noise_floor_db(double gain, double eta) {
    if (!(gain >= 1.0)) throw std::invalid_argument("gain must be >= 1");
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in [0,1]");
    return 10.0 * std::log10(1.0 - 2.0 * eta * (gain - 1.0) / (2.0 * gain - 1.0));
}

/// Zero-mean jointly Gaussian deviations with the exact covariance of `stats`.
/// Deterministic for a given seed; chunked, so parallel fills agree.
inline std::pair<std::vector<double>, std::vector<double>>
sample_fluctuations(const PhotocurrentStats& stats, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (stats.var_p < 0.0 || stats.var_c < 0.0 ||
        stats.cov_pc * stats.cov_pc > stats.var_p * stats.var_c * (1.0 + 1e-12))
        throw std::invalid_argument("unphysical statistics");

    // Cholesky factor of [[var_p, cov], [cov, var_c]]
    const double sd_p = std::sqrt(stats.var_p);
    const double l10 = sd_p > 0.0 ? stats.cov_pc / sd_p : 0.0;
    const double cond = std::max(stats.var_c - l10 * l10, 0.0);
    const double l11 = std::sqrt(cond);

    std::vector<double> zp(n_samples), zc(n_samples);
    fill_standard_normal(zp, derive_seed(seed, 0x70726F6265ull));  // probe stream
    fill_standard_normal(zc, derive_seed(seed, 0x636F6E6Aull));    // conjugate stream
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double z1 = zp[i];
        zc[i] = l10 * z1 + l11 * zc[i];
        zp[i] = sd_p * z1;
    }
    return {std::move(zp), std::move(zc)};
}

}  // namespace mcdsim
