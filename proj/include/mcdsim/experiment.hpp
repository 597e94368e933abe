/**
 * @file experiment.hpp
 * @brief End-to-end measurement orchestration: magnetic-field sweeps with
 *        classical vs. squeezed readout, conjugate-arm balancing, trim-HWP
 *        background minimization, gain calibration, and trace analysis.
 *
 * Readout model: the demodulated channel is the probe-minus-conjugate
 * photocurrent difference. The squeezed readout uses the two-mode covariance
 * of quantum_noise.hpp; the classical baseline keeps the same per-arm mean
 * powers but uncorrelated Poisson-level statistics, which normalizes its
 * difference noise to exactly 0 dB and makes the error-bar ratio between the
 * readouts equal to the amplitude ratio 10^(floor_dB/20).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mcdsim/optical_train.hpp"
#include "mcdsim/quantum_noise.hpp"
#include "mcdsim/sigproc.hpp"

namespace mcdsim {

// Sign of the modeled chain: positive ellipticity dims the received
// power on the +sin half-cycle, so the signed first harmonic is minus the
// raw in-phase lock-in reading.
inline constexpr double kFirstHarmonicSign = -1.0;

// --- material ------------------------------------------------------------------

enum class MaterialKind { linear, saturating };

/// Field dependence of the sample's magneto-optical response.
struct MaterialResponse {
    MaterialKind kind = MaterialKind::linear;
    double slope = 0.02;             // ellipticity per tesla at B = 0
    double saturation_field = 1.0;   // T, saturating kind only
    double theta_slope = 0.0;        // rotation per tesla (does not reach the
                                     // power signal in this geometry)

    double eta_f_at(double field) const {
        if (kind == MaterialKind::linear) return slope * field;
        return slope * saturation_field * std::tanh(field / saturation_field);
    }
    double theta_f_at(double field) const { return theta_slope * field; }

    void validate() const {
        if (!std::isfinite(slope)) throw std::invalid_argument("material slope must be finite");
        if (kind == MaterialKind::saturating && !(saturation_field > 0.0))
            throw std::invalid_argument("saturation field must be > 0");
    }
};

// --- sweep configuration ---------------------------------------------------------

enum class Readout { classical_balanced, squeezed };

inline const char* readout_name(Readout r) {
    return r == Readout::squeezed ? "squeezed" : "classical";
}

struct DemodConfig {
    double fs = 1.0e6;        // Hz
    double duration = 1.0e-3; // s per repeat
    double tau = 1.0e-3;      // lock-in integration time, s
    int harmonic = 1;

    void validate() const {
        if (!(fs > 0.0)) throw std::invalid_argument("demod.fs must be > 0");
        if (!(duration > 0.0)) throw std::invalid_argument("demod.duration must be > 0");
        if (!(tau > 0.0 && tau <= duration))
            throw std::invalid_argument("demod.tau must be in (0, duration]");
        if (harmonic < 1) throw std::invalid_argument("demod.harmonic must be >= 1");
    }
};

struct SweepConfig {
    std::vector<double> fields_T{};  // must include 0 for offset subtraction
    int repeats = 2;
    Readout readout = Readout::squeezed;
    bool noiseless = false;
    SqueezedSourceModel source{};
    LossBudget losses{};             // fixed optics; the sample and the
                                     // conjugate balancing ND are separate
    std::optional<double> conjugate_nd{};  // absent: balance automatically
    TrainConfig train{};             // sample dichroism is set per field point
    MaterialResponse material{};
    DemodConfig demod{};
    std::uint64_t seed = 0;
    double electronic_noise_photons2 = 0.0;  // optional white pedestal per arm

    void validate() const {
        if (fields_T.empty()) throw std::invalid_argument("fields must be non-empty");
        if (std::none_of(fields_T.begin(), fields_T.end(), [](double b) { return b == 0.0; }))
            throw std::invalid_argument("fields must include 0");
        if (repeats < 2) throw std::invalid_argument("repeats must be >= 2");
        if (!train.sample) throw std::invalid_argument("sweep requires a sample in the train");
        if (electronic_noise_photons2 < 0.0)
            throw std::invalid_argument("electronic noise variance must be >= 0");
        source.validate();
        losses.validate();
        train.validate();
        material.validate();
        demod.validate();
    }
};

struct SweepPoint {
    double field_T = 0.0;
    double mean_eta_f = 0.0;   // zero-field-offset subtracted
    double std_eta_f = 0.0;    // sample standard deviation over repeats
    double p_omega_W = 0.0;    // mean first-harmonic amplitude
    double noise_floor_dB = 0.0;
    Readout readout = Readout::squeezed;
};

struct SweepResult {
    std::vector<SweepPoint> points{};
    std::uint64_t master_seed = 0;
    std::string config_hash{};  // filled by callers that load a config file
};

// --- calibration operations -------------------------------------------------------

/// Conjugate ND transmission that matches the conjugate arm's total
/// transmission to the probe arm's (sample included), so the single-eta
/// noise-floor law applies to the balanced pair.
inline double auto_balance_conjugate(const SqueezedSourceModel& source, const LossBudget& losses,
                                     double sample_power_transmission = 1.0) {
    source.validate();
    losses.validate();
    if (!(sample_power_transmission > 0.0 && sample_power_transmission <= 1.0))
        throw std::invalid_argument("sample transmission must be in (0,1]");
    if (!(source.gain > 1.0))
        throw std::invalid_argument("no conjugate field at gain 1; balance is degenerate");
    double probe = sample_power_transmission;
    for (const auto& [label, e] : losses.probe_path_transmissions) probe *= e;
    double conj = 1.0;
    for (const auto& [label, e] : losses.conjugate_path_transmissions) conj *= e;
    const double nd = probe / conj;
    if (nd > 1.0 + 1e-12)
        throw std::invalid_argument(
            "balance unachievable: required nd transmission exceeds 1");
    return std::min(nd, 1.0);
}

/// Noiseless zero-field first-harmonic magnitude of the train with the trim
/// HWP at `hwp_angle` (the background-minimization objective).
inline double zero_field_first_harmonic(TrainConfig train, double hwp_angle, int grid = 1024) {
    train.second_hwp_angle = hwp_angle;
    if (train.sample) {
        train.sample->eta_f = 0.0;
        train.sample->theta_f = 0.0;
    }
    const TrainEvaluator eval(train);
    const double f = train.pem.frequency;
    double in_phase = 0.0, quad = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double t = i / (grid * f);
        const double p = eval.power_at(t);
        in_phase += p * std::sin(2.0 * kPi * f * t);
        quad += p * std::cos(2.0 * kPi * f * t);
    }
    return 2.0 * std::hypot(in_phase, quad) / grid;
}

/// Trim-HWP angle minimizing the zero-field first harmonic: bracketing scan
/// over [0, pi) followed by golden-section refinement to 1e-4 rad.
inline double minimize_background(const TrainConfig& train) {
    if (!train.background) throw std::invalid_argument("background model required");
    train.validate();

    const auto objective = [&](double angle) { return zero_field_first_harmonic(train, angle); };

    constexpr int kScan = 128;
    double best_x = 0.0, best_v = objective(0.0), max_v = best_v;
    for (int i = 1; i < kScan; ++i) {
        const double x = i * kPi / kScan;
        const double v = objective(x);
        max_v = std::max(max_v, v);
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    }
    // flat objective (no artifact beyond quadrature round-off): any angle works
    if (max_v < 1e-14 * train.input_power) return 0.0;

    double a = best_x - kPi / kScan;
    double b = best_x + kPi / kScan;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = objective(c), fd = objective(d);
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = objective(d);
        }
    }
    const double x = 0.5 * (a + b);
    return x < 0.0 ? x + kPi : x;
}

/// Gain reaching `target_db` of intensity-difference squeezing at balanced
/// transmission `eta`; inverts the noise-floor law in closed form.
inline double calibrate_gain(double target_db, double eta) {
    if (!(target_db <= 0.0)) throw std::invalid_argument("target must be <= 0 dB");
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in [0,1]");
    if (target_db == 0.0) return 1.0;
    const double v = std::pow(10.0, target_db / 10.0);
    // the floor saturates at 1 - eta as G grows
    if (!(v > 1.0 - eta))
        throw std::invalid_argument("insufficient transmission for target squeezing");
    return (2.0 * eta - 1.0 + v) / (2.0 * (eta - 1.0 + v));
}

// --- sweep ------------------------------------------------------------------------

/// Train and photon statistics for one operating point of a sweep: the fixed
/// optics scale the waveform, the sample dichroism follows the material law,
/// and the statistics' probe mean matches the waveform's mean detected power.
struct ReadoutPoint {
    TrainConfig train{};
    PhotocurrentStats stats{};
    double eta_probe = 0.0;
    double eta_conjugate = 0.0;
    double nd_transmission = 1.0;
};

inline ReadoutPoint make_readout_point(const SweepConfig& cfg, double field) {
    if (!cfg.train.sample) throw std::invalid_argument("sweep requires a sample in the train");
    const double sample_t2 =
        cfg.train.sample->mean_amp_transmission * cfg.train.sample->mean_amp_transmission;
    const double eta_fixed = cfg.losses.probe_total();  // fixed optics + detector

    ReadoutPoint point;
    point.eta_probe = eta_fixed * sample_t2;
    point.nd_transmission = cfg.conjugate_nd
                                ? *cfg.conjugate_nd
                                : auto_balance_conjugate(cfg.source, cfg.losses, sample_t2);
    if (!(point.nd_transmission > 0.0 && point.nd_transmission <= 1.0))
        throw std::invalid_argument("conjugate nd transmission must be in (0,1]");
    point.eta_conjugate = cfg.losses.conjugate_total() * point.nd_transmission;

    point.train = cfg.train;
    point.train.input_power = cfg.source.probe_mean_power * eta_fixed;
    point.train.sample->eta_f = cfg.material.eta_f_at(field);
    point.train.sample->theta_f = cfg.material.theta_f_at(field);
    point.train.validate();

    const double scale = photon_energy(cfg.source.wavelength) * cfg.demod.fs;
    const double mean_photons = TrainEvaluator(point.train).mean_power() / scale;
    const double n_in = mean_photons / (cfg.source.gain * point.eta_probe);
    point.stats = apply_loss(lossless_stats(cfg.source, n_in), point.eta_probe,
                             point.eta_conjugate);
    if (cfg.readout == Readout::classical_balanced)
        point.stats = coherent_stats(point.stats.mean_p, point.stats.mean_c);
    point.stats.var_p += cfg.electronic_noise_photons2;
    point.stats.var_c += cfg.electronic_noise_photons2;
    return point;
}

namespace detail {

struct RepeatEstimate {
    double eta_f;
    double amplitude;
};

inline RepeatEstimate demodulate_repeat(const TrainConfig& train,
                                        const std::optional<PhotocurrentStats>& stats,
                                        const DemodConfig& demod, std::uint64_t seed,
                                        double wavelength) {
    auto [probe, conj] = synthesize(train, stats, demod.fs, demod.duration, seed, wavelength);
    TimeSeries diff{probe.sample_rate, probe.start_time, probe.samples};
    for (std::size_t i = 0; i < diff.samples.size(); ++i) diff.samples[i] -= conj.samples[i];

    const HarmonicResult h = lock_in(diff, train.pem.frequency, demod.harmonic, demod.tau);
    double p_dc = 0.0;
    for (double x : probe.samples) p_dc += x;
    p_dc /= probe.samples.size();

    const double p_omega = kFirstHarmonicSign * h.in_phase();
    return {invert_first_harmonic(p_omega, p_dc), h.amplitude};
}

}  // namespace detail

/// Subtract the zero-field mean from every point (idempotent).
inline void offset_zero_field(std::vector<SweepPoint>& points) {
    const auto it = std::find_if(points.begin(), points.end(),
                                 [](const SweepPoint& p) { return p.field_T == 0.0; });
    if (it == points.end()) throw std::invalid_argument("fields must include 0");
    const double offset = it->mean_eta_f;
    for (SweepPoint& p : points) p.mean_eta_f -= offset;
    it->mean_eta_f = 0.0;
}

/// Field sweep with `repeats` noisy acquisitions per point. Deterministic for
/// a fixed (config, seed): every (field, repeat) unit draws from its own
/// derived stream, so results do not depend on evaluation order.
inline SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();

    const std::uint64_t readout_seed =
        derive_seed(cfg.seed, cfg.readout == Readout::squeezed ? 2 : 1);

    SweepResult result;
    result.master_seed = cfg.seed;
    result.points.reserve(cfg.fields_T.size());

    for (std::size_t fi = 0; fi < cfg.fields_T.size(); ++fi) {
        const double field = cfg.fields_T[fi];
        try {
            const ReadoutPoint point = make_readout_point(cfg, field);

            std::vector<double> etas, amps;
            etas.reserve(cfg.repeats);
            for (int r = 0; r < cfg.repeats; ++r) {
                const std::uint64_t unit_seed =
                    derive_seed(readout_seed, fi * static_cast<std::size_t>(cfg.repeats) + r);
                const auto est = detail::demodulate_repeat(
                    point.train, cfg.noiseless ? std::nullopt : std::optional(point.stats),
                    cfg.demod, unit_seed, cfg.source.wavelength);
                etas.push_back(est.eta_f);
                amps.push_back(est.amplitude);
            }

            double mean = 0.0, amp_mean = 0.0;
            for (int r = 0; r < cfg.repeats; ++r) {
                mean += etas[r];
                amp_mean += amps[r];
            }
            mean /= cfg.repeats;
            amp_mean /= cfg.repeats;
            double var = 0.0;
            for (int r = 0; r < cfg.repeats; ++r) var += (etas[r] - mean) * (etas[r] - mean);
            const double sd = std::sqrt(var / (cfg.repeats - 1));

            result.points.push_back(
                {field, mean, sd, amp_mean,
                 10.0 * std::log10(point.stats.normalized_difference_variance()), cfg.readout});
        } catch (const std::invalid_argument& e) {
            char where[64];
            std::snprintf(where, sizeof(where), " at field %g T", field);
            throw std::invalid_argument(e.what() + std::string(where));
        }
    }

    offset_zero_field(result.points);
    return result;
}

// --- trace analysis -----------------------------------------------------------------

using TracePoints = std::vector<std::pair<double, double>>;  // (Hz, dB)

struct TraceReport {
    double squeezing_db = 0.0;   // mean of (trace - reference) over the band
    double peak_freq = 0.0;
    double peak_db = 0.0;        // peak of (trace - reference)
    std::optional<double> eta_f{};
    std::size_t band_points = 0;
};

/// Scale factors needed to convert a relative peak level back to an absolute
/// first-harmonic amplitude for the ellipticity readout.
struct EtaInversionScale {
    double p_dc = 0.0;               // W
    double snl_bin_power_w2 = 0.0;   // absolute power of the 0 dB reference bin
};

inline TraceReport analyze_trace(const TracePoints& trace,
                                 const std::variant<TracePoints, double>& reference,
                                 std::optional<std::pair<double, double>> band = {},
                                 std::optional<double> mod_freq = {},
                                 std::optional<EtaInversionScale> inversion = {}) {
    if (trace.size() < 2) throw std::invalid_argument("trace needs at least 2 points");
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (!(trace[i].first > trace[i - 1].first))
            throw std::invalid_argument("trace frequencies must be strictly increasing");

    double lo = trace.front().first, hi = trace.back().first;
    const TracePoints* ref_trace = std::get_if<TracePoints>(&reference);
    if (ref_trace) {
        if (ref_trace->size() < 2)
            throw std::invalid_argument("reference needs at least 2 points");
        lo = std::max(lo, ref_trace->front().first);
        hi = std::min(hi, ref_trace->back().first);
        if (!(lo < hi)) throw std::invalid_argument("frequency ranges do not overlap");
    }
    if (band) {
        lo = std::max(lo, band->first);
        hi = std::min(hi, band->second);
        if (!(lo < hi)) throw std::invalid_argument("band outside trace support");
    }

    const auto ref_at = [&](double f) -> double {
        if (!ref_trace) return std::get<double>(reference);
        auto it = std::lower_bound(ref_trace->begin(), ref_trace->end(), f,
                                   [](const auto& p, double x) { return p.first < x; });
        if (it == ref_trace->begin()) return it->second;
        if (it == ref_trace->end()) return (it - 1)->second;
        const auto& [f1, v1] = *(it - 1);
        const auto& [f2, v2] = *it;
        return v1 + (v2 - v1) * (f - f1) / (f2 - f1);
    };

    TraceReport report;
    double acc = 0.0;
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& [f, v] : trace) {
        if (f < lo || f > hi) continue;
        const double rel = v - ref_at(f);
        acc += rel;
        ++report.band_points;
        const bool in_window =
            !mod_freq || std::abs(f - *mod_freq) <= std::max(0.05 * (hi - lo), 1e-9);
        if (in_window && rel > peak) {
            peak = rel;
            report.peak_freq = f;
            report.peak_db = rel;
        }
    }
    if (report.band_points == 0) throw std::invalid_argument("band outside trace support");
    if (peak == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("no trace points near the requested modulation frequency");
    report.squeezing_db = acc / report.band_points;

    if (inversion) {
        // raw trace level at the peak, interpreted relative to the SNL bin
        const auto it = std::find_if(trace.begin(), trace.end(),
                                     [&](const auto& p) { return p.first == report.peak_freq; });
        const double bin_w2 = inversion->snl_bin_power_w2 * std::pow(10.0, it->second / 10.0);
        report.eta_f = invert_first_harmonic(std::sqrt(2.0 * bin_w2), inversion->p_dc);
    }
    return report;
}

}  // namespace mcdsim
