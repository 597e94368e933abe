/**
 * @file sigproc.hpp
 * @brief Detector time-series synthesis and demodulation: dual-phase lock-in,
 *        Bessel-harmonic analysis, spectrum-analyzer emulation, and inversion
 *        of the first-harmonic amplitude to ellipticity.
 *
 * All photocurrents are kept in optical-watt-equivalent units; photon-number
 * fluctuations are converted with E_photon * f_s. The first harmonic of the
 * ideal waveform is 2 Pdc J1(delta0) tanh(2 eta_F), which inverts as
 * eta_F = artanh(P_w / (2 Pdc J1(pi/2))) / 2 for the quarter-wave PEM.
 */

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mcdsim/optical_train.hpp"
#include "mcdsim/quantum_noise.hpp"

namespace mcdsim {

inline constexpr double kPlanck = 6.62607015e-34;      // J s
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s

inline double photon_energy(double wavelength) { return kPlanck * kSpeedOfLight / wavelength; }

struct TimeSeries {
    double sample_rate = 0.0;   // Hz
    double start_time = 0.0;    // s
    std::vector<double> samples{};

    double duration() const { return samples.size() / sample_rate; }

    void validate() const {
        if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be > 0");
    }
};

struct HarmonicResult {
    int harmonic_order = 1;
    double amplitude = 0.0;       // same units as the input series
    double phase = 0.0;           // rad; input A sin(2 pi n f t + phase)
    double integration_time = 0.0;

    double in_phase() const { return amplitude * std::cos(phase); }
};

struct SpectrumTrace {
    double center = 0.0;
    double span = 0.0;
    double rbw = 0.0;
    double vbw = 0.0;
    std::vector<std::pair<double, double>> points{};  // (Hz, dB rel reference)
};

// --- Bessel ------------------------------------------------------------------

/// Cylindrical Bessel function of integer order n >= 0.
inline double bessel_j(int n, double x) {
    if (n < 0) throw std::invalid_argument("bessel order must be >= 0");
    if (x < 0.0) {
        const double v = std::cyl_bessel_j(static_cast<double>(n), -x);
        return (n % 2 == 0) ? v : -v;
    }
    return std::cyl_bessel_j(static_cast<double>(n), x);
}

inline double bessel_j1_quarter_wave() {
    static const double value = bessel_j(1, kPi / 2.0);
    return value;
}

// --- synthesis ---------------------------------------------------------------

/// Precompiled evaluator for detector_power over many time points: the static
/// prefix (input state) and suffix (sample, background, trim HWP) of the train
/// are folded once so only the PEM retarder varies with t.
class TrainEvaluator {
  public:
    explicit TrainEvaluator(const TrainConfig& train) : pem_(train.pem) {
        train.validate();
        const double a = train.input_polarizer_angle;
        state0_ = {std::sqrt(train.input_power) * std::cos(a),
                   std::sqrt(train.input_power) * std::sin(a)};
        suffix_ = PolarizationOperator::identity();
        bool after_pem = false;
        for (const OpticalElement& e : train_elements(train)) {
            if (std::holds_alternative<PemConfig>(e)) {
                after_pem = true;
                continue;
            }
            const PolarizationOperator op = element_operator(e, 0.0);
            if (after_pem)
                suffix_ = op * suffix_;
            else
                state0_ = apply(op, state0_);
        }
        eps_ = train.background ? train.background->detector_pol_sensitivity : 0.0;
    }

    double power_at(double t) const {
        const double delta =
            pem_.peak_retardance * std::sin(2.0 * kPi * pem_.frequency * t + pem_.phase);
        const PolarizationOperator chain = suffix_ * retarder(pem_.axis_angle, delta);
        const PolarizationState s = apply(chain, state0_);
        return (1.0 + eps_) * std::norm(s.ex) + (1.0 - eps_) * std::norm(s.ey);
    }

    /// Mean received power over one modulation period (trapezoid-free exact
    /// average of the periodic waveform on a uniform grid).
    double mean_power(int grid = 512) const {
        double acc = 0.0;
        const double period = 1.0 / pem_.frequency;
        for (int i = 0; i < grid; ++i) acc += power_at(i * period / grid);
        return acc / grid;
    }

  private:
    PemConfig pem_;
    PolarizationState state0_{};
    PolarizationOperator suffix_{};
    double eps_ = 0.0;
};

/// Sampled probe and conjugate photocurrents for a configured train. The probe
/// carries the modulated waveform plus stationary Gaussian fluctuations; the
/// conjugate is its constant mean plus correlated fluctuations. `noise`
/// means/variances are photons per sample at the detector.
inline std::pair<TimeSeries, TimeSeries>
synthesize(const TrainConfig& train, const std::optional<PhotocurrentStats>& noise, double fs,
           double duration, std::uint64_t seed, double wavelength = 795e-9) {
    train.validate();
    if (!(fs >= 20.0 * train.pem.frequency)) throw std::invalid_argument("sample rate too low");
    if (!(duration * train.pem.frequency >= 10.0))
        throw std::invalid_argument("duration must cover at least 10 modulation periods");

    const std::size_t n = static_cast<std::size_t>(std::llround(fs * duration));
    const TrainEvaluator eval(train);
    TimeSeries probe{fs, 0.0, std::vector<double>(n)};
    TimeSeries conj{fs, 0.0, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) probe.samples[i] = eval.power_at(i / fs);

    double conj_mean_w = 0.0;
    if (noise) {
        noise->validate();
        if (noise->mean_p < 100.0)
            throw std::invalid_argument("mean photon number too low for Gaussian model");
        const double scale = photon_energy(wavelength) * fs;  // photons -> watts
        conj_mean_w = noise->mean_c * scale;
        auto [dp, dc] = sample_fluctuations(*noise, n, seed);
        for (std::size_t i = 0; i < n; ++i) {
            probe.samples[i] += dp[i] * scale;
            conj.samples[i] = conj_mean_w + dc[i] * scale;
        }
    } else {
        std::fill(conj.samples.begin(), conj.samples.end(), 0.0);
    }
    return {std::move(probe), std::move(conj)};
}

// --- lock-in -----------------------------------------------------------------

/// Dual-phase demodulation at n * f_ref with boxcar integration over an
/// integer number of reference periods (at most `tau` long).
inline HarmonicResult lock_in(const TimeSeries& ts, double f_ref, int n, double tau) {
    ts.validate();
    if (n < 1) throw std::invalid_argument("harmonic order must be >= 1");
    if (!(f_ref > 0.0)) throw std::invalid_argument("reference frequency must be > 0");
    if (!(tau * f_ref >= 5.0))
        throw std::invalid_argument("integration time must cover at least 5 reference periods");

    const double periods = std::floor(tau * f_ref);
    const double t_win = periods / f_ref;
    const std::size_t m = static_cast<std::size_t>(std::llround(t_win * ts.sample_rate));
    if (m > ts.samples.size()) throw std::invalid_argument("window exceeds series");

    const double w = 2.0 * kPi * n * f_ref;
    double in_phase = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double t = ts.start_time + i / ts.sample_rate;
        in_phase += ts.samples[i] * std::sin(w * t);
        quad += ts.samples[i] * std::cos(w * t);
    }
    in_phase *= 2.0 / m;
    quad *= 2.0 / m;
    return {n, std::hypot(in_phase, quad), std::atan2(quad, in_phase),
            static_cast<double>(m) / ts.sample_rate};
}

// --- spectrum-analyzer emulation ----------------------------------------------

struct SpectrumOptions {
    int n_points = 0;              // 0: auto, ~8 points per rbw
    double reference_power = 1.0;  // power (input units squared) mapped to 0 dB
    double floor_db = -400.0;      // reported level for empty bins
};

namespace detail {

/// RAII forward r2c FFT of a real series.
class RealFft {
  public:
    explicit RealFft(const std::vector<double>& x) : n_(x.size()), out_(n_ / 2 + 1) {
        std::vector<double> buf(x);
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_),
                                              buf.data(),
                                              reinterpret_cast<fftw_complex*>(out_.data()),
                                              FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    std::size_t size() const { return n_; }
    const std::complex<double>& operator[](std::size_t j) const { return out_[j]; }

  private:
    std::size_t n_;
    std::vector<std::complex<double>> out_;
};

inline std::size_t next_pow2(std::size_t v) {
    std::size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace detail

/// Swept-filter spectrum estimate: per frequency bin, the series is passed
/// through a Gaussian bandpass of equivalent-noise-bandwidth `rbw`, the power
/// envelope is smoothed by a single-pole video filter of bandwidth `vbw`, and
/// the smoothed power is averaged (RMS detector). A tone of RMS power Q reads
/// Q; white noise of one-sided density N0 reads N0 * rbw.
inline SpectrumTrace spectrum(const TimeSeries& ts, double center, double span, double rbw,
                              double vbw, const SpectrumOptions& opts = {}) {
    ts.validate();
    if (!(span > 0.0 && rbw > 0.0 && vbw > 0.0)) throw std::invalid_argument("invalid band");
    if (rbw < span / 1.0e4) throw std::invalid_argument("invalid band: rbw below span/1e4");
    const double sigma = rbw / std::sqrt(2.0 * kPi);  // ENBW of exp(-df^2/(2 sigma^2)) is rbw
    const double guard = 5.0 * sigma;
    if (!(center - span / 2.0 - guard > 0.0))
        throw std::invalid_argument("invalid band: lower edge reaches DC");
    if (!(center + span / 2.0 + guard < ts.sample_rate / 2.0))
        throw std::invalid_argument("invalid band: upper edge reaches Nyquist");
    if (!(ts.duration() * rbw >= 16.0))
        throw std::invalid_argument("series too short for requested rbw");

    const std::size_t n = ts.samples.size();
    const double df = ts.sample_rate / static_cast<double>(n);
    const detail::RealFft fft(ts.samples);

    const long half_band = std::lround(guard / df);
    const std::size_t m = std::max<std::size_t>(detail::next_pow2(4 * half_band + 8), 1024);
    const double dt_dec = static_cast<double>(n) / (m * ts.sample_rate);
    const double alpha = 1.0 - std::exp(-2.0 * kPi * vbw * dt_dec);
    const std::size_t skip =
        std::min<std::size_t>(m / 3, static_cast<std::size_t>(std::ceil(5.0 / (2.0 * kPi * vbw * dt_dec))));

    const int npts = opts.n_points > 0
                         ? opts.n_points
                         : std::max(33, static_cast<int>(std::lround(8.0 * span / rbw)) + 1);

    std::vector<std::complex<double>> band(m), env(m);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m),
                                      reinterpret_cast<fftw_complex*>(band.data()),
                                      reinterpret_cast<fftw_complex*>(env.data()),
                                      FFTW_BACKWARD, FFTW_ESTIMATE);

    SpectrumTrace trace{center, span, rbw, vbw, {}};
    trace.points.reserve(npts);
    for (int k = 0; k < npts; ++k) {
        const double fk = center - span / 2.0 + span * k / (npts - 1);
        const long jk = std::lround(fk / df);
        std::fill(band.begin(), band.end(), std::complex<double>{0.0, 0.0});
        for (long j = jk - half_band; j <= jk + half_band; ++j) {
            if (j < 1 || j > static_cast<long>(n / 2)) continue;
            const double offset = j * df - fk;
            const double h = std::exp(-offset * offset / (4.0 * sigma * sigma));
            band[static_cast<std::size_t>(((j - jk) % static_cast<long>(m) + m) % m)] +=
                fft[static_cast<std::size_t>(j)] * (2.0 * h / static_cast<double>(n));
        }
        fftw_execute(plan);

        // |envelope|^2 / 2 is instantaneous RMS power; video-filter then average
        double y = 0.5 * std::norm(env[0]);
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 1; i < m; ++i) {
            y += alpha * (0.5 * std::norm(env[i]) - y);
            if (i >= skip) {
                acc += y;
                ++count;
            }
        }
        const double power = count > 0 ? acc / count : y;
        const double level = power > 0.0
                                 ? std::max(10.0 * std::log10(power / opts.reference_power),
                                            opts.floor_db)
                                 : opts.floor_db;
        trace.points.emplace_back(fk, level);
    }
    fftw_destroy_plan(plan);
    return trace;
}

// --- inversion ----------------------------------------------------------------

/// Ellipticity from the signed first-harmonic amplitude and the mean power:
/// eta_F = artanh(p_omega / (2 p_dc J1(pi/2))) / 2. `p_omega` must be signed
/// so that positive ellipticity gives a positive value (the raw in-phase
/// reading of the modeled train is negated; see experiment.hpp).
inline double invert_first_harmonic(double p_omega, double p_dc) {
    if (!(p_dc > 0.0)) throw std::invalid_argument("p_dc must be > 0");
    const double arg = p_omega / (2.0 * p_dc * bessel_j1_quarter_wave());
    if (!(std::abs(arg) < 1.0)) throw std::invalid_argument("signal exceeds model range");
    return 0.5 * std::atanh(arg);
}

}  // namespace mcdsim
