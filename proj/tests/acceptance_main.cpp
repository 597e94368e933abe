// Acceptance suite: exercises the full simulation chain against its closed
// forms and quantitative relations, one pass/fail line per criterion.
// Exit code is the number of failed criteria.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "mcdsim/config.hpp"
#include "mcdsim/csv.hpp"
#include "mcdsim/experiment.hpp"

using namespace mcdsim;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// independent Bessel oracle: ascending power series, 25 terms
double bessel_series(int n, double x) {
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= x / (2.0 * k);
    double sum = term;
    for (int k = 1; k <= 25; ++k) {
        term *= -(x * x / 4.0) / (k * (n + k));
        sum += term;
    }
    return sum;
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / v.size();
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / (v.size() - 1);
}

// --- criterion 1: Jones pipeline matches the closed-form power law ------------

void criterion_1() {
    double worst = 0.0;
    for (const double eta_f : {1e-4, 1e-2, 0.1}) {
        TrainConfig train;
        train.sample = SampleModel{0.0, eta_f, std::sqrt(0.8)};
        const double pdc = train.input_power * 0.8 * std::cosh(2.0 * eta_f);
        const double omega = 2.0 * kPi * train.pem.frequency;
        for (int i = 0; i <= 2000; ++i) {
            const double t = i / (2000.0 * train.pem.frequency);
            const double dev =
                std::abs(detector_power(train, t) -
                         closed_form_power(pdc, eta_f, kPi / 2.0, omega, t)) / pdc;
            worst = std::max(worst, dev);
        }
    }
    report(1, "pipeline power matches the closed form over a period grid", worst < 1e-9,
           fmt("max rel dev %.2e, tol 1e-9", worst));
}

// --- criterion 2: lock-in first harmonic follows the Bessel law ---------------

void criterion_2() {
    const double j1_oracle = bessel_series(1, kPi / 2.0);
    const double j1_err = std::abs(bessel_j1_quarter_wave() - j1_oracle);

    double worst = 0.0;
    for (const double eta_f : {1e-4, 1e-3, 1e-2, 1e-1}) {
        TrainConfig train;
        train.sample = SampleModel{0.0, eta_f, std::sqrt(0.8)};
        auto [probe, conj] = synthesize(train, std::nullopt, 1.0e6, 2e-3, 1);
        const auto h = lock_in(probe, train.pem.frequency, 1, 2e-3);
        const double p_dc = mean_of(probe.samples);
        const double expected = 2.0 * p_dc * j1_oracle * std::tanh(2.0 * eta_f);
        worst = std::max(worst, std::abs(h.amplitude - expected) / expected);
    }
    report(2, "first harmonic equals 2 Pdc J1(pi/2) tanh(2 eta_f)",
           worst < 1e-6 && j1_err < 1e-10,
           fmt("max rel dev %.2e (tol 1e-6); J1(pi/2)=%.9f vs series oracle, dev %.1e",
               worst, bessel_j1_quarter_wave(), j1_err));
}

// --- criterion 3: covariance pipeline equals the noise-floor law --------------

void criterion_3() {
    const double gains[] = {1.0, 1.5, 2.0, 2.29, 5.0, 10.0};

    double worst_analytic = 0.0, worst_limit = 0.0, worst_mc = 0.0;
    for (const double g : gains) {
        const auto s1 = lossless_stats({g, 100e-6, 795e-9}, 1e6);
        worst_limit = std::max(
            worst_limit, std::abs(s1.normalized_difference_variance() - 1.0 / (2.0 * g - 1.0)));
        for (int k = 1; k <= 20; ++k) {
            const double eta = 0.05 * k;
            const auto s = apply_loss(lossless_stats({g, 100e-6, 795e-9}, 1e6), eta, eta);
            const double law = 1.0 - 2.0 * eta * (g - 1.0) / (2.0 * g - 1.0);
            worst_analytic =
                std::max(worst_analytic, std::abs(s.normalized_difference_variance() - law));

            const auto [p, c] = sample_fluctuations(
                s, 1'000'000, derive_seed(33, static_cast<std::uint64_t>(100 * g + k)));
            std::vector<double> d(p.size());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = p[i] - c[i];
            const double mc = var_of(d) / (s.mean_p + s.mean_c);
            worst_mc = std::max(worst_mc, std::abs(mc - law) / law);
        }
    }
    report(3, "difference variance equals 1 - 2 eta (G-1)/(2G-1)",
           worst_analytic < 1e-12 && worst_limit < 1e-12 && worst_mc < 0.03,
           fmt("analytic dev %.1e (tol 1e-12), eta=1 limit dev %.1e, MC dev %.1f%% (tol 3%%)",
               worst_analytic, worst_limit, 100.0 * worst_mc));
}

// --- criterion 4: instrument operating points through the full chain ----------

void criterion_4() {
    const double g = calibrate_gain(-5.0, 0.95);
    const double round_trip = std::abs(noise_floor_db(g, 0.95) + 5.0);
    const double floor_sample = noise_floor_db(g, 0.95 * 0.8);
    const bool eq3_ok = round_trip < 1e-9 && std::abs(floor_sample + 3.45) < 0.1;

    // Monte Carlo + spectrum-analyzer path at the same operating point
    SweepConfig cfg;
    cfg.fields_T = {0.0};
    cfg.repeats = 2;
    cfg.readout = Readout::squeezed;
    cfg.source.gain = g;
    cfg.losses.detector_efficiency = 0.95;
    cfg.train.sample = SampleModel{0.0, 0.0, std::sqrt(0.8)};
    cfg.demod = DemodConfig{1.0e6, 0.5, 1e-3, 1};
    const ReadoutPoint point = make_readout_point(cfg, 0.0);

    auto [probe, conj] = synthesize(point.train, point.stats, 1.0e6, 0.5, 2026);
    TimeSeries diff{probe.sample_rate, 0.0, probe.samples};
    for (std::size_t i = 0; i < diff.samples.size(); ++i) diff.samples[i] -= conj.samples[i];

    const double eph = photon_energy(cfg.source.wavelength);
    SpectrumOptions opts;
    opts.reference_power =
        2.0 * (point.stats.mean_p + point.stats.mean_c) * eph * eph * 1.0e6 * 3000.0;
    const auto trace = spectrum(diff, 50e3, 10e3, 3000.0, 300.0, opts);
    double level = 0.0;
    for (const auto& [f, db] : trace.points) level += db;
    level /= trace.points.size();

    report(4, "calibrated G, lossy sample, balanced conjugate nd",
           eq3_ok && std::abs(point.nd_transmission - 0.8) < 1e-12 &&
               std::abs(level + 3.45) < 0.3,
           fmt("G=%.4f, law floor %.4f dB (-3.45 +/- 0.1), nd %.3g, SA path %.2f dB "
               "(-3.45 +/- 0.3)",
               g, floor_sample, point.nd_transmission, level));
}

// --- criterion 5: squeezed error bars shrink by the floor amplitude ratio -----

void criterion_5() {
    // At a -3 dB floor the expected reduction is 1 - 10^(-3/20) = 29.3%. The
    // 35% average reduction reported for the physical instrument corresponds
    // to an effective floor near -3.7 dB (1 - 10^(-3.7/20) = 34.7%), i.e. it
    // sits beyond the -3 dB configuration tested here; that gap is recorded,
    // not asserted away.
    const double eta = 0.95 * 0.8;
    SweepConfig cfg;
    cfg.fields_T = {0.0, 0.1, 0.2, 0.3, 0.4, 0.6};
    cfg.repeats = 200;
    cfg.source.gain = calibrate_gain(-3.0, eta);
    cfg.losses.detector_efficiency = 0.95;
    cfg.conjugate_nd = 0.8;
    cfg.train.sample = SampleModel{0.0, 0.0, std::sqrt(0.8)};
    cfg.demod = DemodConfig{1.0e6, 1e-3, 1e-3, 1};
    cfg.seed = 3;

    cfg.readout = Readout::squeezed;
    const SweepResult sq = run_sweep(cfg);
    cfg.readout = Readout::classical_balanced;
    const SweepResult cl = run_sweep(cfg);

    double ratio = 0.0;
    for (std::size_t i = 0; i < sq.points.size(); ++i)
        ratio += sq.points[i].std_eta_f / cl.points[i].std_eta_f;
    ratio /= sq.points.size();
    const double reduction = 1.0 - ratio;

    report(5, "error-bar reduction at a -3 dB floor", std::abs(reduction - 0.293) < 0.05,
           fmt("reduction %.1f%% vs 29.3%% +/- 5 pp (repeats=200); 35%% corresponds to "
               "a -3.7 dB effective floor",
               100.0 * reduction));
}

// --- criterion 6: background artifact is minimized but not suppressed ---------

void criterion_6() {
    TrainConfig train;
    train.background = BackgroundModel{0.01, 0.4, 0.02};

    const double baseline = zero_field_first_harmonic(train, train.second_hwp_angle);
    const double angle = minimize_background(train);
    const double residual = zero_field_first_harmonic(train, angle);

    double grid_min = baseline;
    for (int i = 0; i < 64; ++i)
        grid_min = std::min(grid_min, zero_field_first_harmonic(train, i * kPi / 64.0));

    report(6, "trim HWP reduces the zero-field artifact >= 10x, not to zero",
           baseline > 0.0 && residual > 0.0 && residual <= baseline / 10.0 &&
               residual <= grid_min,
           fmt("baseline %.3e W, residual %.3e W (%.0fx down), 64-grid oracle %.3e W",
               baseline, residual, baseline / residual, grid_min));
}

// --- criterion 7: spectrum-analyzer calibration at the instrument settings ----

void criterion_7() {
    const double fs = 1.0e6, rbw = 3000.0, vbw = 300.0;

    const double amp = 2e-6;
    TimeSeries ts{fs, 0.0, std::vector<double>(500000)};
    for (std::size_t i = 0; i < ts.samples.size(); ++i)
        ts.samples[i] = amp * std::sin(2.0 * kPi * 50e3 * i / fs + 0.3);
    SpectrumOptions tone_opts;
    tone_opts.reference_power = amp * amp / 2.0;
    const auto tone_trace = spectrum(ts, 50e3, 10e3, rbw, vbw, tone_opts);
    double tone_peak = -1e9;
    for (const auto& [f, db] : tone_trace.points) tone_peak = std::max(tone_peak, db);

    TimeSeries noise{fs, 0.0, std::vector<double>(500000)};
    fill_standard_normal(noise.samples, 424242);
    SpectrumOptions noise_opts;
    noise_opts.reference_power = (2.0 / fs) * rbw;  // one-sided density x rbw
    const auto noise_trace = spectrum(noise, 50e3, 20e3, rbw, vbw, noise_opts);
    double noise_worst = 0.0;
    for (const auto& [f, db] : noise_trace.points)
        noise_worst = std::max(noise_worst, std::abs(db));

    report(7, "SA emulation: tone and noise-density calibration",
           std::abs(tone_peak) < 0.3 && noise_worst < 0.5,
           fmt("tone dev %.3f dB (tol 0.3), worst noise bin dev %.3f dB (tol 0.5), "
               "rbw 3 kHz vbw 300 Hz",
               tone_peak, noise_worst));
}

// --- criterion 8: ellipticity inversion round trip ----------------------------

void criterion_8() {
    double worst = 0.0;
    for (const double eta_f :
         {-0.1, -0.05, -0.01, -1e-3, -1e-4, 1e-4, 1e-3, 0.01, 0.05, 0.1}) {
        TrainConfig train;
        train.sample = SampleModel{0.0, eta_f, std::sqrt(0.8)};
        auto [probe, conj] = synthesize(train, std::nullopt, 1.0e6, 2e-3, 1);
        const auto h = lock_in(probe, train.pem.frequency, 1, 2e-3);
        const double recovered =
            invert_first_harmonic(kFirstHarmonicSign * h.in_phase(), mean_of(probe.samples));
        worst = std::max(worst, std::abs(recovered - eta_f));
    }

    SweepConfig cfg;
    cfg.fields_T = {0.0, 0.3, 0.6};
    cfg.repeats = 2;
    cfg.noiseless = true;
    cfg.source.gain = 2.0;
    cfg.losses.detector_efficiency = 0.95;
    cfg.conjugate_nd = 0.8;
    cfg.train.sample = SampleModel{0.0, 0.0, std::sqrt(0.8)};
    cfg.demod = DemodConfig{1.0e6, 1e-3, 1e-3, 1};
    const SweepResult sweep = run_sweep(cfg);

    report(8, "eta_f -> simulate -> invert round trip",
           worst < 1e-10 && sweep.points.front().mean_eta_f == 0.0,
           fmt("max abs dev %.2e over |eta_f| <= 0.1 (tol 1e-10); offset B=0 entry = %g",
               worst, sweep.points.front().mean_eta_f));
}

// --- criterion 9: determinism of seeded sweeps ---------------------------------

void criterion_9() {
    SweepConfig cfg;
    cfg.fields_T = {0.0, 0.2, 0.6};
    cfg.repeats = 8;
    cfg.source.gain = 2.0;
    cfg.losses.detector_efficiency = 0.95;
    cfg.conjugate_nd = 0.8;
    cfg.train.sample = SampleModel{0.0, 0.0, std::sqrt(0.8)};
    cfg.demod = DemodConfig{1.0e6, 1e-3, 1e-3, 1};
    cfg.seed = 7;

    cfg.readout = Readout::squeezed;
    const std::string a = sweep_csv(run_sweep(cfg).points);
    const std::string b = sweep_csv(run_sweep(cfg).points);
    cfg.readout = Readout::classical_balanced;
    const std::string c = sweep_csv(run_sweep(cfg).points);
    const std::string d = sweep_csv(run_sweep(cfg).points);

    report(9, "seeded sweeps serialize byte-identically", a == b && c == d && a != c,
           fmt("%zu-byte CSVs; per-unit derived seeds make results schedule-independent",
               a.size()));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("%s: %d of 9 criteria failed\n", g_failures == 0 ? "OK" : "FAILED", g_failures);
    return g_failures;
}
