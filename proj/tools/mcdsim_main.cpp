// mcdsim command-line front end: noise-floor tables, field sweeps, synthetic
// spectrum-analyzer traces, trace analysis, and lock-in demodulation of
// external time series. All randomized paths take --seed and write a run
// manifest next to their outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mcdsim/config.hpp"
#include "mcdsim/csv.hpp"
#include "mcdsim/experiment.hpp"
#include "mcdsim/plot_svg.hpp"

namespace fs = std::filesystem;
using namespace mcdsim;

namespace {

fs::path default_out_dir() {
    const char* env = std::getenv("MCDSIM_OUT_DIR");
    return env && *env ? fs::path(env) : fs::path(".");
}

void ensure_writable(const fs::path& dir, const std::vector<std::string>& names, bool force) {
    fs::create_directories(dir);
    if (force) return;
    for (const std::string& n : names)
        if (fs::exists(dir / n))
            throw std::invalid_argument("output file " + (dir / n).string() +
                                        " exists; pass --force to overwrite");
}

void write_manifest(const fs::path& dir, const std::string& config_hash, std::uint64_t seed) {
    RunManifest m;
    m.config_hash = config_hash;
    m.master_seed = seed;
    m.created_utc = utc_now_iso8601();
    write_file_atomic(dir / "manifest.json", manifest_json(m));
}

int cmd_noise_floor(double gain, double eta, const std::string& budget_path,
                    const std::string& sweep_out) {
    if (gain < 1.0) {
        std::cerr << "error: gain must be >= 1\n";
        return 2;
    }
    if (eta < 0.0 || eta > 1.0) {
        std::cerr << "error: eta must be in [0,1]\n";
        return 2;
    }

    double eta_p = eta, eta_c = eta;
    if (!budget_path.empty()) {
        const LoadedConfig loaded = load_config_file(budget_path);
        eta_p = loaded.config.losses.probe_total();
        eta_c = loaded.config.losses.conjugate_total();
    }

    double floor_db = 0.0, linear = 1.0;
    if (eta_p == eta_c) {
        floor_db = noise_floor_db(gain, eta_p);
        linear = std::pow(10.0, floor_db / 10.0);
    } else {
        // unbalanced arms: evaluate through the covariance pipeline
        const auto s = apply_loss(lossless_stats({gain, 100e-6, 795e-9}, 1e6), eta_p, eta_c);
        linear = s.normalized_difference_variance();
        floor_db = 10.0 * std::log10(linear);
    }
    std::printf("gain %.6g  eta_probe %.6g  eta_conjugate %.6g\n", gain, eta_p, eta_c);
    std::printf("noise floor: %.2f dB  (linear %.6g)\n", floor_db, linear);

    if (!sweep_out.empty()) {
        std::string csv = "gain,eta,noise_floor_dB\n";
        for (const double g : {1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 7.5, 10.0})
            for (int k = 1; k <= 20; ++k) {
                const double e = 0.05 * k;
                csv += format_g9(g) + "," + format_g9(e) + "," +
                       format_g9(noise_floor_db(g, e)) + "\n";
            }
        write_file_atomic(sweep_out, csv);
        std::printf("wrote %s\n", sweep_out.c_str());
    }
    return 0;
}

int cmd_simulate_sweep(const std::string& config_path, std::uint64_t seed, fs::path out_dir,
                       bool force) {
    const LoadedConfig loaded = load_config_file(config_path);
    const ExperimentConfig& cfg = loaded.config;

    std::vector<Readout> readouts;
    if (cfg.readout_mode == "both")
        readouts = {Readout::classical_balanced, Readout::squeezed};
    else if (cfg.readout_mode == "classical")
        readouts = {Readout::classical_balanced};
    else
        readouts = {Readout::squeezed};

    std::vector<SweepPoint> all_points;
    for (const Readout r : readouts) {
        SweepResult result = run_sweep(cfg.sweep_config(r, seed));
        result.config_hash = loaded.config_hash;
        all_points.insert(all_points.end(), result.points.begin(), result.points.end());
    }

    ensure_writable(out_dir, {"sweep.csv", "sweep.svg", "manifest.json"}, force);
    write_file_atomic(out_dir / "sweep.csv", sweep_csv(all_points));
    write_file_atomic(out_dir / "sweep.svg", sweep_svg(all_points));
    write_manifest(out_dir, loaded.config_hash, seed);
    std::printf("wrote %s and %s\n", (out_dir / "sweep.csv").c_str(),
                (out_dir / "sweep.svg").c_str());
    return 0;
}

int cmd_simulate_trace(const std::string& config_path, std::uint64_t seed, fs::path out_dir,
                       bool force, const std::string& timeseries_out) {
    const LoadedConfig loaded = load_config_file(config_path);
    const ExperimentConfig& cfg = loaded.config;
    const SpectrumSettings& sp = cfg.spectrum;

    SweepConfig sweep = cfg.sweep_config(sp.readout, seed);
    sweep.demod.duration = sp.duration;
    const ReadoutPoint point = make_readout_point(sweep, sp.field_T);

    auto [probe, conj] = synthesize(point.train, point.stats, sweep.demod.fs, sp.duration,
                                    derive_seed(seed, 0x7472616345ull), cfg.source.wavelength);
    TimeSeries diff{probe.sample_rate, probe.start_time, probe.samples};
    for (std::size_t i = 0; i < diff.samples.size(); ++i) diff.samples[i] -= conj.samples[i];

    // 0 dB reference: shot level of the summed detected powers in one RBW bin
    const double snl_bin_w2 = 2.0 * (point.stats.mean_p + point.stats.mean_c) *
                              photon_energy(cfg.source.wavelength) *
                              photon_energy(cfg.source.wavelength) * sweep.demod.fs * sp.rbw;

    SpectrumOptions opts;
    opts.n_points = sp.points;
    opts.reference_power = snl_bin_w2;
    const SpectrumTrace trace = spectrum(diff, sp.center, sp.span, sp.rbw, sp.vbw, opts);

    ensure_writable(out_dir, {"trace.csv", "manifest.json"}, force);
    write_file_atomic(out_dir / "trace.csv", trace_csv(trace.points));
    write_manifest(out_dir, loaded.config_hash, seed);
    if (!timeseries_out.empty()) write_file_atomic(timeseries_out, timeseries_csv(diff));
    std::printf("wrote %s\n", (out_dir / "trace.csv").c_str());
    return 0;
}

int cmd_analyze(const std::string& trace_path, const std::string& snl_ref,
                const std::string& band_str, std::optional<double> mod_freq,
                std::optional<double> pdc, std::optional<double> snl_bin_w2,
                const std::string& json_out) {
    const TracePoints trace = read_trace_csv(trace_path);

    std::variant<TracePoints, double> reference;
    try {
        std::size_t used = 0;
        const double scalar = std::stod(snl_ref, &used);
        if (used == snl_ref.size())
            reference = scalar;
        else
            reference = read_trace_csv(snl_ref);
    } catch (const std::invalid_argument&) {
        reference = read_trace_csv(snl_ref);
    }

    std::optional<std::pair<double, double>> band;
    if (!band_str.empty()) {
        const auto colon = band_str.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("--band must be LO:HI in Hz");
        band = {std::stod(band_str.substr(0, colon)), std::stod(band_str.substr(colon + 1))};
    }

    std::optional<EtaInversionScale> inv;
    if (pdc && snl_bin_w2) inv = EtaInversionScale{*pdc, *snl_bin_w2};

    const TraceReport report = analyze_trace(trace, reference, band, mod_freq, inv);
    std::printf("squeezing: %.2f dB relative to reference (%zu bins)\n", report.squeezing_db,
                report.band_points);
    std::printf("peak: %.2f dB at %.6g Hz\n", report.peak_db, report.peak_freq);
    if (report.eta_f) std::printf("ellipticity: %.6g\n", *report.eta_f);

    if (!json_out.empty()) {
        nlohmann::json j;
        j["squeezing_db"] = report.squeezing_db;
        j["peak_db"] = report.peak_db;
        j["peak_freq_Hz"] = report.peak_freq;
        j["band_points"] = report.band_points;
        if (report.eta_f) j["eta_f"] = *report.eta_f;
        write_file_atomic(json_out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_demodulate(const std::string& series_path, double f_ref, int harmonic, double tau,
                   const std::string& json_out) {
    const TimeSeries ts = read_timeseries_csv(series_path);
    const HarmonicResult h = lock_in(ts, f_ref, harmonic, tau);
    std::printf("harmonic %d at %.6g Hz: amplitude %.9g, phase %.6g rad, window %.6g s\n",
                h.harmonic_order, harmonic * f_ref, h.amplitude, h.phase, h.integration_time);
    if (!json_out.empty()) {
        nlohmann::json j;
        j["harmonic"] = h.harmonic_order;
        j["amplitude"] = h.amplitude;
        j["phase_rad"] = h.phase;
        j["integration_time_s"] = h.integration_time;
        write_file_atomic(json_out, j.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mcdsim: squeezed-light MCD polarimetry simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // noise-floor
    double gain = 1.0, eta = 1.0;
    std::uint64_t floor_seed = 0;
    std::string budget_path, floor_sweep_out;
    CLI::App* floor = app.add_subcommand("noise-floor", "intensity-difference noise floor");
    floor->add_option("--gain", gain, "amplifier gain G (>= 1)");
    floor->add_option("--eta", eta, "balanced path transmission in [0,1]");
    floor->add_option("--budget", budget_path, "config file with a losses section");
    floor->add_option("--sweep", floor_sweep_out, "write a (gain, eta, dB) grid CSV");
    floor->add_option("--seed", floor_seed, "accepted for interface uniformity; unused");

    // simulate-sweep
    std::string sweep_config;
    std::uint64_t sweep_seed = 0;
    std::string sweep_out = default_out_dir().string();
    bool sweep_force = false;
    CLI::App* sweep = app.add_subcommand("simulate-sweep", "field sweep with error bars");
    sweep->add_option("config", sweep_config, "experiment config JSON")->required();
    sweep->add_option("--seed", sweep_seed, "master seed");
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_flag("--force", sweep_force, "overwrite existing outputs");

    // simulate-trace
    std::string trace_config;
    std::uint64_t trace_seed = 0;
    std::string trace_out = default_out_dir().string(), trace_ts_out;
    bool trace_force = false;
    CLI::App* trace = app.add_subcommand("simulate-trace", "synthetic analyzer trace");
    trace->add_option("config", trace_config, "experiment config JSON")->required();
    trace->add_option("--seed", trace_seed, "master seed");
    trace->add_option("--out", trace_out, "output directory");
    trace->add_flag("--force", trace_force, "overwrite existing outputs");
    trace->add_option("--timeseries", trace_ts_out, "also dump the difference series CSV");

    // analyze
    std::string an_trace, an_snl, an_band, an_json;
    std::optional<double> an_mod, an_pdc, an_snl_bin;
    CLI::App* analyze = app.add_subcommand("analyze", "compare a trace against a reference");
    analyze->add_option("trace", an_trace, "trace CSV")->required();
    analyze->add_option("--snl", an_snl, "reference trace CSV or scalar dB level")->required();
    analyze->add_option("--band", an_band, "analysis band LO:HI in Hz");
    analyze->add_option("--mod-freq", an_mod, "look for the signal peak near this frequency");
    analyze->add_option("--pdc", an_pdc, "probe DC power in W (for ellipticity)");
    analyze->add_option("--snl-bin-w2", an_snl_bin, "absolute SNL bin power in W^2");
    analyze->add_option("--json", an_json, "write a machine-readable summary");

    // demodulate
    std::string dm_series, dm_json;
    double dm_fref = 50e3, dm_tau = 1e-3;
    int dm_harmonic = 1;
    CLI::App* demod = app.add_subcommand("demodulate", "lock-in on a time-series CSV");
    demod->add_option("series", dm_series, "time-series CSV (t_s,power_W)")->required();
    demod->add_option("--f-ref", dm_fref, "reference frequency in Hz")->required();
    demod->add_option("--harmonic", dm_harmonic, "harmonic order n");
    demod->add_option("--tau", dm_tau, "integration time in s");
    demod->add_option("--json", dm_json, "write a machine-readable summary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (floor->parsed())
            return cmd_noise_floor(gain, eta, budget_path, floor_sweep_out);
        if (sweep->parsed())
            return cmd_simulate_sweep(sweep_config, sweep_seed, sweep_out, sweep_force);
        if (trace->parsed())
            return cmd_simulate_trace(trace_config, trace_seed, trace_out, trace_force,
                                      trace_ts_out);
        if (analyze->parsed())
            return cmd_analyze(an_trace, an_snl, an_band, an_mod, an_pdc, an_snl_bin, an_json);
        if (demod->parsed())
            return cmd_demodulate(dm_series, dm_fref, dm_harmonic, dm_tau, dm_json);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
