/**
 * @file config.hpp
 * @brief Experiment configuration file (JSON), defaults, validation with
 *        key-path errors, stable config hashing, and run manifests.
 */

#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "mcdsim/experiment.hpp"

namespace mcdsim {

inline constexpr const char* kToolVersion = "0.1.0";

struct SpectrumSettings {
    double center = 50.0e3;
    double span = 20.0e3;
    double rbw = 3.0e3;
    double vbw = 300.0;
    int points = 161;
    double duration = 0.5;   // s of synthesized series feeding the analyzer
    double field_T = 0.0;
    Readout readout = Readout::squeezed;
};

struct ExperimentConfig {
    SqueezedSourceModel source{};
    LossBudget losses{};
    std::optional<double> conjugate_nd{};  // absent: auto balance
    TrainConfig train{};
    MaterialResponse material{};
    std::vector<double> fields_T{0.0, 0.6};
    int repeats = 2;
    std::string readout_mode = "both";     // both | classical | squeezed
    bool noiseless = false;
    double electronic_noise_photons2 = 0.0;
    DemodConfig demod{};
    SpectrumSettings spectrum{};

    SweepConfig sweep_config(Readout readout, std::uint64_t seed) const {
        SweepConfig cfg;
        cfg.fields_T = fields_T;
        cfg.repeats = repeats;
        cfg.readout = readout;
        cfg.noiseless = noiseless;
        cfg.source = source;
        cfg.losses = losses;
        cfg.conjugate_nd = conjugate_nd;
        cfg.train = train;
        cfg.material = material;
        cfg.demod = demod;
        cfg.seed = seed;
        cfg.electronic_noise_photons2 = electronic_noise_photons2;
        return cfg;
    }
};

namespace detail {

using nlohmann::json;

inline const json* find(const json& j, const std::string& key) {
    const auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double get_num(const json& j, const std::string& path, const std::string& key,
                      double fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_number())
        throw std::invalid_argument("config key " + path + "." + key + " must be a number");
    return v->get<double>();
}

inline bool get_bool(const json& j, const std::string& path, const std::string& key,
                     bool fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_boolean())
        throw std::invalid_argument("config key " + path + "." + key + " must be a boolean");
    return v->get<bool>();
}

inline std::string get_str(const json& j, const std::string& path, const std::string& key,
                           const std::string& fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_string())
        throw std::invalid_argument("config key " + path + "." + key + " must be a string");
    return v->get<std::string>();
}

inline void read_path_map(const json& j, const std::string& path,
                          std::vector<std::pair<std::string, double>>& out) {
    if (!j.is_object()) throw std::invalid_argument("config key " + path + " must be an object");
    out.clear();
    for (const auto& [label, v] : j.items()) {
        if (!v.is_number())
            throw std::invalid_argument("config key " + path + "." + label +
                                        " must be a number");
        out.emplace_back(label, v.get<double>());
    }
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

}  // namespace detail

/// Build a validated configuration from parsed JSON, applying the documented
/// defaults. Errors name the offending key path.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::find;
    using detail::get_bool;
    using detail::get_num;
    using detail::get_str;

    if (!j.is_object()) throw std::invalid_argument("config root must be an object");
    ExperimentConfig cfg;

    if (const auto* s = find(j, "source")) {
        cfg.source.gain = get_num(*s, "source", "gain", cfg.source.gain);
        cfg.source.probe_mean_power =
            get_num(*s, "source", "probe_mean_power_W", cfg.source.probe_mean_power);
        cfg.source.wavelength = get_num(*s, "source", "wavelength_m", cfg.source.wavelength);
    }

    cfg.losses.detector_efficiency = 0.95;
    if (const auto* l = find(j, "losses")) {
        if (const auto* p = find(*l, "probe_path"))
            detail::read_path_map(*p, "losses.probe_path", cfg.losses.probe_path_transmissions);
        if (const auto* c = find(*l, "conjugate_path"))
            detail::read_path_map(*c, "losses.conjugate_path",
                                  cfg.losses.conjugate_path_transmissions);
        cfg.losses.detector_efficiency =
            get_num(*l, "losses", "detector_efficiency", cfg.losses.detector_efficiency);
        if (const auto* nd = find(*l, "conjugate_nd")) {
            if (nd->is_string()) {
                if (nd->get<std::string>() != "auto")
                    throw std::invalid_argument(
                        "config key losses.conjugate_nd must be a number or \"auto\"");
            } else if (nd->is_number()) {
                cfg.conjugate_nd = nd->get<double>();
            } else {
                throw std::invalid_argument(
                    "config key losses.conjugate_nd must be a number or \"auto\"");
            }
        }
    }

    if (const auto* t = find(j, "train")) {
        cfg.train.input_polarizer_angle =
            detail::deg2rad(get_num(*t, "train", "input_polarizer_angle_deg", 45.0));
        cfg.train.second_hwp_angle =
            detail::deg2rad(get_num(*t, "train", "second_hwp_angle_deg", 0.0));
        cfg.train.input_power = get_num(*t, "train", "input_power_W", cfg.train.input_power);
        if (const auto* p = find(*t, "pem")) {
            cfg.train.pem.frequency = get_num(*p, "train.pem", "frequency_Hz", 50.0e3);
            cfg.train.pem.peak_retardance =
                2.0 * kPi * get_num(*p, "train.pem", "peak_retardance_waves", 0.25);
            cfg.train.pem.axis_angle =
                detail::deg2rad(get_num(*p, "train.pem", "axis_angle_deg", 0.0));
            cfg.train.pem.phase = get_num(*p, "train.pem", "phase_rad", 0.0);
        }
        if (const auto* s = find(*t, "sample")) {
            SampleModel sample;
            const double t2 = get_num(*s, "train.sample", "power_transmission", 0.80);
            if (!(t2 > 0.0 && t2 <= 1.0))
                throw std::invalid_argument(
                    "config key train.sample.power_transmission must be in (0,1]");
            sample.mean_amp_transmission = std::sqrt(t2);
            sample.thickness = get_num(*s, "train.sample", "thickness_m", 500e-6);
            sample.wavelength = get_num(*s, "train.sample", "wavelength_m", cfg.source.wavelength);
            cfg.train.sample = sample;
        }
        if (const auto* b = find(*t, "background")) {
            BackgroundModel bg;
            bg.retardance = get_num(*b, "train.background", "retardance_rad", 0.0);
            bg.axis_angle = detail::deg2rad(get_num(*b, "train.background", "axis_angle_deg", 0.0));
            bg.detector_pol_sensitivity =
                get_num(*b, "train.background", "detector_pol_sensitivity", 0.0);
            cfg.train.background = bg;
        }
    } else {
        cfg.train.sample = SampleModel{0.0, 0.0, std::sqrt(0.80), 500e-6, cfg.source.wavelength};
    }

    if (const auto* m = find(j, "material")) {
        const std::string kind = get_str(*m, "material", "kind", "linear");
        if (kind == "linear")
            cfg.material.kind = MaterialKind::linear;
        else if (kind == "saturating")
            cfg.material.kind = MaterialKind::saturating;
        else
            throw std::invalid_argument(
                "config key material.kind must be 'linear' or 'saturating'");
        cfg.material.slope = get_num(*m, "material", "slope_per_T", cfg.material.slope);
        cfg.material.saturation_field =
            get_num(*m, "material", "saturation_field_T", cfg.material.saturation_field);
        cfg.material.theta_slope =
            get_num(*m, "material", "theta_slope_per_T", cfg.material.theta_slope);
    }

    if (const auto* s = find(j, "sweep")) {
        if (const auto* f = find(*s, "fields_mT")) {
            if (!f->is_array())
                throw std::invalid_argument("config key sweep.fields_mT must be an array");
            cfg.fields_T.clear();
            for (const auto& v : *f) {
                if (!v.is_number())
                    throw std::invalid_argument("config key sweep.fields_mT must hold numbers");
                cfg.fields_T.push_back(v.get<double>() * 1e-3);
            }
        }
        const double rep = get_num(*s, "sweep", "repeats", cfg.repeats);
        cfg.repeats = static_cast<int>(rep);
        if (cfg.repeats < 2) throw std::invalid_argument("config key sweep.repeats must be >= 2");
        cfg.readout_mode = get_str(*s, "sweep", "readout", cfg.readout_mode);
        if (cfg.readout_mode != "both" && cfg.readout_mode != "classical" &&
            cfg.readout_mode != "squeezed")
            throw std::invalid_argument(
                "config key sweep.readout must be 'both', 'classical', or 'squeezed'");
        cfg.noiseless = get_bool(*s, "sweep", "noiseless", cfg.noiseless);
        cfg.electronic_noise_photons2 =
            get_num(*s, "sweep", "electronic_noise_photons2", cfg.electronic_noise_photons2);
    }

    if (const auto* d = find(j, "demod")) {
        cfg.demod.fs = get_num(*d, "demod", "fs_Hz", cfg.demod.fs);
        cfg.demod.duration = get_num(*d, "demod", "duration_s", cfg.demod.duration);
        cfg.demod.tau = get_num(*d, "demod", "tau_s", cfg.demod.tau);
        cfg.demod.harmonic = static_cast<int>(get_num(*d, "demod", "harmonic", cfg.demod.harmonic));
    }

    if (const auto* sp = find(j, "spectrum")) {
        cfg.spectrum.center = get_num(*sp, "spectrum", "center_Hz", cfg.spectrum.center);
        cfg.spectrum.span = get_num(*sp, "spectrum", "span_Hz", cfg.spectrum.span);
        cfg.spectrum.rbw = get_num(*sp, "spectrum", "rbw_Hz", cfg.spectrum.rbw);
        cfg.spectrum.vbw = get_num(*sp, "spectrum", "vbw_Hz", cfg.spectrum.vbw);
        cfg.spectrum.points = static_cast<int>(get_num(*sp, "spectrum", "points", cfg.spectrum.points));
        cfg.spectrum.duration = get_num(*sp, "spectrum", "duration_s", cfg.spectrum.duration);
        cfg.spectrum.field_T = get_num(*sp, "spectrum", "field_mT", cfg.spectrum.field_T * 1e3) * 1e-3;
        const std::string r = get_str(*sp, "spectrum", "readout", "squeezed");
        if (r == "squeezed")
            cfg.spectrum.readout = Readout::squeezed;
        else if (r == "classical")
            cfg.spectrum.readout = Readout::classical_balanced;
        else
            throw std::invalid_argument(
                "config key spectrum.readout must be 'classical' or 'squeezed'");
    }

    cfg.source.validate();
    cfg.losses.validate();
    cfg.train.validate();
    cfg.material.validate();
    cfg.demod.validate();
    return cfg;
}

// --- hashing & manifest -----------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct LoadedConfig {
    ExperimentConfig config{};
    std::string config_hash{};  // hash of the canonical (key-sorted) dump
};

inline LoadedConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config parse error in " + path.string() + ": " + e.what());
    }
    LoadedConfig out;
    out.config = parse_config(j);
    out.config_hash = hex64(fnv1a64(j.dump()));
    return out;
}

struct RunManifest {
    std::string config_hash{};
    std::uint64_t master_seed = 0;
    std::string tool_version = kToolVersion;
    std::string created_utc{};
};

inline std::string utc_now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string manifest_json(const RunManifest& m) {
    nlohmann::json j;
    j["config_hash"] = m.config_hash;
    j["master_seed"] = m.master_seed;
    j["tool_version"] = m.tool_version;
    j["created_utc"] = m.created_utc;
    return j.dump(2) + "\n";
}

}  // namespace mcdsim
