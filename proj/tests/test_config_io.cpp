#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "mcdsim/config.hpp"
#include "mcdsim/csv.hpp"

using namespace mcdsim;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream(p, std::ios::trunc) << content;
    return p;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
    SECTION("an empty object yields the documented defaults") {
        const ExperimentConfig cfg = parse_config(nlohmann::json::object());
        REQUIRE(cfg.train.pem.frequency == 50e3);
        REQUIRE(cfg.train.pem.peak_retardance == Approx(kPi / 2.0).margin(1e-12));
        REQUIRE(cfg.source.probe_mean_power == Approx(100e-6).margin(1e-12));
        REQUIRE(cfg.losses.detector_efficiency == Approx(0.95).margin(1e-12));
        REQUIRE(cfg.train.sample);
        REQUIRE(cfg.train.sample->mean_amp_transmission ==
                Approx(std::sqrt(0.80)).margin(1e-12));
        REQUIRE(cfg.train.input_polarizer_angle == Approx(kPi / 4.0).margin(1e-12));
        REQUIRE(cfg.readout_mode == "both");
    }

    SECTION("angles come in as degrees, retardance in waves, fields in mT") {
        const auto j = nlohmann::json::parse(R"({
            "train": {"input_polarizer_angle_deg": 90.0,
                       "pem": {"peak_retardance_waves": 0.5},
                       "sample": {"power_transmission": 0.64}},
            "sweep": {"fields_mT": [0, 250], "repeats": 4}
        })");
        const ExperimentConfig cfg = parse_config(j);
        REQUIRE(cfg.train.input_polarizer_angle == Approx(kPi / 2.0).margin(1e-12));
        REQUIRE(cfg.train.pem.peak_retardance == Approx(kPi).margin(1e-12));
        REQUIRE(cfg.train.sample->mean_amp_transmission == Approx(0.8).margin(1e-12));
        REQUIRE(cfg.fields_T == std::vector<double>{0.0, 0.25});
        REQUIRE(cfg.repeats == 4);
    }

    SECTION("validation errors name the key path") {
        REQUIRE_THROWS_WITH(parse_config(nlohmann::json::parse(R"({"sweep":{"repeats":1}})")),
                            "config key sweep.repeats must be >= 2");
        REQUIRE_THROWS_WITH(
            parse_config(nlohmann::json::parse(R"({"sweep":{"readout":"quantum"}})")),
            "config key sweep.readout must be 'both', 'classical', or 'squeezed'");
        REQUIRE_THROWS_WITH(parse_config(nlohmann::json::parse(R"({"source":{"gain":"x"}})")),
                            "config key source.gain must be a number");
        REQUIRE_THROWS(parse_config(nlohmann::json::parse(
            R"({"losses":{"conjugate_nd":"automatic"}})")));
        REQUIRE_THROWS(parse_config(nlohmann::json::parse(
            R"({"train":{"sample":{"power_transmission":1.5}}})")));
    }

    SECTION("config hash is stable under key reordering") {
        const auto p1 = write_temp("mcdsim_cfg_a.json",
                                   R"({"source":{"gain":2.0},"sweep":{"repeats":3}})");
        const auto p2 = write_temp("mcdsim_cfg_b.json",
                                   R"({"sweep":{"repeats":3},"source":{"gain":2.0}})");
        REQUIRE(load_config_file(p1).config_hash == load_config_file(p2).config_hash);
        const auto p3 = write_temp("mcdsim_cfg_c.json",
                                   R"({"source":{"gain":2.5},"sweep":{"repeats":3}})");
        REQUIRE(load_config_file(p1).config_hash != load_config_file(p3).config_hash);
    }

    SECTION("manifest carries hash, seed, version, timestamp") {
        RunManifest m{"deadbeef00000000", 42, kToolVersion, "2026-01-01T00:00:00Z"};
        const auto j = nlohmann::json::parse(manifest_json(m));
        REQUIRE(j["config_hash"] == "deadbeef00000000");
        REQUIRE(j["master_seed"] == 42);
        REQUIRE(j["tool_version"] == kToolVersion);
        REQUIRE(j["created_utc"] == "2026-01-01T00:00:00Z");
    }
}

TEST_CASE("csv serialization") {
    SECTION("sweep rows carry 9 significant digits and the fixed header") {
        std::vector<SweepPoint> pts{
            {0.0, 0.0, 1.234567891e-5, 2e-8, -3.0, Readout::classical_balanced},
            {0.6, 0.0123456789, 1e-5, 2e-8, -3.0, Readout::squeezed}};
        const std::string csv = sweep_csv(pts);
        REQUIRE(csv.rfind("field_mT,eta_f_mean,eta_f_std,p_omega_W,noise_floor_dB,readout\n",
                          0) == 0);
        REQUIRE(csv.find("600,0.0123456789,1e-05,2e-08,-3,squeezed\n") != std::string::npos);
        REQUIRE(csv.find("classical") != std::string::npos);
        REQUIRE(csv.find("1.23456789e-05") != std::string::npos);
    }

    SECTION("trace csv round trip") {
        TracePoints pts{{45000.0, -4.75}, {45100.0, -5.0}, {45200.0, 0.25}};
        const TracePoints back = parse_trace_csv(trace_csv(pts));
        REQUIRE(back.size() == pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            REQUIRE(back[i].first == Approx(pts[i].first).epsilon(1e-9));
            REQUIRE(back[i].second == Approx(pts[i].second).epsilon(1e-9));
        }
    }

    SECTION("malformed rows are rejected with their line number") {
        REQUIRE_THROWS_WITH(
            parse_trace_csv("freq_Hz,power_dB_rel_SNL\n100,-3\n200,abc\n"),
            "trace csv line 3: invalid number 'abc' in column power_dB_rel_SNL");
        REQUIRE_THROWS_WITH(parse_trace_csv("freq_Hz,power\n100,-3\n"),
                            "trace csv line 1: expected header 'freq_Hz,power_dB_rel_SNL'");
        REQUIRE_THROWS_WITH(parse_trace_csv("freq_Hz,power_dB_rel_SNL\n100,-3,9\n"),
                            "trace csv line 2: expected 2 fields, got 3");
        REQUIRE_THROWS_WITH(parse_trace_csv("freq_Hz,power_dB_rel_SNL\n200,-3\n100,-4\n"),
                            "trace csv line 3: frequencies must be strictly increasing");
    }

    SECTION("time series csv round trip and uniform-grid check") {
        TimeSeries ts{1e6, 0.0, {1.0, 2.0, 3.0, 4.0}};
        const TimeSeries back = parse_timeseries_csv(timeseries_csv(ts));
        REQUIRE(back.sample_rate == Approx(1e6).epsilon(1e-9));
        REQUIRE(back.samples == ts.samples);
        REQUIRE_THROWS(parse_timeseries_csv("t_s,power_W\n0,1\n1,2\n5,3\n"));
    }

    SECTION("atomic write leaves no temporary behind") {
        const fs::path p = fs::temp_directory_path() / "mcdsim_atomic.txt";
        write_file_atomic(p, "payload");
        REQUIRE(read_file(p) == "payload");
        REQUIRE_FALSE(fs::exists(p.string() + ".tmp"));
        fs::remove(p);
    }
}
