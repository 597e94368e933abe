/**
 * @file csv.hpp
 * @brief Strict CSV serialization for sweep results, spectrum traces, and
 *        time series. Comma separated, '.' decimal, mandatory header, LF line
 *        endings, numbers at 9 significant digits.
 */

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdsim/experiment.hpp"

namespace mcdsim {

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

/// Write via a temporary file and rename, so readers never see partial output.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- writers ---------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "field_mT,eta_f_mean,eta_f_std,p_omega_W,noise_floor_dB,readout";

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const SweepPoint& p : points) {
        out += format_g9(p.field_T * 1e3);
        out += ',';
        out += format_g9(p.mean_eta_f);
        out += ',';
        out += format_g9(p.std_eta_f);
        out += ',';
        out += format_g9(p.p_omega_W);
        out += ',';
        out += format_g9(p.noise_floor_dB);
        out += ',';
        out += readout_name(p.readout);
        out += '\n';
    }
    return out;
}

inline constexpr const char* kTraceCsvHeader = "freq_Hz,power_dB_rel_SNL";

inline std::string trace_csv(const TracePoints& points) {
    std::string out = kTraceCsvHeader;
    out += '\n';
    for (const auto& [f, db] : points) {
        out += format_g9(f);
        out += ',';
        out += format_g9(db);
        out += '\n';
    }
    return out;
}

inline constexpr const char* kTimeSeriesCsvHeader = "t_s,power_W";

inline std::string timeseries_csv(const TimeSeries& ts) {
    std::string out = kTimeSeriesCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        out += format_g9(ts.start_time + i / ts.sample_rate);
        out += ',';
        out += format_g9(ts.samples[i]);
        out += '\n';
    }
    return out;
}

// --- strict readers ----------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& field, const std::string& where, std::size_t line,
                           const std::string& column) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != field.size() || field.empty())
        throw std::invalid_argument(where + " line " + std::to_string(line) +
                                    ": invalid number '" + field + "' in column " + column);
    return v;
}

}  // namespace detail

/// Parse a spectrum-trace CSV; throws with the offending line number.
inline TracePoints parse_trace_csv(const std::string& content,
                                   const std::string& where = "trace csv") {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || detail::split_fields(line) !=
                                       std::vector<std::string>{"freq_Hz", "power_dB_rel_SNL"})
        throw std::invalid_argument(where + " line 1: expected header '" +
                                    std::string(kTraceCsvHeader) + "'");
    TracePoints points;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2)
            throw std::invalid_argument(where + " line " + std::to_string(lineno) +
                                        ": expected 2 fields, got " +
                                        std::to_string(fields.size()));
        const double f = detail::parse_number(fields[0], where, lineno, "freq_Hz");
        const double p = detail::parse_number(fields[1], where, lineno, "power_dB_rel_SNL");
        if (!points.empty() && !(f > points.back().first))
            throw std::invalid_argument(where + " line " + std::to_string(lineno) +
                                        ": frequencies must be strictly increasing");
        points.emplace_back(f, p);
    }
    if (points.size() < 2) throw std::invalid_argument(where + ": needs at least 2 data rows");
    return points;
}

inline TracePoints read_trace_csv(const std::filesystem::path& path) {
    return parse_trace_csv(read_file(path), path.filename().string());
}

/// Parse a time-series CSV with a uniform time grid.
inline TimeSeries parse_timeseries_csv(const std::string& content,
                                       const std::string& where = "timeseries csv") {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) ||
        detail::split_fields(line) != std::vector<std::string>{"t_s", "power_W"})
        throw std::invalid_argument(where + " line 1: expected header '" +
                                    std::string(kTimeSeriesCsvHeader) + "'");
    std::vector<double> times, values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2)
            throw std::invalid_argument(where + " line " + std::to_string(lineno) +
                                        ": expected 2 fields, got " +
                                        std::to_string(fields.size()));
        times.push_back(detail::parse_number(fields[0], where, lineno, "t_s"));
        values.push_back(detail::parse_number(fields[1], where, lineno, "power_W"));
    }
    if (times.size() < 2) throw std::invalid_argument(where + ": needs at least 2 data rows");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::invalid_argument(where + ": time must be increasing");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[0] - i * dt) > 1e-6 * dt * times.size())
            throw std::invalid_argument(where + " line " + std::to_string(i + 2) +
                                        ": non-uniform sample spacing");
    return {1.0 / dt, times[0], std::move(values)};
}

inline TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
    return parse_timeseries_csv(read_file(path), path.filename().string());
}

}  // namespace mcdsim
