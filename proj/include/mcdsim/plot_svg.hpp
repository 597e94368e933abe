/**
 * @file plot_svg.hpp
 * @brief Minimal static SVG rendering of sweep results (ellipticity vs. field
 *        with error bars, one series per readout).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mcdsim/csv.hpp"
#include "mcdsim/experiment.hpp"

namespace mcdsim {

inline std::string sweep_svg(const std::vector<SweepPoint>& points) {
    constexpr double w = 640.0, h = 480.0;
    constexpr double ml = 80.0, mr = 24.0, mt = 28.0, mb = 56.0;

    double x_lo = 0.0, x_hi = 1e-3, y_lo = 0.0, y_hi = 1e-6;
    if (!points.empty()) {
        x_lo = x_hi = points.front().field_T;
        y_lo = y_hi = points.front().mean_eta_f;
        for (const SweepPoint& p : points) {
            x_lo = std::min(x_lo, p.field_T);
            x_hi = std::max(x_hi, p.field_T);
            y_lo = std::min(y_lo, p.mean_eta_f - p.std_eta_f);
            y_hi = std::max(y_hi, p.mean_eta_f + p.std_eta_f);
        }
    }
    if (x_hi == x_lo) x_hi = x_lo + 1e-3;
    const double pad = 0.05 * (y_hi - y_lo == 0.0 ? 1e-6 : y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const auto px = [&](double b) { return ml + (b - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
    const auto py = [&](double e) { return h - mb - (e - y_lo) / (y_hi - y_lo) * (h - mt - mb); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    svg += "<line x1=\"" + format_g9(ml) + "\" y1=\"" + format_g9(h - mb) + "\" x2=\"" +
           format_g9(w - mr) + "\" y2=\"" + format_g9(h - mb) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + format_g9(ml) + "\" y1=\"" + format_g9(mt) + "\" x2=\"" +
           format_g9(ml) + "\" y2=\"" + format_g9(h - mb) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double b = x_lo + (x_hi - x_lo) * i / 5.0;
        const double e = y_lo + (y_hi - y_lo) * i / 5.0;
        svg += "<text x=\"" + format_g9(px(b)) + "\" y=\"" + format_g9(h - mb + 18.0) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + format_g9(b * 1e3) + "</text>\n";
        svg += "<text x=\"" + format_g9(ml - 8.0) + "\" y=\"" + format_g9(py(e) + 4.0) +
               "\" font-size=\"11\" text-anchor=\"end\">" + format_g9(e) + "</text>\n";
    }
    svg += "<text x=\"" + format_g9((ml + w - mr) / 2.0) + "\" y=\"" + format_g9(h - 14.0) +
           "\" font-size=\"13\" text-anchor=\"middle\">field (mT)</text>\n";
    svg += "<text x=\"18\" y=\"" + format_g9((mt + h - mb) / 2.0) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           format_g9((mt + h - mb) / 2.0) + ")\">ellipticity</text>\n";

    const std::map<Readout, std::string> color{{Readout::classical_balanced, "#c0392b"},
                                               {Readout::squeezed, "#2e6db4"}};
    std::map<Readout, std::string> path;
    for (const SweepPoint& p : points) {
        const std::string& col = color.at(p.readout);
        path[p.readout] += (path[p.readout].empty() ? "M" : " L") + format_g9(px(p.field_T)) +
                           " " + format_g9(py(p.mean_eta_f));
        svg += "<line x1=\"" + format_g9(px(p.field_T)) + "\" y1=\"" +
               format_g9(py(p.mean_eta_f - p.std_eta_f)) + "\" x2=\"" + format_g9(px(p.field_T)) +
               "\" y2=\"" + format_g9(py(p.mean_eta_f + p.std_eta_f)) + "\" stroke=\"" + col +
               "\" stroke-width=\"1\"/>\n";
        svg += "<circle cx=\"" + format_g9(px(p.field_T)) + "\" cy=\"" +
               format_g9(py(p.mean_eta_f)) + "\" r=\"3\" fill=\"" + col + "\"/>\n";
    }
    for (const auto& [readout, d] : path)
        svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color.at(readout) +
               "\" stroke-width=\"1.2\"/>\n";

    double ly = mt + 10.0;
    for (const auto& [readout, col] : color) {
        if (!path.count(readout)) continue;
        svg += "<rect x=\"" + format_g9(w - mr - 140.0) + "\" y=\"" + format_g9(ly - 8.0) +
               "\" width=\"12\" height=\"4\" fill=\"" + col + "\"/>\n";
        svg += "<text x=\"" + format_g9(w - mr - 122.0) + "\" y=\"" + format_g9(ly) +
               "\" font-size=\"12\">" + readout_name(readout) + "</text>\n";
        ly += 18.0;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace mcdsim
