/**
 * @file optical_train.hpp
 * @brief Parametric catalog of the polarimeter's optical elements and
 *        time-domain evaluation of the detected power.
 *
 * The modeled train, in traversal order:
 *   input polarizer -> photoelastic modulator -> sample (optional)
 *   -> static birefringent background (optional) -> trim half-wave plate
 *   -> photodiode with a small H/V responsivity asymmetry.
 *
 * For the ideal configuration (45 deg input, PEM at quarter-wave peak
 * retardance on the horizontal axis, circular-dichroic sample only) the
 * received power reduces to
 *     P(t) = Pdc * [1 - sin(delta0 sin(w t)) * tanh(2 eta_F)],
 * with Pdc = P0 * tbar^2 * cosh(2 eta_F) the mean transmitted power.
 */

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mcdsim/polarization.hpp"

namespace mcdsim {

/// Photoelastic modulator: retardance delta(t) = delta0 * sin(w t + phase).
struct PemConfig {
    double axis_angle = 0.0;               // fast-axis orientation, rad
    double peak_retardance = kPi / 2.0;    // delta0, rad; quarter-wave peak
    double frequency = 50.0e3;             // Hz
    double phase = 0.0;                    // modulation phase offset, rad

    void validate() const {
        if (!(peak_retardance > 0.0 && peak_retardance <= kPi))
            throw std::invalid_argument("pem peak retardance must be in (0, pi]");
        if (!(frequency > 0.0)) throw std::invalid_argument("pem frequency must be > 0");
    }
};

/// Circular dichroic retarder. In the circular basis it is
/// diag(t_R e^{+i theta_f}, t_L e^{-i theta_f}) with
/// t_R = tbar e^{-eta_f}, t_L = tbar e^{+eta_f}, so
/// (ln t_L - ln t_R)/2 = eta_f and (phi_R - phi_L)/2 = theta_f.
struct SampleModel {
    double theta_f = 0.0;                  // circular birefringence rotation, rad
    double eta_f = 0.0;                    // circular dichroism ellipticity
    double mean_amp_transmission = 1.0;    // tbar = sqrt(t_r * t_l)
    double thickness = 0.0;                // m, metadata
    double wavelength = 0.0;               // m, metadata

    double t_right() const { return mean_amp_transmission * std::exp(-eta_f); }
    double t_left() const { return mean_amp_transmission * std::exp(+eta_f); }

    void validate() const {
        if (!(mean_amp_transmission > 0.0 && mean_amp_transmission <= 1.0))
            throw std::invalid_argument("sample mean transmission must be in (0,1]");
        if (t_left() > 1.0 + 1e-12 || t_right() > 1.0 + 1e-12)
            throw std::invalid_argument("sample circular transmission exceeds 1");
    }
};

/// Residual instrument imperfections: a small static linear birefringence in
/// the optics between sample and trim HWP, and the photodiode's relative
/// responsivity difference between horizontal and vertical components.
struct BackgroundModel {
    double retardance = 0.0;               // rad, |.| < 0.2
    double axis_angle = 0.0;               // rad
    double detector_pol_sensitivity = 0.0; // eps in [0,1)

    void validate() const {
        if (!(std::abs(retardance) < 0.2))
            throw std::invalid_argument("background retardance magnitude must be < 0.2 rad");
        if (!(detector_pol_sensitivity >= 0.0 && detector_pol_sensitivity < 1.0))
            throw std::invalid_argument("detector polarization sensitivity must be in [0,1)");
    }
};

struct TrainConfig {
    double input_polarizer_angle = kPi / 4.0;
    PemConfig pem{};
    std::optional<SampleModel> sample{};
    std::optional<BackgroundModel> background{};
    double second_hwp_angle = 0.0;
    double input_power = 100e-6;           // W, before the sample

    void validate() const {
        if (!(input_power > 0.0)) throw std::invalid_argument("input power must be > 0");
        pem.validate();
        if (sample) sample->validate();
        if (background) background->validate();
    }
};

// --- element catalog ---------------------------------------------------------

struct PolarizerElement { double angle = 0.0; };
struct WaveplateElement { double angle = 0.0; double retardance = 0.0; };
struct NdFilterElement { double transmission = 1.0; };

using OpticalElement =
    std::variant<PolarizerElement, WaveplateElement, PemConfig, SampleModel,
                 BackgroundModel, NdFilterElement>;

/// Jones operator of a catalog element at time t (static elements ignore t).
inline PolarizationOperator element_operator(const OpticalElement& element, double t) {
    struct Visitor {
        double t;
        PolarizationOperator operator()(const PolarizerElement& e) const {
            return linear_polarizer(e.angle);
        }
        PolarizationOperator operator()(const WaveplateElement& e) const {
            return retarder(e.angle, e.retardance);
        }
        PolarizationOperator operator()(const PemConfig& e) const {
            e.validate();
            const double delta =
                e.peak_retardance * std::sin(2.0 * kPi * e.frequency * t + e.phase);
            return retarder(e.axis_angle, delta);
        }
        PolarizationOperator operator()(const SampleModel& e) const {
            e.validate();
            return circular_diagonal(std::polar(e.t_right(), +e.theta_f),
                                     std::polar(e.t_left(), -e.theta_f));
        }
        PolarizationOperator operator()(const BackgroundModel& e) const {
            e.validate();
            return retarder(e.axis_angle, e.retardance);
        }
        PolarizationOperator operator()(const NdFilterElement& e) const {
            return nd_filter(e.transmission);
        }
    };
    return std::visit(Visitor{t}, element);
}

/// Ordered element list for a configured train (detector asymmetry excluded).
inline std::vector<OpticalElement> train_elements(const TrainConfig& train) {
    std::vector<OpticalElement> out;
    out.push_back(PolarizerElement{train.input_polarizer_angle});
    out.push_back(train.pem);
    if (train.sample) out.push_back(*train.sample);
    if (train.background) out.push_back(*train.background);
    out.push_back(WaveplateElement{train.second_hwp_angle, kPi});
    return out;
}

/// Received power at time t, including the photodiode weighting
/// (1+eps)|e_x|^2 + (1-eps)|e_y|^2 (eps = 0 gives total intensity).
inline double detector_power(const TrainConfig& train, double t) {
    const double a = train.input_polarizer_angle;
    PolarizationState s{std::sqrt(train.input_power) * std::cos(a),
                        std::sqrt(train.input_power) * std::sin(a)};
    for (const OpticalElement& e : train_elements(train)) s = apply(element_operator(e, t), s);
    const double eps = train.background ? train.background->detector_pol_sensitivity : 0.0;
    return (1.0 + eps) * std::norm(s.ex) + (1.0 - eps) * std::norm(s.ey);
}

/// The ideal-train closed form P0 * (1 - sin(delta0 sin(w t)) tanh(2 eta_f)),
/// with P0 the mean received power.
inline double closed_form_power(double p0, double eta_f, double delta0, double omega, double t) {
    if (!(p0 > 0.0)) throw std::invalid_argument("p0 must be > 0");
    return p0 * (1.0 - std::sin(delta0 * std::sin(omega * t)) * std::tanh(2.0 * eta_f));
}

}  // namespace mcdsim
