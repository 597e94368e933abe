/**
 * @file polarization.hpp
 * @brief Jones-calculus polarization algebra: complex 2-vectors and 2x2
 *        transfer operators for fully polarized light.
 *
 * Conventions used throughout:
 *  - Field amplitudes are in sqrt(power) units, so intensity(s) is a power.
 *  - Circular basis: e_R = (e_x + i e_y)/sqrt(2), e_L = (e_x - i e_y)/sqrt(2).
 *    Linear polarization at angle a then has e_R = exp(+i a)/sqrt(2), so a
 *    positive phase on e_R rotates the plane of polarization from x toward y.
 *  - Retarder of retardance d with its leading axis at angle t is
 *    R(t) diag(exp(+i d/2), exp(-i d/2)) R(-t).
 *  - Global phase is never normalized away; tests compare up to phase
 *    where stated.
 */

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <utility>

namespace mcdsim {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Fully polarized optical field, horizontal/vertical components.
struct PolarizationState {
    Complex ex{0.0, 0.0};
    Complex ey{0.0, 0.0};

    double intensity() const { return std::norm(ex) + std::norm(ey); }
};

/// 2x2 complex amplitude transfer matrix, row-major [m00 m01; m10 m11].
struct PolarizationOperator {
    Complex m00{1.0, 0.0};
    Complex m01{0.0, 0.0};
    Complex m10{0.0, 0.0};
    Complex m11{1.0, 0.0};

    static PolarizationOperator identity() { return {}; }

    static PolarizationOperator zero() {
        return {Complex{0.0}, Complex{0.0}, Complex{0.0}, Complex{0.0}};
    }

    PolarizationOperator adjoint() const {
        return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
    }

    /// Largest singular value; <= 1 for any passive element.
    double max_singular_value() const {
        // eigenvalues of M^dag M via trace/determinant of the 2x2 Hermitian form
        const double a = std::norm(m00) + std::norm(m10);
        const double d = std::norm(m01) + std::norm(m11);
        const Complex b = std::conj(m00) * m01 + std::conj(m10) * m11;
        const double tr = a + d;
        const double det = a * d - std::norm(b);
        const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
        return std::sqrt(0.5 * (tr + disc));
    }

    /// Frobenius distance of M^dag M from the identity.
    double unitarity_defect() const {
        const PolarizationOperator g = adjoint() * (*this);
        const double d00 = std::abs(g.m00 - 1.0);
        const double d11 = std::abs(g.m11 - 1.0);
        return std::sqrt(d00 * d00 + std::norm(g.m01) + std::norm(g.m10) + d11 * d11);
    }

    friend PolarizationOperator operator*(const PolarizationOperator& a,
                                          const PolarizationOperator& b) {
        return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
    }
};

inline PolarizationState apply(const PolarizationOperator& op, const PolarizationState& s) {
    return {op.m00 * s.ex + op.m01 * s.ey, op.m10 * s.ex + op.m11 * s.ey};
}

/// Product of a train of operators; ops.front() is traversed first.
inline PolarizationOperator compose(std::span<const PolarizationOperator> ops) {
    if (ops.empty()) throw std::invalid_argument("empty train");
    PolarizationOperator acc = ops.front();
    for (std::size_t i = 1; i < ops.size(); ++i) acc = ops[i] * acc;
    return acc;
}

inline PolarizationOperator compose(std::initializer_list<PolarizationOperator> ops) {
    return compose(std::span<const PolarizationOperator>(ops.begin(), ops.size()));
}

// --- element factories -----------------------------------------------------

/// Frame rotation by angle t (x toward y).
inline PolarizationOperator rotator(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {Complex{c}, Complex{-s}, Complex{s}, Complex{c}};
}

/// Ideal linear polarizer with transmission axis at `angle`.
inline PolarizationOperator linear_polarizer(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {Complex{c * c}, Complex{c * s}, Complex{c * s}, Complex{s * s}};
}

/// Linear retarder: retardance `delta` about an axis at `angle`.
inline PolarizationOperator retarder(double angle, double delta) {
    const Complex ep = std::polar(1.0, +0.5 * delta);
    const Complex em = std::polar(1.0, -0.5 * delta);
    const PolarizationOperator d{ep, Complex{0.0}, Complex{0.0}, em};
    return rotator(angle) * d * rotator(-angle);
}

inline PolarizationOperator half_wave_plate(double angle) { return retarder(angle, kPi); }

inline PolarizationOperator quarter_wave_plate(double angle) { return retarder(angle, kPi / 2.0); }

/// Neutral density filter with power transmission `transmission`.
inline PolarizationOperator nd_filter(double transmission) {
    if (!(transmission > 0.0 && transmission <= 1.0))
        throw std::invalid_argument("nd transmission must be in (0,1]");
    const Complex t{std::sqrt(transmission)};
    return {t, Complex{0.0}, Complex{0.0}, t};
}

// --- linear <-> circular basis ---------------------------------------------

/// (e_R, e_L) components of a state; power-preserving unitary map.
inline std::pair<Complex, Complex> to_circular(const PolarizationState& s) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Complex i{0.0, 1.0};
    return {(s.ex + i * s.ey) * inv_sqrt2, (s.ex - i * s.ey) * inv_sqrt2};
}

inline PolarizationState from_circular(Complex er, Complex el) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Complex i{0.0, 1.0};
    return {(er + el) * inv_sqrt2, -i * (er - el) * inv_sqrt2};
}

/// Operator rows map (ex,ey) to (eR,eL).
inline PolarizationOperator linear_to_circular_operator() {
    const double k = 1.0 / std::sqrt(2.0);
    return {Complex{k}, Complex{0.0, k}, Complex{k}, Complex{0.0, -k}};
}

/// Element that is diagonal in the circular basis, expressed in the linear
/// basis: diag(tr_amp e^{i phase_r}, tl_amp e^{i phase_l}) on (e_R, e_L).
inline PolarizationOperator circular_diagonal(Complex r_gain, Complex l_gain) {
    const PolarizationOperator c = linear_to_circular_operator();
    const PolarizationOperator d{r_gain, Complex{0.0}, Complex{0.0}, l_gain};
    return c.adjoint() * d * c;
}

}  // namespace mcdsim
