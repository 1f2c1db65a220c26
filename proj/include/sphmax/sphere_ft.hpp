#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>

namespace sphmax {

// ---------------------------------------------------------------------------
// Fourier transform of the continuous sphere measure d(sigma_r): the surface
// measure on the radius-r sphere in R^d, normalized so the total mass is
// pi^{d/2} / Gamma(d/2) for every r. With the e(x.xi) convention the
// transform is radial:
//
//   sigma_r_hat(xi) = mass(d) * A_d(2 pi r |xi|),
//   A_d(z) = Gamma(d/2) (z/2)^{-(d-2)/2} J_{(d-2)/2}(z),  A_d(0) = 1.
// ---------------------------------------------------------------------------

inline double sphere_measure_mass(int d) {
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

namespace detail {

// A_d(z) by its entire power series; used for small z and as a cross-check.
inline double sphere_profile_series(int d, double z) {
    const double nu = 0.5 * d - 1.0;
    const double w = -0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 80; ++k) {
        term *= w / (static_cast<double>(k) * (nu + k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return sum;
}

// J_{3/2} in closed form; exact up to rounding for all z > 0.
inline double bessel_j_3_2(double z) {
    return std::sqrt(2.0 / (std::numbers::pi * z)) * (std::sin(z) / z - std::cos(z));
}

}  // namespace detail

// A_d(z): the radial profile of the unit-mass sphere transform.
inline double sphere_profile(int d, double z) {
    if (d < 2) throw std::invalid_argument("sphere_profile: d must be >= 2");
    z = std::abs(z);
    if (z < 0.5) return detail::sphere_profile_series(d, z);
    const double nu = 0.5 * d - 1.0;
    double jnu = (d == 5) ? detail::bessel_j_3_2(z) : std::cyl_bessel_j(nu, z);
    return std::tgamma(0.5 * d) * std::pow(0.5 * z, -nu) * jnu;
}

inline std::complex<double> continuous_sphere_ft(int d, double r, std::span<const double> xi) {
    if (r <= 0.0) throw std::invalid_argument("continuous_sphere_ft: r must be positive");
    double norm2 = 0.0;
    for (double x : xi) norm2 += x * x;
    double z = 2.0 * std::numbers::pi * r * std::sqrt(norm2);
    return {sphere_measure_mass(d) * sphere_profile(d, z), 0.0};
}

}  // namespace sphmax
