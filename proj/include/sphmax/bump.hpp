#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sphmax {

// ---------------------------------------------------------------------------
// The cutoff pair (Psi, Psi'). Per coordinate, a C^inf plateau built from
// exp(-1/u) transitions:
//
//   psi1      == 1 on |t| <= 1/8, == 0 on |t| >= 1/4
//   psi1'     == 1 on |t| <= 1/4, == 0 on |t| >= 1/2
//
// so the d-dimensional products satisfy Psi * Psi' = Psi exactly.
// ---------------------------------------------------------------------------

namespace detail {

inline double cinf_ramp(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

}  // namespace detail

// 0 for u <= 0, 1 for u >= 1, smooth and strictly monotone in between.
inline double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double a = detail::cinf_ramp(u);
    double b = detail::cinf_ramp(1.0 - u);
    return a / (a + b);
}

inline double bump1(double t) { return smooth_step(8.0 * (0.25 - std::abs(t))); }

inline double bump_prime1(double t) { return smooth_step(4.0 * (0.5 - std::abs(t))); }

inline double bump(std::span<const double> xi) {
    double v = 1.0;
    for (double t : xi) {
        v *= bump1(t);
        if (v == 0.0) return 0.0;
    }
    return v;
}

inline double bump_prime(std::span<const double> xi) {
    double v = 1.0;
    for (double t : xi) {
        v *= bump_prime1(t);
        if (v == 0.0) return 0.0;
    }
    return v;
}

// ---------------------------------------------------------------------------
// One-dimensional Fourier transform of psi1 under the e(ts) = e^{2 pi i t s}
// convention: psi1_hat(s) = 2 int_0^{1/4} psi1(t) cos(2 pi t s) dt (real and
// even). Composite Gauss-Legendre with panel count scaled to the oscillation.
// ---------------------------------------------------------------------------

namespace detail {

struct GaussLegendre {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        nodes.resize(n);
        weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const GaussLegendre& gl16() {
    static const GaussLegendre rule(16);
    return rule;
}

}  // namespace detail

inline double bump_ft_1d(double s) {
    s = std::abs(s);
    const auto& rule = detail::gl16();
    int panels = 2 + static_cast<int>(s / 8.0);
    const double a = 0.0, b = 0.25;
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h;
        double half = 0.5 * h;
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            double t = mid + half * rule.nodes[i];
            acc += rule.weights[i] * bump1(t) * std::cos(2.0 * std::numbers::pi * t * s);
        }
        total += acc * half;
    }
    return 2.0 * total;
}

// Uniform-grid cubic (Catmull-Rom) interpolation table for psi1_hat. The
// transform decays faster than any polynomial; beyond the tabulated range
// the value is clamped to zero and the dropped tail is below tail_bound().
class BumpFtTable {
  public:
    explicit BumpFtTable(double s_max = 256.0, double step = 0.02)
        : step_(step), inv_step_(1.0 / step) {
        if (s_max <= 0 || step <= 0) throw std::invalid_argument("BumpFtTable: bad parameters");
        std::size_t n = static_cast<std::size_t>(s_max / step) + 4;
        values_.resize(n);
        for (std::size_t i = 0; i < n; ++i) values_[i] = bump_ft_1d(static_cast<double>(i) * step);
        // conservative tail estimate: max sample over the last 10% of the range
        tail_bound_ = 0.0;
        for (std::size_t i = n - n / 10; i < n; ++i)
            tail_bound_ = std::max(tail_bound_, std::abs(values_[i]));
    }

    double operator()(double s) const {
        s = std::abs(s) * inv_step_;
        auto i = static_cast<std::size_t>(s);
        if (i + 2 >= values_.size()) return 0.0;
        double f = s - static_cast<double>(i);
        double pm1 = i > 0 ? values_[i - 1] : values_[1];  // even symmetry at 0
        double p0 = values_[i];
        double p1 = values_[i + 1];
        double p2 = values_[i + 2];
        return p0 + 0.5 * f * (p1 - pm1 + f * (2 * pm1 - 5 * p0 + 4 * p1 - p2 + f * (3 * (p0 - p1) + p2 - pm1)));
    }

    double tail_bound() const { return tail_bound_; }
    double s_max() const { return static_cast<double>(values_.size() - 3) * step_; }

  private:
    double step_;
    double inv_step_;
    double tail_bound_ = 0.0;
    std::vector<double> values_;
};

}  // namespace sphmax
