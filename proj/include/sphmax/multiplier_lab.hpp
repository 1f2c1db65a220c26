#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "sphmax/bump.hpp"
#include "sphmax/exp_sums.hpp"
#include "sphmax/lattice_spheres.hpp"
#include "sphmax/sphere_ft.hpp"
#include "sphmax/util.hpp"

namespace sphmax {

// ---------------------------------------------------------------------------
// Torus reduction and the discrete sphere transform.
// ---------------------------------------------------------------------------

// Reduce each coordinate to the fundamental domain [-1/2, 1/2).
inline std::vector<double> reduce_torus(std::span<const double> xi) {
    std::vector<double> out(xi.begin(), xi.end());
    for (double& t : out) {
        t -= std::floor(t);
        if (t >= 0.5) t -= 1.0;
    }
    return out;
}

// sigma_r_hat(xi) = r^{2-d} sum_{|x|^2 = N} e(x . xi), exact over the list.
inline std::complex<double> discrete_sphere_ft(const LatticeSphere& s, std::span<const double> xi) {
    if (xi.size() != static_cast<std::size_t>(s.d))
        throw std::invalid_argument("discrete_sphere_ft: xi must have length d");
    KahanSum re, im;
    const std::size_t d = static_cast<std::size_t>(s.d);
    for (std::uint64_t i = 0; i < s.count; ++i) {
        const std::int64_t* p = s.points.data() + i * d;
        double phase = 0.0;
        for (std::size_t c = 0; c < d; ++c) phase += static_cast<double>(p[c]) * xi[c];
        phase *= 2.0 * std::numbers::pi;
        re.add(std::cos(phase));
        im.add(std::sin(phase));
    }
    double weight = std::pow(static_cast<double>(s.N), 0.5 * (2 - s.d));
    return {weight * re.value(), weight * im.value()};
}

inline std::complex<double> discrete_sphere_ft(int d, std::uint64_t N, std::span<const double> xi) {
    return discrete_sphere_ft(enumerate_sphere(d, N), xi);
}

// ---------------------------------------------------------------------------
// KloostermanBank: per-modulus evaluators with cached Gauss-sum columns,
// lazily constructed. One bank per thread; evaluations through it are pure.
// ---------------------------------------------------------------------------

class KloostermanBank {
  public:
    KloostermanEvaluator& at(std::uint64_t q) {
        auto it = evals_.find(q);
        if (it == evals_.end())
            it = evals_.emplace(q, std::make_unique<KloostermanEvaluator>(q)).first;
        return *it->second;
    }

  private:
    std::map<std::uint64_t, std::unique_ptr<KloostermanEvaluator>> evals_;
};

// ---------------------------------------------------------------------------
// The main-term multiplier of the approximation formula:
//
//   sum_{q <= Q} sum_{n in Z^d} K(q, N; n) Psi(q xi - n) sigma_r_hat(xi - n/q)
//
// Psi has support diameter 1/2 < 1, so for each q at most one n contributes;
// it must be the nearest integer vector to q xi.
// ---------------------------------------------------------------------------

inline std::complex<double> main_term_multiplier(KloostermanBank& bank, int d, std::uint64_t N,
                                                 std::span<const double> xi_in, std::uint64_t Q_max) {
    if (xi_in.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("main_term_multiplier: xi must have length d");
    const std::vector<double> xi = reduce_torus(xi_in);
    const double r = std::sqrt(static_cast<double>(N));
    const double mass = sphere_measure_mass(d);
    std::vector<std::int64_t> n(d);
    std::vector<double> t(d);
    std::complex<double> acc{0.0, 0.0};
    for (std::uint64_t q = 1; q <= Q_max; ++q) {
        bool inside = true;
        double dist2 = 0.0;
        for (int i = 0; i < d; ++i) {
            double v = static_cast<double>(q) * xi[i];
            n[i] = static_cast<std::int64_t>(std::llround(v));
            t[i] = v - static_cast<double>(n[i]);
            if (std::abs(t[i]) >= 0.25) {
                inside = false;
                break;
            }
            double off = xi[i] - static_cast<double>(n[i]) / static_cast<double>(q);
            dist2 += off * off;
        }
        if (!inside) continue;
        double psi = bump(t);
        if (psi == 0.0) continue;
        std::vector<std::uint64_t> nr(d);
        for (int i = 0; i < d; ++i) nr[i] = bank.at(q).modulus().reduce(n[i]);
        std::complex<double> K = bank.at(q).kloosterman(static_cast<std::int64_t>(N), nr).value();
        double sigma = mass * sphere_profile(d, 2.0 * std::numbers::pi * r * std::sqrt(dist2));
        acc += K * psi * sigma;
    }
    return acc;
}

inline std::complex<double> main_term_multiplier(int d, std::uint64_t N, std::span<const double> xi,
                                                 std::uint64_t Q_max) {
    KloostermanBank bank;
    return main_term_multiplier(bank, d, N, xi, Q_max);
}

// ---------------------------------------------------------------------------
// Truncated singular series S_{<=Q}(N) = sum_{q <= Q} K(q, N; 0).
// ---------------------------------------------------------------------------

struct SingularSeries {
    int d = 0;
    std::uint64_t N = 0;
    std::uint64_t Q_max = 0;
    double value = 0.0;
    double imag_residual = 0.0;
};

inline SingularSeries singular_series(KloostermanBank& bank, int d, std::uint64_t N,
                                      std::uint64_t Q_max) {
    if (Q_max < 1) throw std::invalid_argument("singular_series: Q_max must be >= 1");
    std::vector<std::uint64_t> zero(d, 0);
    std::complex<double> acc{0.0, 0.0};
    for (std::uint64_t q = 1; q <= Q_max; ++q)
        acc += bank.at(q).kloosterman(static_cast<std::int64_t>(N), zero).value();
    if (std::abs(acc.imag()) >= 1e-9)
        throw std::domain_error("singular_series: imaginary residue exceeds 1e-9");
    return {d, N, Q_max, acc.real(), std::abs(acc.imag())};
}

inline SingularSeries singular_series(int d, std::uint64_t N, std::uint64_t Q_max) {
    KloostermanBank bank;
    return singular_series(bank, d, N, Q_max);
}

// ---------------------------------------------------------------------------
// MultiplierSample: one frequency-point evaluation of the approximation
// formula; error = discrete - main_term by construction.
// ---------------------------------------------------------------------------

struct MultiplierSample {
    std::vector<double> xi;
    std::uint64_t r_sq = 0;
    std::complex<double> discrete{0.0, 0.0};
    std::complex<double> main_term{0.0, 0.0};
    std::complex<double> error{0.0, 0.0};
    std::uint64_t Q_used = 0;
};

inline MultiplierSample sample_multiplier(KloostermanBank& bank, const LatticeSphere& sphere,
                                          std::span<const double> xi_in, std::uint64_t Q_max = 0) {
    MultiplierSample s;
    s.xi = reduce_torus(xi_in);
    s.r_sq = sphere.N;
    s.Q_used = Q_max ? Q_max : isqrt_u64(sphere.N);
    s.discrete = discrete_sphere_ft(sphere, s.xi);
    s.main_term = main_term_multiplier(bank, sphere.d, sphere.N, s.xi, s.Q_used);
    s.error = s.discrete - s.main_term;
    return s;
}

// ---------------------------------------------------------------------------
// Sampled decay of the error multiplier. The sampled sup is a lower bound
// for the true sup, so the fitted slope is an observed exponent, not a
// verification of the paper-level saving.
// ---------------------------------------------------------------------------

struct DecayPoint {
    std::uint64_t N = 0;
    double e_max = 0.0;
};

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<DecayPoint> points;
    std::size_t samples_per_N = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// Sample k: two thirds low-discrepancy (Kronecker), one third near rational
// points n/q with small q, where the multiplier peaks.
inline std::vector<double> decay_sample(int d, std::uint64_t N, std::size_t k, std::uint64_t seed) {
    static constexpr double kAlpha[8] = {
        0.41421356237309515, 0.7320508075688772, 0.23606797749978969, 0.6457513110645906,
        0.3166247903553998,  0.605551275463989,  0.12310562561766059, 0.3588989435406736};
    std::vector<double> xi(d);
    if (k % 3 == 2) {
        auto rng = stream_rng(seed, N * 0x10001ULL + k);
        std::uint64_t r = isqrt_u64(N);
        std::uint64_t q = 1 + rng.next_below(std::min<std::uint64_t>(8, std::max<std::uint64_t>(r, 1)));
        for (int i = 0; i < d; ++i) {
            auto ni = static_cast<double>(static_cast<std::int64_t>(rng.next_below(q)) -
                                          static_cast<std::int64_t>(q / 2));
            xi[i] = ni / static_cast<double>(q) + rng.next_in(-1e-3, 1e-3) / static_cast<double>(q);
        }
    } else {
        double kk = static_cast<double>(k + 1);
        for (int i = 0; i < d; ++i) {
            double v = kk * kAlpha[i % 8] + 0.5;
            xi[i] = v - std::floor(v) - 0.5;
        }
    }
    return xi;
}

}  // namespace detail

inline DecayFit error_multiplier_decay(int d, std::span<const std::uint64_t> N_list,
                                       std::size_t samples_per_N, std::uint64_t seed,
                                       unsigned threads = 0) {
    std::vector<std::uint64_t> distinct(N_list.begin(), N_list.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2)
        throw std::invalid_argument("error_multiplier_decay: need at least 2 distinct N");

    DecayFit fit;
    fit.samples_per_N = samples_per_N;
    fit.seed = seed;
    for (std::uint64_t N : distinct) {
        LatticeSphere sphere = enumerate_sphere(d, N);
        unsigned T = resolve_threads(threads);
        std::vector<double> partial(T, 0.0);
        parallel_for(T, T, [&](std::size_t t) {
            KloostermanBank bank;
            double local = 0.0;
            for (std::size_t k = t; k < samples_per_N; k += T) {
                std::vector<double> xi = detail::decay_sample(d, N, k, seed);
                MultiplierSample s = sample_multiplier(bank, sphere, xi);
                local = std::max(local, std::abs(s.error));
            }
            partial[t] = local;
        });
        double emax = 0.0;
        for (double v : partial) emax = std::max(emax, v);
        fit.points.push_back({N, emax});
    }
    std::vector<double> lx, ly;
    for (const auto& p : fit.points) {
        lx.push_back(0.5 * std::log(static_cast<double>(p.N)));  // log r
        ly.push_back(std::log(p.e_max));
    }
    LineFit lf = fit_line(lx, ly);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    return fit;
}

// ---------------------------------------------------------------------------
// Factorization identity S^{q1 q2} = U^1 . U^2, exact by the CRT splitting
// of the Kloosterman sums and the support nesting Psi Psi' = Psi. The CRT
// factors carry the unit-twisted squared radii qbar_2^2 N and qbar_1^2 N
// (see kloosterman_sum_crt); with plain N the product deviates at O(1).
// Both sides are evaluated independently without the one-term shortcut;
// the returned value is the max deviation over the samples.
// ---------------------------------------------------------------------------

namespace detail {

template <typename PerCoord>
inline std::complex<double> window_sum(KloostermanEvaluator& ev, std::uint64_t Q, std::uint64_t N,
                                       std::span<const double> v, PerCoord&& psi1) {
    const int d = static_cast<int>(v.size());
    // per-coordinate candidate integers where the window is nonzero
    std::vector<std::vector<std::pair<std::int64_t, double>>> cand(d);
    for (int i = 0; i < d; ++i) {
        auto lo = static_cast<std::int64_t>(std::floor(v[i] - 0.5)) - 1;
        auto hi = static_cast<std::int64_t>(std::ceil(v[i] + 0.5)) + 1;
        for (std::int64_t c = lo; c <= hi; ++c) {
            double w = psi1(v[i] - static_cast<double>(c));
            if (w > 0.0) cand[i].push_back({c, w});
        }
        if (cand[i].empty()) return {0.0, 0.0};
    }
    std::complex<double> acc{0.0, 0.0};
    std::vector<std::size_t> idx(d, 0);
    std::vector<std::uint64_t> n(d);
    while (true) {
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            w *= cand[i][idx[i]].second;
            n[i] = ev.modulus().reduce(cand[i][idx[i]].first);
        }
        acc += ev.kloosterman(static_cast<std::int64_t>(N), n).value() * w;
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[i] < cand[i].size()) break;
            idx[i] = 0;
        }
        if (i == d) break;
    }
    (void)Q;
    return acc;
}

}  // namespace detail

inline double factorization_identity_check(int d, std::uint64_t N, std::uint64_t q1,
                                           std::uint64_t q2, std::size_t xi_samples,
                                           std::uint64_t seed) {
    if (std::gcd(q1, q2) != 1)
        throw std::invalid_argument("factorization_identity_check: moduli must be coprime");
    const std::uint64_t Q = q1 * q2;
    KloostermanEvaluator evQ{Q}, ev1{q1}, ev2{q2};
    const std::uint64_t i2 = q1 == 1 ? 0 : inv_mod(q2 % q1, q1);
    const std::uint64_t i1 = q2 == 1 ? 0 : inv_mod(q1 % q2, q2);
    const std::uint64_t N1 = ((N % q1) * ((i2 * i2) % q1)) % q1;
    const std::uint64_t N2 = ((N % q2) * ((i1 * i1) % q2)) % q2;
    double worst = 0.0;
    std::vector<double> v(d);
    for (std::size_t k = 0; k < xi_samples; ++k) {
        auto rng = stream_rng(seed, k);
        for (int i = 0; i < d; ++i) v[i] = static_cast<double>(Q) * rng.next_in(-0.5, 0.5);
        std::complex<double> S = detail::window_sum(evQ, Q, N, v, [](double t) { return bump1(t); });
        std::complex<double> U1 =
            detail::window_sum(ev1, Q, N1, v, [](double t) { return bump_prime1(t); });
        std::complex<double> U2 = detail::window_sum(ev2, Q, N2, v, [](double t) { return bump1(t); });
        worst = std::max(worst, std::abs(S - U1 * U2));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Kernel of the q-th multiplier piece, evaluated at integer x:
//
//   K^q_r(x) = c_q(N - |x|^2) . q^{-d} int_{S^{d-1}} Psi_hat((x - r w)/q) dsigma(w)
//
// with dsigma the unit-sphere measure of total mass pi^{d/2}/Gamma(d/2).
// The spherical integral uses a product Gauss-Legendre/trapezoid rule in
// hyperspherical angles at two refinement levels.
// ---------------------------------------------------------------------------

struct SphericalRule {
    int d = 0;
    std::vector<double> points;   // flat, node-major
    std::vector<double> weights;  // sums to pi^{d/2}/Gamma(d/2)
};

inline SphericalRule spherical_rule(int d, int n_polar) {
    if (d < 3) throw std::invalid_argument("spherical_rule: d must be >= 3");
    SphericalRule rule;
    rule.d = d;
    detail::GaussLegendre gl(n_polar);
    const int n_azim = 2 * n_polar;
    // recursive product over d-2 polar angles and the azimuth
    std::vector<double> point(d, 0.0);
    auto emit = [&rule](std::span<const double> p, double w) {
        rule.points.insert(rule.points.end(), p.begin(), p.end());
        rule.weights.push_back(w);
    };
    std::function<void(int, double, double)> rec = [&](int level, double prefix_sin, double w) {
        if (level == d - 2) {  // azimuth
            double dphi = 2.0 * std::numbers::pi / n_azim;
            for (int j = 0; j < n_azim; ++j) {
                double phi = (j + 0.5) * dphi;
                point[d - 2] = prefix_sin * std::cos(phi);
                point[d - 1] = prefix_sin * std::sin(phi);
                emit(point, w * dphi);
            }
            return;
        }
        for (int j = 0; j < n_polar; ++j) {
            double theta = 0.5 * std::numbers::pi * (gl.nodes[j] + 1.0);
            double wj = 0.5 * std::numbers::pi * gl.weights[j];
            double s = std::sin(theta), c = std::cos(theta);
            point[level] = prefix_sin * c;
            rec(level + 1, prefix_sin * s, w * wj * std::pow(s, d - 2 - level));
        }
    };
    rec(0, 1.0, 0.5);  // factor 1/2: mass is half the full surface area
    return rule;
}

struct KernelValue {
    std::complex<double> value{0.0, 0.0};
    double quad_rel_err = 0.0;
    bool converged = true;
};

namespace detail {

inline double kernel_geometric_integral(const SphericalRule& rule, const BumpFtTable& ft,
                                        std::span<const std::int64_t> x, double r, double q) {
    const int d = rule.d;
    double acc = 0.0;
    const std::size_t M = rule.weights.size();
    for (std::size_t m = 0; m < M; ++m) {
        const double* w = rule.points.data() + m * static_cast<std::size_t>(d);
        double prod = 1.0;
        for (int i = 0; i < d; ++i) {
            prod *= ft((static_cast<double>(x[i]) - r * w[i]) / q);
            if (prod == 0.0) break;
        }
        acc += rule.weights[m] * prod;
    }
    return acc;
}

}  // namespace detail

inline KernelValue kloosterman_kernel(int d, std::uint64_t N, std::uint64_t q,
                                      std::span<const std::int64_t> x, const BumpFtTable& ft,
                                      int base_nodes = 16, double tol = 1e-4) {
    if (x.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("kloosterman_kernel: x must have length d");
    std::int64_t norm2 = 0;
    for (std::int64_t c : x) norm2 += c * c;
    const double r = std::sqrt(static_cast<double>(N));
    const double qd = static_cast<double>(q);
    SphericalRule coarse = spherical_rule(d, base_nodes);
    SphericalRule fine = spherical_rule(d, base_nodes + 8);
    double I1 = detail::kernel_geometric_integral(coarse, ft, x, r, qd);
    double I2 = detail::kernel_geometric_integral(fine, ft, x, r, qd);
    double scale = std::max({std::abs(I1), std::abs(I2), 1e-12});
    KernelValue out;
    out.quad_rel_err = std::abs(I1 - I2) / scale;
    out.converged = out.quad_rel_err <= tol;
    auto cq = static_cast<double>(ramanujan_exact(q, static_cast<std::int64_t>(N) - norm2));
    out.value = {cq * std::pow(qd, -d) * I2, 0.0};
    return out;
}

}  // namespace sphmax
