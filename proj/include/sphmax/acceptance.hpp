#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sphmax/exp_sums.hpp"
#include "sphmax/lattice_spheres.hpp"
#include "sphmax/multiplier_lab.hpp"
#include "sphmax/operator_bench.hpp"
#include "sphmax/radii_sequences.hpp"
#include "sphmax/util.hpp"

namespace sphmax::acceptance {

// ---------------------------------------------------------------------------
// Regression goldens, frozen at first measurement on the reference build.
// Trend and envelope criteria have no paper-specified numeric targets; the
// recorded values pin them against regressions.
// ---------------------------------------------------------------------------

namespace goldens {
inline constexpr double weil_envelope_max = 1.4543287702085388;
inline constexpr double ramanujan_bound_ratio_max = 4.25;
inline constexpr double n5_ratio_min = 6.7007921320943273;
inline constexpr double n5_ratio_max = 19.764926251375861;
inline constexpr double sing5_min = 0.5216796634869022;
inline constexpr double sing5_max = 1.4560703461753888;
inline constexpr double decay_slope_d4 = -0.74381765899961749;
inline constexpr double decay_slope_d5 = -1.3147155476557983;
inline constexpr double ball_probe_p2_max = 0.76284674071510761;
}  // namespace goldens

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    unsigned threads = 0;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline bool near_golden(double measured, double golden, double rel_tol = 1e-9) {
    if (std::isnan(golden)) return false;  // golden not frozen yet
    double scale = std::max({std::abs(measured), std::abs(golden), 1e-300});
    return std::abs(measured - golden) <= rel_tol * scale;
}

}  // namespace detail

// --- 1. Jacobi / 24 points ------------------------------------------------

inline CriterionResult criterion_jacobi(const Options&) {
    CriterionResult r{1, "Jacobi oracle and the 24-point spheres", false, "", 0};
    const std::uint64_t N_max = 10000;
    auto table = count_table(4, N_max);
    bool ok = true;
    std::uint64_t p4 = 4;
    for (int j = 1; j <= 6; ++j) {
        if (table[p4] != 24) {
            ok = false;
            r.detail = "N_4(4^" + std::to_string(j) + ") = " + std::to_string(table[p4]);
        }
        p4 *= 4;
    }
    std::uint64_t mismatches = 0;
    for (std::uint64_t N = 1; N <= N_max; ++N)
        if (table[N] != jacobi_r4(N)) ++mismatches;
    if (mismatches) {
        ok = false;
        r.detail += " jacobi mismatches=" + std::to_string(mismatches);
    }
    if (ok) r.detail = "N_4(4^j)=24 for j=1..6; DP == jacobi_r4 for all N <= 1e4";
    r.pass = ok;
    return r;
}

// --- 2. Exponential-sum identities -----------------------------------------

inline CriterionResult criterion_exp_sum_identities(const Options&) {
    CriterionResult r{2, "Kloosterman CRT multiplicativity and Ramanujan-Moebius", false, "", 0};
    double worst_crt = 0.0;
    const std::uint64_t seed = 0x5EEDULL;
    std::size_t pair_idx = 0;
    for (std::uint64_t q1 = 2; q1 * q1 <= 200; ++q1) {
        for (std::uint64_t q2 = q1 + 1; q1 * q2 <= 200; ++q2) {
            if (std::gcd(q1, q2) != 1) continue;
            ++pair_idx;
            for (int d : {4, 5}) {
                KloostermanEvaluator evq(q1 * q2);
                for (int k = 0; k < 20; ++k) {
                    auto rng = stream_rng(seed, pair_idx * 4096 + static_cast<std::uint64_t>(d) * 64 +
                                                    static_cast<std::uint64_t>(k));
                    auto N = static_cast<std::int64_t>(rng.next_below(1000000));
                    std::vector<std::int64_t> n(d);
                    for (auto& c : n) c = static_cast<std::int64_t>(rng.next_below(2000001)) - 1000000;
                    SumParams p(d, Modulus(q1 * q2), N, n);
                    double dev = std::abs(kloosterman_sum(p).value() - kloosterman_sum_crt(p).value());
                    worst_crt = std::max(worst_crt, dev);
                }
            }
        }
    }
    std::uint64_t ram_mismatch = 0;
    double worst_ram = 0.0;
    for (std::uint64_t q = 1; q <= 500; ++q) {
        Modulus mod(q);
        for (std::uint64_t N = 1; N <= 500; ++N) {
            double direct = ramanujan_sum(mod, static_cast<std::int64_t>(N));
            // Moebius oracle: sum over divisors of gcd(q, N) of delta * mu(q/delta)
            std::int64_t oracle = 0;
            for (std::uint64_t del : divisors(std::gcd(q, N)))
                oracle += static_cast<std::int64_t>(del) * moebius(q / del);
            double dev = std::abs(direct - static_cast<double>(oracle));
            worst_ram = std::max(worst_ram, dev);
            if (dev > 1e-9) ++ram_mismatch;
        }
    }
    r.pass = worst_crt <= 1e-9 && ram_mismatch == 0;
    r.detail = "max |K - K_crt| = " + detail::fmt(worst_crt) +
               "; max |c_q - oracle| = " + detail::fmt(worst_ram);
    return r;
}

// --- 3. Gauss bound ---------------------------------------------------------

inline CriterionResult criterion_gauss_bound(const Options&) {
    CriterionResult r{3, "Gauss bound for Gauss and Kloosterman sums", false, "", 0};
    std::uint64_t violations = 0;
    double worst_margin = -1e300;
    const std::uint64_t seed = 0x6A055ULL;
    for (std::uint64_t q = 1; q <= 200; ++q) {
        Modulus mod(q);
        const auto& units = mod.units();
        for (int d : {4, 5}) {
            double gauss_cap = std::pow(2.0, 0.5 * d) * std::pow(static_cast<double>(q), -0.5 * d);
            double kloos_cap = std::pow(2.0, 0.5 * d) * std::pow(static_cast<double>(q), 1.0 - 0.5 * d);
            for (int k = 0; k < 10; ++k) {
                auto rng = stream_rng(seed, q * 256 + static_cast<std::uint64_t>(d) * 16 +
                                                static_cast<std::uint64_t>(k));
                std::uint64_t u = units[rng.next_below(units.size())];
                auto N = static_cast<std::int64_t>(rng.next_below(100000));
                std::vector<std::int64_t> n(d);
                for (auto& c : n) c = static_cast<std::int64_t>(rng.next_below(100000));
                SumParams p(d, Modulus(q), N, n);
                ExpSumValue g = gauss_sum(p, u);
                if (g.abs() > gauss_cap + g.abs_error_bound) ++violations;
                ExpSumValue K = kloosterman_sum(p);
                if (K.abs() > kloos_cap + K.abs_error_bound) ++violations;
                worst_margin = std::max(worst_margin, g.abs() - gauss_cap);
            }
        }
    }
    r.pass = violations == 0;
    r.detail = "violations = " + std::to_string(violations) +
               "; worst gauss margin = " + detail::fmt(worst_margin);
    return r;
}

// --- 4. Weil envelope sweep --------------------------------------------------

inline double weil_envelope_sweep() {
    double max_ratio = 0.0;
    const std::uint64_t seed = 0x3E11ULL;
    for (std::uint64_t q : sieve_primes(512)) {
        KloostermanEvaluator ev{q};
        // shared n samples across N: 0 plus four random draws
        std::vector<std::vector<std::int64_t>> ns;
        ns.emplace_back(4, 0);
        for (int k = 0; k < 4; ++k) {
            auto rng = stream_rng(seed, q * 8 + static_cast<std::uint64_t>(k));
            std::vector<std::int64_t> n(4);
            for (auto& c : n) c = static_cast<std::int64_t>(rng.next_below(q));
            ns.push_back(std::move(n));
        }
        double qd = static_cast<double>(q);
        for (std::uint64_t N = 1; N <= 100; ++N) {
            std::uint64_t g = std::gcd(q, N);  // q odd prime here unless q = 2
            if (q == 2) g = std::gcd(std::uint64_t{1}, N);
            double denom = std::pow(qd, -1.5 + 0.1) * std::sqrt(static_cast<double>(g)) *
                           (q == 2 ? std::sqrt(2.0) : 1.0);
            for (const auto& n : ns) {
                std::vector<std::uint64_t> nr(n.size());
                for (std::size_t i = 0; i < n.size(); ++i) nr[i] = ev.modulus().reduce(n[i]);
                double K = std::abs(ev.kloosterman(static_cast<std::int64_t>(N), nr).value());
                max_ratio = std::max(max_ratio, K / denom);
            }
        }
    }
    return max_ratio;
}

inline CriterionResult criterion_weil_envelope(const Options&) {
    CriterionResult r{4, "Weil-envelope sweep reproducibility", false, "", 0};
    double first = weil_envelope_sweep();
    double second = weil_envelope_sweep();
    bool finite = std::isfinite(first);
    bool repro = first == second;
    bool golden_ok = detail::near_golden(first, goldens::weil_envelope_max, 1e-12);
    r.pass = finite && repro && golden_ok;
    r.detail = "max weil_ratio(eps=0.1) = " + detail::fmt(first) +
               (repro ? " (re-run identical)" : " (RE-RUN MISMATCH)") +
               (golden_ok ? "" : " [golden " + detail::fmt(goldens::weil_envelope_max) + "]");
    return r;
}

// --- 5. Ramanujan dyadic average ---------------------------------------------

inline CriterionResult criterion_ramanujan_dyadic(const Options&) {
    CriterionResult r{5, "Dyadic Ramanujan average bound", false, "", 0};
    double max_ratio = 0.0;
    for (std::uint64_t Q = 2; Q <= 256; Q *= 2)
        for (std::uint64_t N = 1; N <= 10000; ++N)
            max_ratio = std::max(max_ratio, ramanujan_dyadic_average(Q, N).bound_ratio);
    bool golden_ok = detail::near_golden(max_ratio, goldens::ramanujan_bound_ratio_max, 1e-12);
    r.pass = golden_ok && max_ratio <= goldens::ramanujan_bound_ratio_max + 1e-12;
    r.detail = "max bound_ratio = " + detail::fmt(max_ratio) +
               (max_ratio <= 2.0 ? " (<= 2 holds)" : " (exceeds 2; documented)");
    return r;
}

// --- 6. Count and singular-series bands ---------------------------------------

inline CriterionResult criterion_bands(const Options&) {
    CriterionResult r{6, "N_5 asymptotic band and singular-series band", false, "", 0};
    auto table = count_table(5, 10000);
    double cmin = 1e300, cmax = 0.0;
    for (std::uint64_t N = 1; N <= 10000; ++N) {
        double ratio = static_cast<double>(table[N]) / std::pow(static_cast<double>(N), 1.5);
        cmin = std::min(cmin, ratio);
        cmax = std::max(cmax, ratio);
    }
    KloostermanBank bank;
    double smin = 1e300, smax = -1e300;
    for (std::uint64_t N = 1; N <= 100; ++N) {
        double s = singular_series(bank, 5, N, 100).value;
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    bool positive = cmin > 0.0 && smin > 0.0;
    bool golden_ok = detail::near_golden(cmin, goldens::n5_ratio_min) &&
                     detail::near_golden(cmax, goldens::n5_ratio_max) &&
                     detail::near_golden(smin, goldens::sing5_min) &&
                     detail::near_golden(smax, goldens::sing5_max);
    r.pass = positive && golden_ok;
    r.detail = "N_5/N^1.5 in [" + detail::fmt(cmin) + ", " + detail::fmt(cmax) + "]; S_100 in [" +
               detail::fmt(smin) + ", " + detail::fmt(smax) + "]";
    return r;
}

// --- 7. Approximation-formula compatibility at xi = 0 --------------------------

inline CriterionResult criterion_compat_zero(const Options&) {
    CriterionResult r{7, "Relative error at xi=0 decays along N = k^2", false, "", 0};
    KloostermanBank bank;
    const double mass = sphere_measure_mass(5);
    auto table = count_table(5, 40 * 40);
    std::vector<double> lx, ly;
    for (std::uint64_t k = 5; k <= 40; ++k) {
        std::uint64_t N = k * k;
        double discrete = static_cast<double>(table[N]) * std::pow(static_cast<double>(N), -1.5);
        double main = singular_series(bank, 5, N, k).value * mass;
        double rel = std::abs(discrete - main) / discrete;
        lx.push_back(std::log(static_cast<double>(k)));
        ly.push_back(std::log(rel));
    }
    LineFit fit = fit_line(lx, ly);
    r.pass = fit.slope < 0.0;
    r.detail = "fitted slope of log relerr vs log r = " + detail::fmt(fit.slope);
    return r;
}

// --- 8. Factorization identity --------------------------------------------------

inline CriterionResult criterion_factorization(const Options&) {
    CriterionResult r{8, "S = U1.U2 factorization identity", false, "", 0};
    double worst = 0.0;
    const std::uint64_t seed = 0xFAC7ULL;
    const std::pair<std::uint64_t, std::uint64_t> pairs[] = {{3, 5}, {3, 8}, {5, 7}, {4, 9}};
    for (int d : {4, 5})
        for (auto [q1, q2] : pairs) {
            std::uint64_t N = (d == 4) ? 9 : 10;
            worst = std::max(worst, factorization_identity_check(d, N, q1, q2, 1000, seed));
        }
    r.pass = worst <= 1e-9;
    r.detail = "max |S - U1.U2| = " + detail::fmt(worst);
    return r;
}

// --- 9. Error-multiplier decay ----------------------------------------------------

inline CriterionResult criterion_error_decay(const Options& opt) {
    CriterionResult r{9, "Observed error-multiplier decay exponent", false, "", 0};
    std::vector<std::uint64_t> Ns;
    for (std::uint64_t k = 5; k <= 12; ++k) Ns.push_back(k * k);
    DecayFit f4 = error_multiplier_decay(4, Ns, 1000, 0xDECA4ULL, opt.threads);
    DecayFit f5 = error_multiplier_decay(5, Ns, 1000, 0xDECA5ULL, opt.threads);
    bool negative = f4.slope < 0.0 && f5.slope < 0.0;
    bool golden_ok = detail::near_golden(f4.slope, goldens::decay_slope_d4) &&
                     detail::near_golden(f5.slope, goldens::decay_slope_d5);
    r.pass = negative && golden_ok;
    r.detail = "slope d=4: " + detail::fmt(f4.slope) + ", d=5: " + detail::fmt(f5.slope);
    return r;
}

// --- 10. Primorial sequence arithmetic ----------------------------------------------

inline CriterionResult criterion_sequence(const Options& opt) {
    CriterionResult r{10, "Primorial radii sequence arithmetic", false, "", 0};
    RadiiSequence seq = generate(1, 1.1, 4);
    bool ok = seq.terms.size() == 4 && seq.terms[0].r_sq == 7 && seq.terms[1].r_sq == 211;
    if (!ok) {
        r.detail = "first terms wrong";
        return r;
    }
    auto classes = classify_primes(seq, 10000, opt.threads);
    std::uint64_t checked_good = 0;
    for (const auto& c : classes) {
        ResidueStatistics st = residue_statistics(seq, c.p);
        bool divides = false;
        for (const auto& t : seq.terms)
            if (residue_mod(t.r_sq, c.p) == 0) divides = true;
        if (c.p == 2 || divides) {
            if (!c.bad) {
                ok = false;
                r.detail = "prime " + std::to_string(c.p) + " should be bad";
            }
        } else {
            ++checked_good;
            if (c.bad || !c.all_units || st.size > st.J_bound + 1) {
                ok = false;
                r.detail = "good prime " + std::to_string(c.p) + " violates G";
            }
        }
    }
    DirichletPartial dir = bad_prime_dirichlet_partial(seq, 1.0, 10000, opt.threads);
    if (dir.bad_sum > dir.surrogate) {
        ok = false;
        r.detail = "dirichlet partial exceeds surrogate";
    }
    r.pass = ok;
    if (ok)
        r.detail = "r1^2=7, r2^2=211; " + std::to_string(checked_good) +
                   " good primes verified; dirichlet " + detail::fmt(dir.bad_sum) +
                   " <= surrogate " + detail::fmt(dir.surrogate);
    return r;
}

// --- 11. Delta-probe closed form and threshold trend ----------------------------------

inline CriterionResult criterion_probes(const Options& opt) {
    CriterionResult r{11, "Delta-probe closed form and p-threshold trend", false, "", 0};
    bool ok = true;
    double worst_cf = 0.0;
    const double ps[] = {1.2, 1.5, 2.0, 3.0, 4.0};
    const std::uint64_t Ns4[] = {1, 4, 9};  // with d=5: {1, 2, 4, 5, 9, 16, 25}
    int triples = 0;
    for (double p : ps) {
        for (std::uint64_t N : Ns4) {
            ProbeResult pr = ratio_probe(4, RadiiSet::custom({N}), p, {ProbeFamily::Delta, 0, 0},
                                         AvgMode::Probability, opt.threads);
            double expect = std::pow(static_cast<double>(count_representations(4, N)), 1.0 / p - 1.0);
            worst_cf = std::max(worst_cf, std::abs(pr.ratio - expect));
            ++triples;
        }
        std::uint64_t N5 = (p < 2.0) ? 16 : 25;
        ProbeResult pr = ratio_probe(5, RadiiSet::custom({N5}), p, {ProbeFamily::Delta, 0, 0},
                                     AvgMode::Probability, opt.threads);
        double expect = std::pow(static_cast<double>(count_representations(5, N5)), 1.0 / p - 1.0);
        worst_cf = std::max(worst_cf, std::abs(pr.ratio - expect));
        ++triples;
    }
    if (worst_cf > 1e-12) {
        ok = false;
        r.detail = "delta closed form off by " + detail::fmt(worst_cf);
    }
    // threshold trend: fixed ball, growing full radii sets (squared-radius units)
    double grow[3] = {0, 0, 0}, bounded[3] = {0, 0, 0};
    int i = 0;
    for (std::uint64_t R : {8, 16, 32}) {
        ProbeSpec ball{ProbeFamily::Ball, 4, 0};
        grow[i] = ratio_probe(5, RadiiSet::full_up_to(R), 1.2, ball, AvgMode::Probability,
                              opt.threads).ratio;
        bounded[i] = ratio_probe(5, RadiiSet::full_up_to(R), 2.0, ball, AvgMode::Probability,
                                 opt.threads).ratio;
        ++i;
    }
    bool strict = grow[0] < grow[1] && grow[1] < grow[2];
    double p2max = std::max({bounded[0], bounded[1], bounded[2]});
    bool p2ok = p2max <= goldens::ball_probe_p2_max * (1.0 + 1e-9);
    if (!strict) ok = false;
    if (!p2ok) ok = false;
    r.pass = ok;
    r.detail = std::to_string(triples) + " delta triples, worst dev " + detail::fmt(worst_cf) +
               "; p=1.2 ratios " + detail::fmt(grow[0]) + " < " + detail::fmt(grow[1]) + " < " +
               detail::fmt(grow[2]) + (strict ? " (strict)" : " (NOT STRICT)") +
               "; p=2.0 max " + detail::fmt(p2max);
    return r;
}

// ---------------------------------------------------------------------------
// Runner with per-criterion wall-clock limits where the criteria state them.
// ---------------------------------------------------------------------------

inline std::vector<CriterionResult> run_all(const Options& opt = {}, std::ostream* progress = nullptr) {
    struct Entry {
        CriterionResult (*fn)(const Options&);
        double time_limit;  // seconds; 0 = none
    };
    const Entry entries[] = {
        {criterion_jacobi, 10.0},
        {criterion_exp_sum_identities, 60.0},
        {criterion_gauss_bound, 0.0},
        {criterion_weil_envelope, 0.0},
        {criterion_ramanujan_dyadic, 0.0},
        {criterion_bands, 0.0},
        {criterion_compat_zero, 300.0},
        {criterion_factorization, 0.0},
        {criterion_error_decay, 0.0},
        {criterion_sequence, 30.0},
        {criterion_probes, 0.0},
    };
    std::vector<CriterionResult> results;
    for (const auto& e : entries) {
        auto t0 = std::chrono::steady_clock::now();
        CriterionResult r = e.fn(opt);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (e.time_limit > 0.0 && r.seconds > e.time_limit) {
            r.pass = false;
            r.detail += " [exceeded " + detail::fmt(e.time_limit) + " s limit]";
        }
        if (progress) {
            *progress << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": " << r.name
                      << " — " << r.detail << " (" << std::fixed << std::setprecision(2)
                      << r.seconds << " s)\n"
                      << std::defaultfloat;
            progress->flush();
        }
        results.push_back(std::move(r));
    }
    return results;
}

inline bool all_passed(const std::vector<CriterionResult>& rs) {
    for (const auto& r : rs)
        if (!r.pass) return false;
    return true;
}

}  // namespace sphmax::acceptance
