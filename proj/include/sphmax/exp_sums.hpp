#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "sphmax/arith.hpp"

namespace sphmax {

// ---------------------------------------------------------------------------
// ExpSumValue: a complex result carrying an accumulated roundoff budget.
// The budget is a conservative forward bound, not a proof; the test suite
// asserts it stays below 1e-6 over the whole acceptance parameter range.
// ---------------------------------------------------------------------------

struct ExpSumValue {
    double re = 0.0;
    double im = 0.0;
    double abs_error_bound = 0.0;

    ExpSumValue() = default;
    ExpSumValue(std::complex<double> v, double err)
        : re(v.real()), im(v.imag()), abs_error_bound(err) {
        if (!std::isfinite(re) || !std::isfinite(im) || !std::isfinite(err))
            throw std::domain_error("ExpSumValue: non-finite result");
    }

    std::complex<double> value() const { return {re, im}; }
    double abs() const { return std::hypot(re, im); }
    double arg() const { return std::atan2(im, re); }
};

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kRootErr = 4.0 * kEps;  // e(k/q) table entry error

// Running complex sum with a one-sided error budget.
struct BudgetSum {
    std::complex<double> v{0.0, 0.0};
    double err = 0.0;
    void add(std::complex<double> t, double terr) {
        v += t;
        err += terr + kEps * (std::abs(v) + std::abs(t));
    }
};

inline ExpSumValue mul(const ExpSumValue& a, const ExpSumValue& b) {
    std::complex<double> v = a.value() * b.value();
    double err = a.abs() * b.abs_error_bound + b.abs() * a.abs_error_bound +
                 a.abs_error_bound * b.abs_error_bound + kEps * std::abs(v);
    return {v, err};
}

inline ExpSumValue scale(const ExpSumValue& a, double s) {
    return {a.value() * s, a.abs_error_bound * std::abs(s) + kEps * std::abs(a.value() * s)};
}

// Uniform per-entry error bound for a q-term sum of table roots.
inline double one_dim_sum_err(std::uint64_t q) {
    double qd = static_cast<double>(q);
    return qd * kRootErr + kEps * qd * qd;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SumParams: (d, q, N, n) with N and n reduced mod q on entry. All the sums
// below are q-periodic in both, so canonical representatives are safe.
// ---------------------------------------------------------------------------

class SumParams {
  public:
    SumParams(int d, Modulus q, std::int64_t N, std::span<const std::int64_t> n)
        : d_(d), q_(std::move(q)) {
        if (d < 1) throw std::invalid_argument("SumParams: d must be >= 1");
        if (n.size() != static_cast<std::size_t>(d))
            throw std::invalid_argument("SumParams: n must have length d");
        N_ = q_.reduce(N);
        n_.reserve(n.size());
        for (std::int64_t c : n) n_.push_back(q_.reduce(c));
    }

    int d() const { return d_; }
    const Modulus& q() const { return q_; }
    std::uint64_t N() const { return N_; }
    std::span<const std::uint64_t> n() const { return n_; }

  private:
    int d_;
    Modulus q_;
    std::uint64_t N_ = 0;
    std::vector<std::uint64_t> n_;
};

// ---------------------------------------------------------------------------
// One-dimensional coordinate factor sum_{b mod q} e((u b^2 + b m)/q),
// without any normalization. O(q) arithmetic off the root table.
// ---------------------------------------------------------------------------

inline ExpSumValue gauss_sum_1d(const Modulus& q, std::uint64_t u, std::int64_t m) {
    if (std::gcd(u % q.q() == 0 ? q.q() : u % q.q(), q.q()) != 1 && q.q() != 1)
        throw std::invalid_argument("gauss_sum_1d: u must be a unit mod q");
    const std::int64_t qq = static_cast<std::int64_t>(q.q());
    const std::int64_t ur = static_cast<std::int64_t>(q.reduce(static_cast<std::int64_t>(u % q.q())));
    const std::int64_t mr = static_cast<std::int64_t>(q.reduce(m));
    detail::BudgetSum acc;
    for (std::int64_t b = 0; b < qq; ++b) {
        std::int64_t phase = (ur * ((b * b) % qq) + b * mr) % qq;
        acc.add(q.root(phase), detail::kRootErr);
    }
    return {acc.v, acc.err};
}

inline ExpSumValue gauss_sum_1d(std::uint64_t q, std::uint64_t u, std::int64_t m) {
    return gauss_sum_1d(Modulus(q), u, m);
}

// Normalized d-dimensional Gauss sum G_u(q, n) = q^{-d} prod_i S(u, n_i).
inline ExpSumValue gauss_sum(const SumParams& p, std::uint64_t u) {
    ExpSumValue prod(std::complex<double>{1.0, 0.0}, 0.0);
    for (std::uint64_t ni : p.n())
        prod = detail::mul(prod, gauss_sum_1d(p.q(), u, static_cast<std::int64_t>(ni)));
    return detail::scale(prod, std::pow(static_cast<double>(p.q().q()), -p.d()));
}

// ---------------------------------------------------------------------------
// KloostermanEvaluator: fixed modulus q, caches the unnormalized 1-d Gauss
// sum column g(u, m) over all units u for each twist m it has seen. Sweeps
// at a fixed q reuse columns across many (N, n) evaluations. The cache
// mutates on use, so an instance is meant for a single thread; the free
// functions below stay pure.
// ---------------------------------------------------------------------------

class KloostermanEvaluator {
  public:
    explicit KloostermanEvaluator(Modulus q) : q_(std::move(q)) {}
    explicit KloostermanEvaluator(std::uint64_t q) : q_(Modulus(q)) {}

    const Modulus& modulus() const { return q_; }

    ExpSumValue kloosterman(std::int64_t N, std::span<const std::uint64_t> n) {
        const auto& units = q_.units();
        const int d = static_cast<int>(n.size());
        const std::int64_t qq = static_cast<std::int64_t>(q_.q());
        const std::int64_t Nr = static_cast<std::int64_t>(q_.reduce(N));
        std::vector<const Column*> cols;
        cols.reserve(n.size());
        for (std::uint64_t ni : n) cols.push_back(&column(q_.reduce(static_cast<std::int64_t>(ni))));
        const double norm = std::pow(static_cast<double>(q_.q()), -d);
        detail::BudgetSum acc;
        for (std::size_t iu = 0; iu < units.size(); ++iu) {
            const std::int64_t u = static_cast<std::int64_t>(units[iu]);
            std::complex<double> term = q_.root(-((u * Nr) % qq));
            double mag = 1.0;
            double terr = detail::kRootErr;
            for (const Column* c : cols) {
                std::complex<double> g = c->values[iu];
                double gm = std::abs(g);
                terr = mag * c->entry_err + gm * terr + detail::kEps * mag * gm;
                term *= g;
                mag *= gm;
            }
            // normalize per term so partial sums stay O(1)
            acc.add(term * norm, terr * norm);
        }
        return {acc.v, acc.err};
    }

  private:
    struct Column {
        std::vector<std::complex<double>> values;  // g(u, m) over the unit list
        double entry_err = 0.0;
    };

    const Column& column(std::uint64_t m) {
        auto it = columns_.find(m);
        if (it != columns_.end()) return it->second;
        Column col;
        const auto& units = q_.units();
        col.values.reserve(units.size());
        const std::int64_t qq = static_cast<std::int64_t>(q_.q());
        for (std::uint64_t u : units) {
            detail::BudgetSum acc;
            const std::int64_t ui = static_cast<std::int64_t>(u);
            const std::int64_t mi = static_cast<std::int64_t>(m);
            for (std::int64_t b = 0; b < qq; ++b) {
                std::int64_t phase = (ui * ((b * b) % qq) + b * mi) % qq;
                acc.add(q_.root(phase), detail::kRootErr);
            }
            col.values.push_back(acc.v);
        }
        col.entry_err = detail::one_dim_sum_err(q_.q());
        return columns_.emplace(m, std::move(col)).first->second;
    }

    Modulus q_;
    std::map<std::uint64_t, Column> columns_;
};

// K(q, N; n) by the direct definition: sum over units of e(-uN/q) G_u(q, n).
inline ExpSumValue kloosterman_sum(const SumParams& p) {
    KloostermanEvaluator ev(p.q());
    return ev.kloosterman(static_cast<std::int64_t>(p.N()), p.n());
}

// K via CRT factorization over the prime-power parts q_i of q. The correct
// multiplicative form carries a unit twist from the residue splitting:
//
//   K(q, N; n) = prod_i K(q_i, mbar_i^2 N; n),   m_i = q / q_i,
//   mbar_i = m_i^{-1} (mod q_i),
//
// equivalently K(q_i, N; mbar_i n). Without the twist the product deviates
// at O(1) for generic n (it agrees for n = 0, where K is invariant under
// unit-square scalings of N). Must agree with kloosterman_sum exactly.
inline ExpSumValue kloosterman_sum_crt(const SumParams& p) {
    ExpSumValue prod(std::complex<double>{1.0, 0.0}, 0.0);
    std::vector<std::int64_t> n_signed(p.n().begin(), p.n().end());
    for (const auto& [prime, e] : p.q().factors()) {
        std::uint64_t pe = 1;
        for (int i = 0; i < e; ++i) pe *= prime;
        std::uint64_t m = p.q().q() / pe;
        std::uint64_t minv = pe == 1 ? 0 : inv_mod(m % pe, pe);
        std::uint64_t Ni = ((p.N() % pe) * ((minv * minv) % pe)) % pe;
        SumParams part(p.d(), Modulus(pe), static_cast<std::int64_t>(Ni),
                       std::span<const std::int64_t>(n_signed));
        prod = detail::mul(prod, kloosterman_sum(part));
    }
    return prod;
}

// ---------------------------------------------------------------------------
// Ramanujan sums c_q(N) = sum over units of e(uN/q). Real-valued: the unit
// pairing u <-> q-u conjugates terms. The imaginary residue is checked and
// discarded.
// ---------------------------------------------------------------------------

inline double ramanujan_sum(const Modulus& q, std::int64_t N) {
    const std::int64_t qq = static_cast<std::int64_t>(q.q());
    const std::int64_t Nr = static_cast<std::int64_t>(q.reduce(N));
    detail::BudgetSum acc;
    for (std::uint64_t u : q.units())
        acc.add(q.root((static_cast<std::int64_t>(u) * Nr) % qq), detail::kRootErr);
    if (std::abs(acc.v.imag()) >= 1e-9)
        throw std::domain_error("ramanujan_sum: imaginary residue exceeds 1e-9");
    return acc.v.real();
}

inline double ramanujan_sum(std::uint64_t q, std::int64_t N) {
    return ramanujan_sum(Modulus(q), N);
}

struct DyadicAverage {
    double sum = 0.0;          // sum of |c_q(N)| over Q <= q < 2Q
    double bound_ratio = 0.0;  // sum / (Q * d(N, Q))
    std::uint64_t divisor_count = 0;
};

inline DyadicAverage ramanujan_dyadic_average(std::uint64_t Q, std::uint64_t N) {
    if (Q == 0 || N == 0)
        throw std::invalid_argument("ramanujan_dyadic_average: Q, N must be positive");
    std::uint64_t total = 0;
    for (std::uint64_t q = Q; q < 2 * Q; ++q) {
        std::int64_t c = ramanujan_exact(q, static_cast<std::int64_t>(N));
        total += static_cast<std::uint64_t>(c < 0 ? -c : c);
    }
    DyadicAverage out;
    out.sum = static_cast<double>(total);
    out.divisor_count = divisor_count_up_to(N, Q);
    out.bound_ratio = out.sum / (static_cast<double>(Q) * static_cast<double>(out.divisor_count));
    return out;
}

// ---------------------------------------------------------------------------
// Weil-bound envelope ratio |K(q,N;n)| / (q^{-(d-1)/2+eps} gcd(q_odd,N)^{1/2}
// q_even^{1/2}). Used for boundedness sweeps only; the bound's constant is
// not quantified.
// ---------------------------------------------------------------------------

inline double weil_ratio(const SumParams& p, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("weil_ratio: eps must be positive");
    double K = kloosterman_sum(p).abs();
    double qd = static_cast<double>(p.q().q());
    std::uint64_t g = std::gcd(p.q().odd_part(), p.N() == 0 ? p.q().odd_part() : p.N());
    double denom = std::pow(qd, -0.5 * (p.d() - 1) + eps) * std::sqrt(static_cast<double>(g)) *
                   std::sqrt(static_cast<double>(p.q().even_part()));
    return K / denom;
}

}  // namespace sphmax
