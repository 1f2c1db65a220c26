#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sphmax {

// ---------------------------------------------------------------------------
// Primes and elementary arithmetic functions.
// ---------------------------------------------------------------------------

inline std::vector<std::uint64_t> sieve_primes(std::uint64_t limit) {
    std::vector<std::uint64_t> primes;
    if (limit < 2) return primes;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t p = 2; p <= limit; ++p) {
        if (composite[p]) continue;
        primes.push_back(p);
        for (std::uint64_t m = p * p; m <= limit; m += p) composite[m] = true;
    }
    return primes;
}

// First n primes. Upper bound n(log n + log log n) holds for n >= 6.
inline std::vector<std::uint64_t> first_primes(std::size_t n) {
    if (n == 0) return {};
    std::uint64_t bound = 15;
    if (n >= 6) {
        double x = static_cast<double>(n);
        bound = static_cast<std::uint64_t>(x * (std::log(x) + std::log(std::log(x)))) + 16;
    }
    auto primes = sieve_primes(bound);
    while (primes.size() < n) {
        bound *= 2;
        primes = sieve_primes(bound);
    }
    primes.resize(n);
    return primes;
}

struct PrimePower {
    std::uint64_t p;
    int e;
    bool operator==(const PrimePower&) const = default;
};

inline std::vector<PrimePower> factorize(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("factorize: n must be positive");
    std::vector<PrimePower> out;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

inline std::uint64_t totient(std::uint64_t q) {
    std::uint64_t phi = 1;
    for (const auto& [p, e] : factorize(q)) {
        std::uint64_t pe = 1;
        for (int i = 1; i < e; ++i) pe *= p;
        phi *= pe * (p - 1);
    }
    return phi;
}

inline int moebius(std::uint64_t n) {
    int mu = 1;
    for (const auto& [p, e] : factorize(n)) {
        if (e > 1) return 0;
        mu = -mu;
    }
    return mu;
}

inline std::vector<std::uint64_t> divisors(std::uint64_t n) {
    std::vector<std::uint64_t> divs{1};
    for (const auto& [p, e] : factorize(n)) {
        std::size_t base = divs.size();
        std::uint64_t pe = 1;
        for (int i = 0; i < e; ++i) {
            pe *= p;
            for (std::size_t j = 0; j < base; ++j) divs.push_back(divs[j] * pe);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

// Modular inverse by extended Euclid; requires gcd(a, m) = 1.
inline std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m) {
    if (m == 1) return 0;
    std::int64_t t = 0, newt = 1;
    std::int64_t r = static_cast<std::int64_t>(m), newr = static_cast<std::int64_t>(a % m);
    while (newr != 0) {
        std::int64_t qt = r / newr;
        std::int64_t tmp = t - qt * newt;
        t = newt;
        newt = tmp;
        tmp = r - qt * newr;
        r = newr;
        newr = tmp;
    }
    if (r != 1) throw std::invalid_argument("inv_mod: arguments are not coprime");
    if (t < 0) t += static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(t);
}

// d(N, Q): number of divisors of N that are <= Q.
inline std::uint64_t divisor_count_up_to(std::uint64_t N, std::uint64_t Q) {
    if (N == 0) throw std::invalid_argument("divisor_count_up_to: N must be positive");
    std::uint64_t count = 0;
    for (std::uint64_t d : divisors(N))
        if (d <= Q) ++count;
    return count;
}

// Ramanujan sum by Hoelder's identity: c_q(N) = mu(q/g) phi(q) / phi(q/g),
// g = gcd(q, N). Exact in integers.
inline std::int64_t ramanujan_exact(std::uint64_t q, std::int64_t N) {
    if (q == 0) throw std::invalid_argument("ramanujan_exact: q must be positive");
    std::uint64_t Nred = static_cast<std::uint64_t>(((N % static_cast<std::int64_t>(q)) + static_cast<std::int64_t>(q)) % static_cast<std::int64_t>(q));
    std::uint64_t g = std::gcd(q, Nred == 0 ? q : Nred);
    std::uint64_t qg = q / g;
    int mu = moebius(qg);
    if (mu == 0) return 0;
    return static_cast<std::int64_t>(mu) * static_cast<std::int64_t>(totient(q) / totient(qg));
}

// ---------------------------------------------------------------------------
// Modulus: q with its factorization, odd/even split and the e(k/q) table.
// Immutable after construction; safe to share across threads.
// ---------------------------------------------------------------------------

class Modulus {
  public:
    explicit Modulus(std::uint64_t q) : q_(q) {
        if (q == 0) throw std::invalid_argument("Modulus: q must be positive");
        factors_ = factorize(q);
        odd_part_ = q;
        even_part_ = 1;
        while (odd_part_ % 2 == 0) {
            odd_part_ /= 2;
            even_part_ *= 2;
        }
        totient_ = 1;
        for (const auto& [p, e] : factors_) {
            std::uint64_t pe = 1;
            for (int i = 1; i < e; ++i) pe *= p;
            totient_ *= pe * (p - 1);
        }
        roots_.resize(q);
        const double step = 2.0 * std::numbers::pi / static_cast<double>(q);
        for (std::uint64_t k = 0; k < q; ++k)
            roots_[k] = std::polar(1.0, step * static_cast<double>(k));
        units_.reserve(totient_);
        for (std::uint64_t u = 1; u <= q; ++u)
            if (std::gcd(u, q) == 1) units_.push_back(u % q);  // q=1: unit 1 == 0 mod 1
    }

    std::uint64_t q() const { return q_; }
    const std::vector<PrimePower>& factors() const { return factors_; }
    std::uint64_t odd_part() const { return odd_part_; }
    std::uint64_t even_part() const { return even_part_; }
    std::uint64_t totient() const { return totient_; }
    const std::vector<std::uint64_t>& units() const { return units_; }

    // e(k/q) for any integer k.
    std::complex<double> root(std::int64_t k) const {
        std::int64_t m = k % static_cast<std::int64_t>(q_);
        if (m < 0) m += static_cast<std::int64_t>(q_);
        return roots_[static_cast<std::uint64_t>(m)];
    }

    std::uint64_t reduce(std::int64_t v) const {
        std::int64_t m = v % static_cast<std::int64_t>(q_);
        if (m < 0) m += static_cast<std::int64_t>(q_);
        return static_cast<std::uint64_t>(m);
    }

  private:
    std::uint64_t q_;
    std::vector<PrimePower> factors_;
    std::uint64_t odd_part_ = 1;
    std::uint64_t even_part_ = 1;
    std::uint64_t totient_ = 1;
    std::vector<std::complex<double>> roots_;
    std::vector<std::uint64_t> units_;
};

}  // namespace sphmax
