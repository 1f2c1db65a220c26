#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sphmax/arith.hpp"
#include "sphmax/util.hpp"

#include "json.hpp"

namespace sphmax {

using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Primorial radii sequences r_j^2 = m + prod_{j0 <= i <= h(j)} p_i with
// h(j) = floor(2^{j^eta}). The squared radii are exact big integers; only
// their residues mod small primes are ever needed downstream.
// ---------------------------------------------------------------------------

struct RadiiTerm {
    std::uint64_t j = 0;
    std::uint64_t h = 0;        // floor(2^{j^eta})
    std::uint64_t prime_h = 0;  // p_{h(j)}, the largest prime in the product
    BigInt r_sq;
};

struct RadiiSequence {
    std::uint64_t m = 0;
    double eta = 1.0;
    std::uint64_t j0 = 1;
    std::vector<RadiiTerm> terms;
};

inline std::uint64_t growth_index(std::uint64_t j, double eta) {
    long double x = std::pow(static_cast<long double>(j), static_cast<long double>(eta));
    long double h = std::floor(std::exp2(x));
    if (h > 1e15L) throw std::overflow_error("growth_index: h(j) overflows the guard");
    return static_cast<std::uint64_t>(h);
}

inline RadiiSequence generate(std::uint64_t m, double eta, std::uint64_t j_max,
                              std::uint64_t j0 = 1) {
    if (eta <= 1.0) throw std::invalid_argument("generate: eta must exceed 1");
    if (j0 < 1) throw std::invalid_argument("generate: j0 must be >= 1");
    RadiiSequence seq;
    seq.m = m;
    seq.eta = eta;
    seq.j0 = j0;
    if (j_max == 0) return seq;
    std::uint64_t h_last = growth_index(j_max, eta);
    if (h_last > 10000) throw std::overflow_error("generate: h(j_max) exceeds the 1e4 prime guard");
    auto primes = first_primes(std::max<std::uint64_t>(h_last, j0));
    for (std::uint64_t j = 1; j <= j_max; ++j) {
        RadiiTerm t;
        t.j = j;
        t.h = growth_index(j, eta);
        BigInt prod = 1;
        for (std::uint64_t i = j0; i <= t.h; ++i) prod *= primes[i - 1];
        t.prime_h = t.h >= j0 ? primes[t.h - 1] : 0;
        t.r_sq = BigInt(m) + prod;
        seq.terms.push_back(std::move(t));
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Residue statistics of { r_j^2 mod p } over the generated terms.
// J_bound is the largest generated index j with p_{h(j)} <= p (0 if none);
// every term beyond it satisfies r_j^2 == m (mod p), so the residue set has
// at most J_bound + 1 elements.
// ---------------------------------------------------------------------------

struct ResidueStatistics {
    std::uint64_t size = 0;
    bool all_units = true;
    std::uint64_t J_bound = 0;
};

inline std::uint64_t residue_mod(const BigInt& v, std::uint64_t p) {
    return static_cast<std::uint64_t>(v % p);
}

inline ResidueStatistics residue_statistics(const RadiiSequence& seq, std::uint64_t p) {
    if (p < 2) throw std::invalid_argument("residue_statistics: p must be prime");
    ResidueStatistics st;
    std::vector<std::uint64_t> residues;
    for (const auto& t : seq.terms) {
        std::uint64_t r = residue_mod(t.r_sq, p);
        residues.push_back(r);
        if (r == 0) st.all_units = false;
        if (t.prime_h <= p) st.J_bound = std::max(st.J_bound, t.j);
    }
    std::sort(residues.begin(), residues.end());
    residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
    st.size = residues.size();
    return st;
}

// ---------------------------------------------------------------------------
// Good/bad prime split: bad iff p = 2 or p divides some generated r_j^2;
// a prime qualifying as both is regarded as bad.
// ---------------------------------------------------------------------------

struct PrimeClassification {
    std::uint64_t p = 0;
    bool bad = false;
    std::uint64_t residue_set_size = 0;
    bool all_units = true;
};

inline std::vector<PrimeClassification> classify_primes(const RadiiSequence& seq,
                                                        std::uint64_t p_max,
                                                        unsigned threads = 0) {
    if (p_max > 1000000) throw std::invalid_argument("classify_primes: p_max exceeds sieve guard");
    auto primes = sieve_primes(p_max);
    std::vector<PrimeClassification> out(primes.size());
    parallel_for(primes.size(), threads, [&](std::size_t i) {
        std::uint64_t p = primes[i];
        PrimeClassification c;
        c.p = p;
        ResidueStatistics st = residue_statistics(seq, p);
        c.residue_set_size = st.size;
        c.all_units = st.all_units;
        c.bad = (p == 2) || !st.all_units;
        out[i] = c;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Truncated bad-prime Dirichlet sum and its upper-bound surrogate
// sum_j h(j) / p_{h(j)} over the generated terms.
// ---------------------------------------------------------------------------

struct DirichletPartial {
    double bad_sum = 0.0;     // sum over sieved bad primes p <= p_max of p^{-s}
    double surrogate = 0.0;   // sum over generated terms of h(j)/p_{h(j)}
    std::vector<double> surrogate_terms;
    std::vector<std::uint64_t> bad_primes;
};

inline DirichletPartial bad_prime_dirichlet_partial(const RadiiSequence& seq, double s,
                                                    std::uint64_t p_max, unsigned threads = 0) {
    if (s <= 0.0 || s > 1.0)
        throw std::invalid_argument("bad_prime_dirichlet_partial: s must lie in (0, 1]");
    DirichletPartial out;
    auto classes = classify_primes(seq, p_max, threads);
    for (const auto& c : classes) {
        if (!c.bad) continue;
        out.bad_primes.push_back(c.p);
        out.bad_sum += std::pow(static_cast<double>(c.p), -s);
    }
    for (const auto& t : seq.terms) {
        if (t.prime_h == 0) continue;
        double term = static_cast<double>(t.h) / static_cast<double>(t.prime_h);
        out.surrogate_terms.push_back(term);
        out.surrogate += term;
    }
    return out;
}

// Lacunarity ratio min over consecutive generated terms of r_{j+1}^2 / r_j^2.
inline double lacunarity_min_ratio(const RadiiSequence& seq) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < seq.terms.size(); ++i) {
        BigInt ratio = seq.terms[i].r_sq / seq.terms[i - 1].r_sq;  // floor; >= 4 suffices
        best = std::min(best, static_cast<double>(ratio));
    }
    return best;
}

// ---------------------------------------------------------------------------
// JSON export: {m, eta, terms:[{j, h, r_sq}], primes:[{p, kind,
// residue_set_size, all_units}]} with decimal strings for big integers.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const RadiiSequence& seq,
                              const std::vector<PrimeClassification>& primes) {
    nlohmann::json j;
    j["m"] = seq.m;
    j["eta"] = seq.eta;
    j["j0"] = seq.j0;
    j["terms"] = nlohmann::json::array();
    for (const auto& t : seq.terms)
        j["terms"].push_back({{"j", t.j}, {"h", t.h}, {"r_sq", t.r_sq.str()}});
    j["primes"] = nlohmann::json::array();
    for (const auto& c : primes)
        j["primes"].push_back({{"p", c.p},
                               {"kind", c.bad ? "bad" : "good"},
                               {"residue_set_size", c.residue_set_size},
                               {"all_units", c.all_units}});
    return j;
}

}  // namespace sphmax
