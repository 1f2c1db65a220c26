#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "sphmax/lattice_spheres.hpp"
#include "sphmax/util.hpp"

namespace sphmax {

struct EmbeddingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// GridFunction: complex values on the periodic box (Z/LZ)^d, row-major.
// The embedding condition L >= 2 r_max + 1 makes periodic convolutions agree
// with the Z^d computation for compactly supported inputs.
// ---------------------------------------------------------------------------

struct GridFunction {
    int d = 0;
    std::int64_t L = 0;
    std::vector<std::complex<double>> values;

    static std::size_t checked_size(int d, std::int64_t L) {
        if (d < 1 || L < 1) throw std::invalid_argument("GridFunction: bad dimensions");
        double est = std::pow(static_cast<double>(L), d);
        if (est > 4e7) throw std::invalid_argument("GridFunction: grid exceeds the memory guard");
        std::size_t n = 1;
        for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(L);
        return n;
    }

    static GridFunction zeros(int d, std::int64_t L) {
        GridFunction f;
        f.d = d;
        f.L = L;
        f.values.assign(checked_size(d, L), {0.0, 0.0});
        return f;
    }

    std::size_t size() const { return values.size(); }
    std::int64_t center() const { return L / 2; }

    std::size_t index(std::span<const std::int64_t> coords) const {
        std::size_t lin = 0;
        for (int i = 0; i < d; ++i) {
            std::int64_t c = coords[i] % L;
            if (c < 0) c += L;
            lin = lin * static_cast<std::size_t>(L) + static_cast<std::size_t>(c);
        }
        return lin;
    }
};

// Test-function families used by the probes. All are centered on the box.
inline GridFunction delta_function(int d, std::int64_t L) {
    GridFunction f = GridFunction::zeros(d, L);
    std::vector<std::int64_t> c(d, f.center());
    f.values[f.index(c)] = {1.0, 0.0};
    return f;
}

inline GridFunction ball_indicator(int d, std::int64_t L, std::uint64_t R_sq) {
    GridFunction f = GridFunction::zeros(d, L);
    auto rad = static_cast<std::int64_t>(isqrt_u64(R_sq));
    if (2 * rad + 1 > L) throw std::invalid_argument("ball_indicator: ball does not fit");
    std::vector<std::int64_t> x(d, -rad);
    while (true) {
        std::int64_t norm2 = 0;
        for (std::int64_t c : x) norm2 += c * c;
        if (norm2 <= static_cast<std::int64_t>(R_sq)) {
            std::vector<std::int64_t> coords(d);
            for (int i = 0; i < d; ++i) coords[i] = x[i] + f.center();
            f.values[f.index(coords)] = {1.0, 0.0};
        }
        int i = 0;
        for (; i < d; ++i) {
            if (++x[i] <= rad) break;
            x[i] = -rad;
        }
        if (i == d) break;
    }
    return f;
}

// Random complex values on the centered box of half-width 2.
inline GridFunction random_function(int d, std::int64_t L, std::uint64_t seed) {
    GridFunction f = GridFunction::zeros(d, L);
    const std::int64_t half = 2;
    if (2 * half + 1 > L) throw std::invalid_argument("random_function: box does not fit");
    auto rng = stream_rng(seed, 0xb0c5ULL);
    std::vector<std::int64_t> x(d, -half);
    while (true) {
        std::vector<std::int64_t> coords(d);
        for (int i = 0; i < d; ++i) coords[i] = x[i] + f.center();
        f.values[f.index(coords)] = {rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0)};
        int i = 0;
        for (; i < d; ++i) {
            if (++x[i] <= half) break;
            x[i] = -half;
        }
        if (i == d) break;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Spherical averages over the grid. Probability mode divides by N_d(r);
// renormalized mode multiplies by r^{2-d}.
// ---------------------------------------------------------------------------

enum class AvgMode { Probability, Renormalized };

inline void check_embedding(const GridFunction& f, std::uint64_t N) {
    auto r = static_cast<std::int64_t>(isqrt_u64(N));
    if (f.L < 2 * r + 1)
        throw EmbeddingError("spherical_average: L < 2 r + 1 violates the embedding condition");
}

inline GridFunction spherical_average(const GridFunction& f, std::uint64_t N, AvgMode mode,
                                      const LatticeSphere* sphere_hint = nullptr) {
    check_embedding(f, N);
    LatticeSphere local;
    const LatticeSphere* sphere = sphere_hint;
    if (!sphere || sphere->d != f.d || sphere->N != N) {
        local = enumerate_sphere(f.d, N);
        sphere = &local;
    }
    if (sphere->count == 0)
        throw std::invalid_argument("spherical_average: empty sphere");
    double w = mode == AvgMode::Probability
                   ? 1.0 / static_cast<double>(sphere->count)
                   : std::pow(static_cast<double>(N), 0.5 * (2 - f.d));

    GridFunction out = GridFunction::zeros(f.d, f.L);
    const int d = f.d;
    const std::int64_t L = f.L;
    std::vector<std::int64_t> x(d, 0);
    for (std::uint64_t ip = 0; ip < sphere->count; ++ip) {
        auto y = sphere->point(ip);
        // precompute per-coordinate wrapped source offsets (x_i - y_i) mod L
        std::vector<std::vector<std::size_t>> srcmap(d);
        std::size_t stride = 1;
        for (int i = d - 1; i >= 0; --i) {
            srcmap[i].resize(static_cast<std::size_t>(L));
            for (std::int64_t c = 0; c < L; ++c) {
                std::int64_t s = (c - y[i]) % L;
                if (s < 0) s += L;
                srcmap[i][static_cast<std::size_t>(c)] = static_cast<std::size_t>(s) * stride;
            }
            stride *= static_cast<std::size_t>(L);
        }
        std::fill(x.begin(), x.end(), 0);
        std::size_t lin = 0;
        while (true) {
            std::size_t src = 0;
            for (int i = 0; i < d; ++i) src += srcmap[i][static_cast<std::size_t>(x[i])];
            out.values[lin] += f.values[src];
            ++lin;
            int i = d - 1;
            for (; i >= 0; --i) {
                if (++x[i] < L) break;
                x[i] = 0;
            }
            if (i < 0) break;
        }
    }
    for (auto& v : out.values) v *= w;
    return out;
}

// ---------------------------------------------------------------------------
// Radii sets.
// ---------------------------------------------------------------------------

struct RadiiSet {
    enum class Kind { Full, Lacunary, Custom };
    Kind kind = Kind::Custom;
    std::vector<std::uint64_t> squared;  // sorted squared radii

    static RadiiSet full_up_to(std::uint64_t R) {
        RadiiSet s;
        s.kind = Kind::Full;
        for (std::uint64_t N = 1; N <= R; ++N) s.squared.push_back(N);
        return s;
    }

    static RadiiSet lacunary(std::vector<std::uint64_t> sq, double c) {
        if (c <= 1.0) throw std::invalid_argument("RadiiSet: lacunary constant must exceed 1");
        std::sort(sq.begin(), sq.end());
        for (std::size_t i = 1; i < sq.size(); ++i)
            if (static_cast<double>(sq[i]) < c * c * static_cast<double>(sq[i - 1]))
                throw std::invalid_argument("RadiiSet: sequence is not c-lacunary");
        RadiiSet s;
        s.kind = Kind::Lacunary;
        s.squared = std::move(sq);
        return s;
    }

    static RadiiSet custom(std::vector<std::uint64_t> sq) {
        std::sort(sq.begin(), sq.end());
        RadiiSet s;
        s.kind = Kind::Custom;
        s.squared = std::move(sq);
        return s;
    }

    std::uint64_t max_squared() const { return squared.empty() ? 0 : squared.back(); }
};

inline GridFunction maximal_function(const GridFunction& f, const RadiiSet& radii, AvgMode mode) {
    if (radii.squared.empty()) throw std::invalid_argument("maximal_function: empty radii set");
    GridFunction out = GridFunction::zeros(f.d, f.L);
    for (std::uint64_t N : radii.squared) {
        GridFunction avg = spherical_average(f, N, mode);
        for (std::size_t i = 0; i < out.size(); ++i)
            out.values[i] = {std::max(out.values[i].real(), std::abs(avg.values[i])), 0.0};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Norms: strong ell^p and the weak quasinorm sup_t t |{|f| > t}|^{1/p},
// computed exactly by sorting.
// ---------------------------------------------------------------------------

inline double lp_norm(const GridFunction& f, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    KahanSum acc;
    for (const auto& v : f.values) {
        double a = std::abs(v);
        if (a > 0.0) acc.add(std::pow(a, p));
    }
    return std::pow(acc.value(), 1.0 / p);
}

inline double linf_norm(const GridFunction& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double weak_lp_quasinorm(const GridFunction& f, double p) {
    if (p < 1.0) throw std::invalid_argument("weak_lp_quasinorm: p must be >= 1");
    std::vector<double> mags;
    mags.reserve(f.size());
    for (const auto& v : f.values) {
        double a = std::abs(v);
        if (a > 0.0) mags.push_back(a);
    }
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double best = 0.0;
    for (std::size_t k = 0; k < mags.size(); ++k)
        best = std::max(best, mags[k] * std::pow(static_cast<double>(k + 1), 1.0 / p));
    return best;
}

// ---------------------------------------------------------------------------
// Operator-norm probes: ||M_radii f||_p / ||f||_p for delta / ball / random
// test functions. Internally uses a sparse scatter over an embedding-sound
// grid so the result equals the Z^d computation exactly.
// ---------------------------------------------------------------------------

enum class ProbeFamily { Delta, Ball, Random };

struct ProbeSpec {
    ProbeFamily family = ProbeFamily::Delta;
    std::uint64_t ball_R_sq = 0;   // Ball only
    std::uint64_t seed = 0;        // Random only
};

struct ProbeResult {
    double ratio = 0.0;
    double norm_Mf = 0.0;
    double norm_f = 0.0;
    int d = 0;
    std::int64_t L = 0;
    double p = 0.0;
    AvgMode mode = AvgMode::Probability;
};

namespace detail {

struct SparsePoints {
    std::vector<std::int64_t> coords;  // flat, relative to the box center
    std::vector<double> values;
    std::int64_t radius = 0;           // max |coordinate|
};

inline SparsePoints probe_support(int d, const ProbeSpec& spec) {
    SparsePoints s;
    switch (spec.family) {
        case ProbeFamily::Delta:
            s.coords.assign(static_cast<std::size_t>(d), 0);
            s.values.assign(1, 1.0);
            s.radius = 0;
            break;
        case ProbeFamily::Ball: {
            auto rad = static_cast<std::int64_t>(isqrt_u64(spec.ball_R_sq));
            std::vector<std::int64_t> x(d, -rad);
            while (true) {
                std::int64_t norm2 = 0;
                for (std::int64_t c : x) norm2 += c * c;
                if (norm2 <= static_cast<std::int64_t>(spec.ball_R_sq)) {
                    s.coords.insert(s.coords.end(), x.begin(), x.end());
                    s.values.push_back(1.0);
                }
                int i = 0;
                for (; i < d; ++i) {
                    if (++x[i] <= rad) break;
                    x[i] = -rad;
                }
                if (i == d) break;
            }
            s.radius = rad;
            break;
        }
        case ProbeFamily::Random: {
            const std::int64_t half = 2;
            auto rng = stream_rng(spec.seed, 0xb0c5ULL);
            std::vector<std::int64_t> x(d, -half);
            while (true) {
                s.coords.insert(s.coords.end(), x.begin(), x.end());
                s.values.push_back(rng.next_in(-1.0, 1.0));  // real-valued probe input
                int i = 0;
                for (; i < d; ++i) {
                    if (++x[i] <= half) break;
                    x[i] = -half;
                }
                if (i == d) break;
            }
            s.radius = half;
            break;
        }
    }
    return s;
}

}  // namespace detail

inline ProbeResult ratio_probe(int d, const RadiiSet& radii, double p, const ProbeSpec& spec,
                               AvgMode mode = AvgMode::Probability, unsigned threads = 0,
                               std::int64_t L_override = 0) {
    if (radii.squared.empty()) throw std::invalid_argument("ratio_probe: empty radii set");
    detail::SparsePoints f = detail::probe_support(d, spec);
    auto r_max = static_cast<std::int64_t>(isqrt_u64(radii.max_squared()));
    std::int64_t L = 2 * (r_max + f.radius) + 1;
    if (L_override) {
        if (L_override < L) throw EmbeddingError("ratio_probe: override grid too small");
        L = L_override;
    }
    std::size_t total = GridFunction::checked_size(d, L);

    const std::int64_t center = L / 2;
    const std::size_t npts = f.values.size();
    std::vector<std::size_t> base_index(npts);
    for (std::size_t ip = 0; ip < npts; ++ip) {
        std::size_t lin = 0;
        for (int i = 0; i < d; ++i)
            lin = lin * static_cast<std::size_t>(L) +
                  static_cast<std::size_t>(f.coords[ip * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] + center);
        base_index[ip] = lin;
    }

    unsigned T = resolve_threads(threads);
    T = static_cast<unsigned>(std::min<std::size_t>(T, radii.squared.size()));
    std::vector<std::vector<double>> runmax(T);
    parallel_for(T, T, [&](std::size_t t) {
        std::vector<double>& rm = runmax[t];
        rm.assign(total, 0.0);
        std::vector<double> avg(total);
        for (std::size_t j = t; j < radii.squared.size(); j += T) {
            std::uint64_t N = radii.squared[j];
            LatticeSphere sphere = enumerate_sphere(d, N);
            if (sphere.count == 0) continue;
            double w = mode == AvgMode::Probability
                           ? 1.0 / static_cast<double>(sphere.count)
                           : std::pow(static_cast<double>(N), 0.5 * (2 - d));
            std::fill(avg.begin(), avg.end(), 0.0);
            for (std::uint64_t isph = 0; isph < sphere.count; ++isph) {
                auto y = sphere.point(isph);
                std::int64_t off = 0;
                for (int i = 0; i < d; ++i) off = off * L + y[i];
                for (std::size_t ip = 0; ip < npts; ++ip)
                    avg[base_index[ip] + static_cast<std::size_t>(off)] += f.values[ip];
            }
            for (std::size_t i = 0; i < total; ++i)
                rm[i] = std::max(rm[i], std::abs(avg[i]) * w);
        }
    });
    for (unsigned t = 1; t < T; ++t)
        for (std::size_t i = 0; i < total; ++i) runmax[0][i] = std::max(runmax[0][i], runmax[t][i]);

    KahanSum mf, nf;
    for (double v : runmax[0])
        if (v > 0.0) mf.add(std::pow(v, p));
    for (double v : f.values)
        if (v != 0.0) nf.add(std::pow(std::abs(v), p));
    ProbeResult res;
    res.norm_Mf = std::pow(mf.value(), 1.0 / p);
    res.norm_f = std::pow(nf.value(), 1.0 / p);
    res.ratio = res.norm_Mf / res.norm_f;
    res.d = d;
    res.L = L;
    res.p = p;
    res.mode = mode;
    return res;
}

// ---------------------------------------------------------------------------
// Flat binary grid dump: little-endian int64 header fields d, L followed by
// L^d complex64 values (float32 re, float32 im), row-major.
// ---------------------------------------------------------------------------

inline void write_grid(const std::filesystem::path& path, const GridFunction& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_grid: cannot open " + path.string());
    std::int64_t d = f.d, L = f.L;
    out.write(reinterpret_cast<const char*>(&d), 8);
    out.write(reinterpret_cast<const char*>(&L), 8);
    for (const auto& v : f.values) {
        float re = static_cast<float>(v.real()), im = static_cast<float>(v.imag());
        out.write(reinterpret_cast<const char*>(&re), 4);
        out.write(reinterpret_cast<const char*>(&im), 4);
    }
    if (!out) throw std::runtime_error("write_grid: write failed");
}

inline GridFunction read_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_grid: cannot open " + path.string());
    std::int64_t d = 0, L = 0;
    in.read(reinterpret_cast<char*>(&d), 8);
    in.read(reinterpret_cast<char*>(&L), 8);
    if (!in || d < 1 || L < 1) throw std::runtime_error("read_grid: bad header");
    GridFunction f = GridFunction::zeros(static_cast<int>(d), L);
    for (auto& v : f.values) {
        float re = 0, im = 0;
        in.read(reinterpret_cast<char*>(&re), 4);
        in.read(reinterpret_cast<char*>(&im), 4);
        v = {re, im};
    }
    if (!in) throw std::runtime_error("read_grid: truncated payload");
    return f;
}

}  // namespace sphmax
