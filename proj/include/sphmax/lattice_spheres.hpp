#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphmax {

// ---------------------------------------------------------------------------
// Exact lattice point counts on spheres { x in Z^d : |x|^2 = N }.
// ---------------------------------------------------------------------------

struct EnumerationGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t isqrt_u64(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

inline bool is_perfect_square(std::uint64_t n) {
    std::uint64_t r = isqrt_u64(n);
    return r * r == n;
}

// Counts N_d(sqrt(N)) for every N <= N_max in one pass. The convolution DP
// r_d = r_{d-1} * r_1 runs in O(d N sqrt(N)); partial sums are accumulated
// in 128 bits and checked against the 64-bit output type.
inline std::vector<std::uint64_t> count_table(int d, std::uint64_t N_max) {
    if (d < 1) throw std::invalid_argument("count_table: d must be >= 1");
    std::vector<std::uint64_t> cur(N_max + 1, 0);
    cur[0] = 1;
    for (std::uint64_t s = 1; s * s <= N_max; ++s) cur[s * s] = 2;
    std::vector<std::uint64_t> next(N_max + 1, 0);
    for (int j = 2; j <= d; ++j) {
        for (std::uint64_t n = 0; n <= N_max; ++n) {
            unsigned __int128 acc = cur[n];  // s = 0 term
            for (std::uint64_t s = 1; s * s <= n; ++s) acc += 2 * static_cast<unsigned __int128>(cur[n - s * s]);
            if (acc > std::numeric_limits<std::uint64_t>::max())
                throw std::overflow_error("count_table: count exceeds 64 bits");
            next[n] = static_cast<std::uint64_t>(acc);
        }
        cur.swap(next);
    }
    return cur;
}

inline std::uint64_t count_representations(int d, std::uint64_t N) {
    return count_table(d, N)[N];
}

// Jacobi's four-square formula r_4(N) = 8 sum_{d | N, 4 !| d} d, the
// independent oracle for every d = 4 count.
inline std::uint64_t jacobi_r4(std::uint64_t N) {
    if (N == 0) throw std::invalid_argument("jacobi_r4: N must be positive");
    std::uint64_t sum = 0;
    for (std::uint64_t a = 1; a * a <= N; ++a) {
        if (N % a) continue;
        std::uint64_t b = N / a;
        if (a % 4 != 0) sum += a;
        if (b != a && b % 4 != 0) sum += b;
    }
    return 8 * sum;
}

inline double count_asymptotic_ratio(int d, std::uint64_t N) {
    if (d < 4 || N == 0) throw std::invalid_argument("count_asymptotic_ratio: need d >= 4, N >= 1");
    return static_cast<double>(count_representations(d, N)) /
           std::pow(static_cast<double>(N), 0.5 * (d - 2));
}

// ---------------------------------------------------------------------------
// Explicit point lists, lexicographically ordered.
// ---------------------------------------------------------------------------

struct LatticeSphere {
    int d = 0;
    std::uint64_t N = 0;
    std::uint64_t count = 0;
    std::vector<std::int64_t> points;  // flat, row-major, count * d entries

    std::span<const std::int64_t> point(std::uint64_t i) const {
        return {points.data() + i * static_cast<std::uint64_t>(d), static_cast<std::size_t>(d)};
    }
};

namespace detail {

inline void enumerate_rec(int d, std::uint64_t rem, int depth, std::vector<std::int64_t>& prefix,
                          std::vector<std::int64_t>& out) {
    if (depth == d - 1) {
        if (!is_perfect_square(rem)) return;
        auto s = static_cast<std::int64_t>(isqrt_u64(rem));
        if (s == 0) {
            out.insert(out.end(), prefix.begin(), prefix.end());
            out.push_back(0);
        } else {
            out.insert(out.end(), prefix.begin(), prefix.end());
            out.push_back(-s);
            out.insert(out.end(), prefix.begin(), prefix.end());
            out.push_back(s);
        }
        return;
    }
    auto bound = static_cast<std::int64_t>(isqrt_u64(rem));
    for (std::int64_t x = -bound; x <= bound; ++x) {
        prefix.push_back(x);
        enumerate_rec(d, rem - static_cast<std::uint64_t>(x * x), depth + 1, prefix, out);
        prefix.pop_back();
    }
}

inline double count_overestimate(int d, std::uint64_t N) {
    double base = static_cast<double>(N) + 1.0;
    double expo = std::max(1.0, 0.5 * (d - 2));
    return 100.0 * std::pow(base, expo);
}

}  // namespace detail

inline LatticeSphere enumerate_sphere(int d, std::uint64_t N) {
    if (d < 1) throw std::invalid_argument("enumerate_sphere: d must be >= 1");
    if (detail::count_overestimate(d, N) > 1e8)
        throw EnumerationGuardError("enumerate_sphere: estimated point count exceeds 1e8");
    LatticeSphere s;
    s.d = d;
    s.N = N;
    std::vector<std::int64_t> prefix;
    prefix.reserve(d);
    detail::enumerate_rec(d, N, 0, prefix, s.points);
    s.count = s.points.size() / static_cast<std::uint64_t>(d);
    return s;
}

// Renormalized spherical measure r^{2-d} 1_{|x|^2 = N}; N >= 1.
struct SphericalMeasure {
    LatticeSphere sphere;
    double weight = 0.0;  // N^{(2-d)/2}

    static SphericalMeasure make(int d, std::uint64_t N) {
        if (N == 0) throw std::invalid_argument("SphericalMeasure: N must be >= 1");
        SphericalMeasure m;
        m.sphere = enumerate_sphere(d, N);
        m.weight = std::pow(static_cast<double>(N), 0.5 * (2 - d));
        return m;
    }

    double total_mass() const { return static_cast<double>(sphere.count) * weight; }
};

// ---------------------------------------------------------------------------
// Binary point-list dump: little-endian int64 header fields d, N, count
// followed by count*d little-endian int64 coordinates.
// ---------------------------------------------------------------------------

inline void write_points(const std::filesystem::path& path, const LatticeSphere& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_points: cannot open " + path.string());
    auto put = [&f](std::int64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); };
    put(s.d);
    put(static_cast<std::int64_t>(s.N));
    put(static_cast<std::int64_t>(s.count));
    for (std::int64_t c : s.points) put(c);
    if (!f) throw std::runtime_error("write_points: write failed");
}

inline LatticeSphere read_points(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_points: cannot open " + path.string());
    auto get = [&f]() {
        std::int64_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    LatticeSphere s;
    s.d = static_cast<int>(get());
    s.N = static_cast<std::uint64_t>(get());
    s.count = static_cast<std::uint64_t>(get());
    if (!f || s.d < 1) throw std::runtime_error("read_points: bad header");
    s.points.resize(s.count * static_cast<std::uint64_t>(s.d));
    f.read(reinterpret_cast<char*>(s.points.data()), static_cast<std::streamsize>(s.points.size() * 8));
    if (!f) throw std::runtime_error("read_points: truncated payload");
    for (std::uint64_t i = 0; i < s.count; ++i) {
        std::uint64_t norm = 0;
        for (std::int64_t c : s.point(i)) norm += static_cast<std::uint64_t>(c * c);
        if (norm != s.N) throw std::runtime_error("read_points: point off sphere");
    }
    return s;
}

}  // namespace sphmax
