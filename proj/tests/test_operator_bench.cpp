#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <filesystem>
#include <vector>

#include "sphmax/operator_bench.hpp"
#include "sphmax/util.hpp"

using namespace sphmax;
using Catch::Matchers::WithinAbs;

TEST_CASE("averages preserve constants in probability mode", "[operator_bench]") {
    GridFunction f = GridFunction::zeros(4, 9);
    for (auto& v : f.values) v = {1.0, 0.0};
    auto out = spherical_average(f, 4, AvgMode::Probability);
    for (const auto& v : out.values) {
        REQUIRE(v.real() == 1.0);
        REQUIRE(v.imag() == 0.0);
    }
}

TEST_CASE("delta averages hit the sphere indicator", "[operator_bench]") {
    {
        GridFunction f = delta_function(4, 9);
        auto out = spherical_average(f, 4, AvgMode::Probability);
        auto sphere = enumerate_sphere(4, 4);
        std::size_t nonzero = 0;
        for (const auto& v : out.values)
            if (std::abs(v) > 0) ++nonzero;
        REQUIRE(nonzero == 24);
        std::vector<std::int64_t> coords(4);
        for (std::uint64_t i = 0; i < sphere.count; ++i) {
            auto p = sphere.point(i);
            for (int c = 0; c < 4; ++c) coords[c] = f.center() + p[c];
            REQUIRE_THAT(out.values[out.index(coords)].real(), WithinAbs(1.0 / 24.0, 1e-15));
        }
    }
    {
        // renormalized mode, d=5, N=1: weight r^{2-d} = 1
        GridFunction f = delta_function(5, 5);
        auto out = spherical_average(f, 1, AvgMode::Renormalized);
        std::size_t nonzero = 0;
        for (const auto& v : out.values)
            if (std::abs(v) > 0) {
                ++nonzero;
                REQUIRE_THAT(v.real(), WithinAbs(1.0, 1e-15));
            }
        REQUIRE(nonzero == 10);
    }
}

TEST_CASE("averages are contractions in sup norm", "[operator_bench]") {
    GridFunction f = random_function(4, 11, 99);
    auto out = spherical_average(f, 9, AvgMode::Probability);
    REQUIRE(linf_norm(out) <= linf_norm(f) + 1e-15);
}

TEST_CASE("averages commute with translations exactly", "[operator_bench]") {
    GridFunction f = random_function(3, 9, 5);
    auto avg = spherical_average(f, 4, AvgMode::Probability);

    // translate f by v, average, compare against translated average
    std::vector<std::int64_t> v{2, -1, 3};
    GridFunction g = GridFunction::zeros(3, 9);
    std::vector<std::int64_t> x(3);
    for (x[0] = 0; x[0] < 9; ++x[0])
        for (x[1] = 0; x[1] < 9; ++x[1])
            for (x[2] = 0; x[2] < 9; ++x[2]) {
                std::vector<std::int64_t> src{x[0] - v[0], x[1] - v[1], x[2] - v[2]};
                g.values[g.index(x)] = f.values[f.index(src)];
            }
    auto avg_g = spherical_average(g, 4, AvgMode::Probability);
    for (x[0] = 0; x[0] < 9; ++x[0])
        for (x[1] = 0; x[1] < 9; ++x[1])
            for (x[2] = 0; x[2] < 9; ++x[2]) {
                std::vector<std::int64_t> src{x[0] - v[0], x[1] - v[1], x[2] - v[2]};
                REQUIRE(avg_g.values[g.index(x)] == avg.values[avg.index(src)]);
            }
}

TEST_CASE("maximal function basics", "[operator_bench]") {
    GridFunction f = random_function(4, 11, 7);
    auto single = maximal_function(f, RadiiSet::custom({4}), AvgMode::Probability);
    auto avg = spherical_average(f, 4, AvgMode::Probability);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE_THAT(single.values[i].real(), WithinAbs(std::abs(avg.values[i]), 1e-15));

    auto small = maximal_function(f, RadiiSet::custom({1}), AvgMode::Probability);
    auto both = maximal_function(f, RadiiSet::custom({1, 4}), AvgMode::Probability);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE(both.values[i].real() >= small.values[i].real() - 1e-18);

    REQUIRE_THROWS_AS(maximal_function(f, RadiiSet::custom({}), AvgMode::Probability),
                      std::invalid_argument);
}

TEST_CASE("norms", "[operator_bench]") {
    GridFunction f = delta_function(3, 5);
    REQUIRE_THAT(lp_norm(f, 1.0), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(lp_norm(f, 2.7), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(weak_lp_quasinorm(f, 1.5), WithinAbs(1.0, 1e-15));

    // indicator of k points
    GridFunction g = GridFunction::zeros(2, 7);
    for (int i = 0; i < 5; ++i) g.values[static_cast<std::size_t>(i) * 3] = {1.0, 0.0};
    REQUIRE_THAT(lp_norm(g, 2.0), WithinAbs(std::sqrt(5.0), 1e-13));
    REQUIRE_THAT(lp_norm(g, 1.3), WithinAbs(std::pow(5.0, 1.0 / 1.3), 1e-12));

    // weak quasinorm on a constructed profile
    GridFunction h = GridFunction::zeros(1, 3);
    h.values[0] = {3.0, 0.0};
    h.values[1] = {1.0, 0.0};
    h.values[2] = {1.0, 0.0};
    double p = 2.0;
    double want = std::max({3.0, std::sqrt(2.0), std::sqrt(3.0)});
    REQUIRE_THAT(weak_lp_quasinorm(h, p), WithinAbs(want, 1e-14));

    // Chebyshev: weak <= strong on random inputs
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        GridFunction r = random_function(2, 7, seed);
        for (double pp : {1.0, 1.4, 2.0})
            REQUIRE(weak_lp_quasinorm(r, pp) <= lp_norm(r, pp) + 1e-12);
    }
}

TEST_CASE("delta probe closed form", "[operator_bench]") {
    for (double p : {1.2, 2.0, 3.0}) {
        for (std::uint64_t N : {1, 4, 9, 25}) {
            auto res = ratio_probe(4, RadiiSet::custom({N}), p, {ProbeFamily::Delta, 0, 0});
            double expect = std::pow(static_cast<double>(count_representations(4, N)), 1.0 / p - 1.0);
            REQUIRE_THAT(res.ratio, WithinAbs(expect, 1e-12));
        }
    }
}

TEST_CASE("sparse probe equals the dense two-path computation", "[operator_bench]") {
    RadiiSet radii = RadiiSet::custom({1, 2, 4});
    ProbeSpec ball{ProbeFamily::Ball, 2, 0};
    auto sparse = ratio_probe(4, radii, 1.5, ball);

    std::int64_t L = sparse.L;
    GridFunction f = ball_indicator(4, L, 2);
    auto mf = maximal_function(f, radii, AvgMode::Probability);
    double dense_ratio = lp_norm(mf, 1.5) / lp_norm(f, 1.5);
    REQUIRE_THAT(sparse.ratio, WithinAbs(dense_ratio, 1e-12));
}

TEST_CASE("embedding soundness and violations", "[operator_bench]") {
    // doubling the grid leaves the probe unchanged
    RadiiSet radii = RadiiSet::custom({1, 4});
    ProbeSpec spec{ProbeFamily::Ball, 1, 0};
    auto a = ratio_probe(5, radii, 1.2, spec);
    auto b = ratio_probe(5, radii, 1.2, spec, AvgMode::Probability, 0, 2 * a.L + 1);
    REQUIRE(a.ratio == b.ratio);

    GridFunction f = delta_function(4, 5);
    REQUIRE_THROWS_AS(spherical_average(f, 9, AvgMode::Probability), EmbeddingError);
    REQUIRE_THROWS_AS(
        ratio_probe(4, radii, 1.2, spec, AvgMode::Probability, 0, 3), EmbeddingError);
}

TEST_CASE("lacunary probe grows markedly slower than the full sweep", "[operator_bench]") {
    // fixed ball against growing radii caps; the full sets keep adding radii
    // while {4^j} gains nothing between R = 16 and R = 32
    ProbeSpec ball{ProbeFamily::Ball, 4, 0};
    double full16 = ratio_probe(5, RadiiSet::full_up_to(16), 1.2, ball).ratio;
    double full32 = ratio_probe(5, RadiiSet::full_up_to(32), 1.2, ball).ratio;
    double lac16 = ratio_probe(5, RadiiSet::lacunary({1, 4, 16}, 2.0), 1.2, ball).ratio;
    double lac32 = ratio_probe(5, RadiiSet::lacunary({1, 4, 16}, 2.0), 1.2, ball,
                               AvgMode::Probability, 0, 2 * 12 + 1).ratio;
    REQUIRE(lac16 < full16);
    REQUIRE(lac32 < full32);
    REQUIRE(full32 - full16 > 0.05);
    REQUIRE_THAT(lac32, Catch::Matchers::WithinAbs(lac16, 1e-12));
}

TEST_CASE("random-family probe is deterministic and finite", "[operator_bench]") {
    ProbeSpec spec{ProbeFamily::Random, 0, 42};
    auto a = ratio_probe(4, RadiiSet::custom({1, 4}), 1.5, spec);
    auto b = ratio_probe(4, RadiiSet::custom({1, 4}), 1.5, spec);
    REQUIRE(a.ratio == b.ratio);
    REQUIRE(a.ratio > 0.0);
    REQUIRE(std::isfinite(a.ratio));
    ProbeSpec other{ProbeFamily::Random, 0, 43};
    REQUIRE(ratio_probe(4, RadiiSet::custom({1, 4}), 1.5, other).ratio != a.ratio);
}

TEST_CASE("radii set validation", "[operator_bench]") {
    auto full = RadiiSet::full_up_to(10);
    REQUIRE(full.squared.size() == 10);
    REQUIRE(full.max_squared() == 10);

    auto lac = RadiiSet::lacunary({1, 4, 16, 64}, 2.0);
    REQUIRE(lac.kind == RadiiSet::Kind::Lacunary);
    REQUIRE_THROWS_AS(RadiiSet::lacunary({1, 2}, 2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(RadiiSet::lacunary({1, 4}, 1.0), std::invalid_argument);
}

TEST_CASE("point dumps feed the averaging operator", "[operator_bench]") {
    // the documented reuse path: enumerate once, dump, read back, average
    // against the restored sphere
    namespace fs = std::filesystem;
    auto sphere = enumerate_sphere(4, 9);
    fs::path p = fs::temp_directory_path() / "sphmax_reuse_points.bin";
    write_points(p, sphere);
    auto restored = read_points(p);
    fs::remove(p);

    GridFunction f = random_function(4, 9, 77);
    auto direct = spherical_average(f, 9, AvgMode::Probability);
    auto via_dump = spherical_average(f, 9, AvgMode::Probability, &restored);
    REQUIRE(direct.values == via_dump.values);
}

TEST_CASE("grid dump round trip", "[operator_bench]") {
    namespace fs = std::filesystem;
    GridFunction f = random_function(3, 7, 42);
    fs::path p = fs::temp_directory_path() / "sphmax_grid_test.bin";
    write_grid(p, f);
    auto back = read_grid(p);
    REQUIRE(back.d == f.d);
    REQUIRE(back.L == f.L);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE_THAT(std::abs(back.values[i] - f.values[i]), WithinAbs(0.0, 1e-6));
    fs::remove(p);
}

TEST_CASE("random function is deterministic per seed", "[operator_bench]") {
    auto a = random_function(4, 9, 123);
    auto b = random_function(4, 9, 123);
    REQUIRE(a.values == b.values);
    auto c = random_function(4, 9, 124);
    REQUIRE(a.values != c.values);
}
