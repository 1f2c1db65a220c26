// Command-line front end: reproducible experiments over the library with
// machine-readable outputs. Every file embeds the FNV-1a hash of its
// canonical configuration; re-running a command with the same config and
// seed reproduces the payload byte for byte (JSON carries one generated_at
// field that is excluded from the hash).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sphmax/acceptance.hpp"
#include "sphmax/exp_sums.hpp"
#include "sphmax/lattice_spheres.hpp"
#include "sphmax/multiplier_lab.hpp"
#include "sphmax/operator_bench.hpp"
#include "sphmax/radii_sequences.hpp"
#include "sphmax/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Config {
    std::string command;
    std::map<std::string, std::string> params;  // canonical key -> value

    void set(const std::string& k, const std::string& v) { params[k] = v; }
    void set(const std::string& k, std::uint64_t v) { params[k] = std::to_string(v); }
    void set(const std::string& k, double v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        params[k] = os.str();
    }

    std::string canonical() const {
        std::ostringstream os;
        os << "command=" << command << "\n";
        for (const auto& [k, v] : params) os << k << "=" << v << "\n";
        return os.str();
    }

    std::string hash_hex() const {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << sphmax::fnv1a64(canonical());
        return os.str();
    }
};

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

fs::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SPHMAX_OUT_DIR")) return env;
    return ".";
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);  // binary: byte-stable newlines
    if (!f) throw std::runtime_error("cannot open output file " + (dir / name).string());
    return f;
}

void write_csv_preamble(std::ofstream& f, const Config& cfg) {
    f << "# sphmax " << cfg.command << " config_hash=" << cfg.hash_hex() << "\n";
    for (const auto& [k, v] : cfg.params) f << "# " << k << "=" << v << "\n";
}

json json_envelope(const Config& cfg) {
    json j;
    j["command"] = cfg.command;
    j["config"] = cfg.params;
    j["config_hash"] = cfg.hash_hex();
    auto now = std::chrono::system_clock::now();
    j["generated_at"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    return j;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoull(tok));
    }
    return out;
}

// radii spec grammar: full:R | lacunary:base,count | custom:n1,n2,...
sphmax::RadiiSet parse_radii(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--radii", "expected kind:args");
    std::string kind = text.substr(0, colon);
    std::string args = text.substr(colon + 1);
    if (kind == "full") return sphmax::RadiiSet::full_up_to(std::stoull(args));
    if (kind == "custom") return sphmax::RadiiSet::custom(parse_u64_list(args));
    if (kind == "lacunary") {
        auto parts = parse_u64_list(args);
        if (parts.size() != 2) throw CLI::ValidationError("--radii", "lacunary:base,count");
        std::vector<std::uint64_t> sq;
        std::uint64_t v = 1;
        for (std::uint64_t j = 0; j < parts[1]; ++j) {
            v *= parts[0];
            sq.push_back(v);
        }
        return sphmax::RadiiSet::lacunary(std::move(sq), std::sqrt(static_cast<double>(parts[0])) *
                                                             0.999);
    }
    throw CLI::ValidationError("--radii", "unknown kind " + kind);
}

int run_count(const fs::path& out_dir, int d, std::uint64_t n_max, bool with_jacobi,
              const std::string& format) {
    Config cfg;
    cfg.command = "count";
    cfg.set("d", static_cast<std::uint64_t>(d));
    cfg.set("n_max", n_max);
    cfg.set("jacobi", std::string(with_jacobi ? "true" : "false"));
    cfg.set("format", format);

    auto table = sphmax::count_table(d, n_max);
    std::string name = "count_d" + std::to_string(d) + "_n" + std::to_string(n_max) + "." + format;
    auto f = open_output(out_dir, name);
    bool all_equal = true;
    if (format == "csv") {
        write_csv_preamble(f, cfg);
        f << "N,count" << (with_jacobi ? ",jacobi_r4,equal" : "") << "\n";
        for (std::uint64_t N = 1; N <= n_max; ++N) {
            f << N << "," << table[N];
            if (with_jacobi) {
                std::uint64_t jr = sphmax::jacobi_r4(N);
                bool eq = jr == table[N];
                all_equal = all_equal && eq;
                f << "," << jr << "," << (eq ? "true" : "false");
            }
            f << "\n";
        }
    } else {
        json j = json_envelope(cfg);
        j["rows"] = json::array();
        for (std::uint64_t N = 1; N <= n_max; ++N) {
            json row{{"N", N}, {"count", table[N]}};
            if (with_jacobi) {
                std::uint64_t jr = sphmax::jacobi_r4(N);
                row["jacobi_r4"] = jr;
                row["equal"] = jr == table[N];
                all_equal = all_equal && (jr == table[N]);
            }
            j["rows"].push_back(row);
        }
        f << j.dump(2) << "\n";
    }
    std::cout << "count: wrote " << (out_dir / name).string();
    if (with_jacobi) std::cout << " (jacobi agreement: " << (all_equal ? "yes" : "NO") << ")";
    std::cout << "\n";
    return with_jacobi && !all_equal ? 1 : 0;
}

int run_sums(const fs::path& out_dir, const std::string& kind, int d, std::uint64_t q_max,
             std::uint64_t n_max, double eps, std::uint64_t samples, std::uint64_t seed,
             const std::string& format) {
    Config cfg;
    cfg.command = "sums";
    cfg.set("kind", kind);
    cfg.set("d", static_cast<std::uint64_t>(d));
    cfg.set("q_max", q_max);
    cfg.set("n_max", n_max);
    cfg.set("eps", eps);
    cfg.set("samples", samples);
    cfg.set("seed", seed);
    cfg.set("format", format);

    std::string name = "sums_" + kind + "_q" + std::to_string(q_max) + "." + format;
    auto f = open_output(out_dir, name);

    struct Row {
        std::uint64_t q;
        double value;
    };
    std::vector<Row> rows;
    double overall = 0.0;

    if (kind == "weil") {
        for (std::uint64_t q : sphmax::sieve_primes(q_max)) {
            sphmax::KloostermanEvaluator ev{q};
            double worst = 0.0;
            for (std::uint64_t N = 1; N <= n_max; ++N) {
                for (std::uint64_t k = 0; k < samples; ++k) {
                    auto rng = sphmax::stream_rng(seed, q * 131071 + N * 127 + k);
                    std::vector<std::int64_t> n(d);
                    for (auto& c : n) c = static_cast<std::int64_t>(rng.next_below(q));
                    sphmax::SumParams p(d, sphmax::Modulus(q), static_cast<std::int64_t>(N), n);
                    worst = std::max(worst, sphmax::weil_ratio(p, eps));
                }
            }
            rows.push_back({q, worst});
            overall = std::max(overall, worst);
        }
    } else if (kind == "gauss") {
        for (std::uint64_t q = 1; q <= q_max; ++q) {
            sphmax::Modulus mod(q);
            double worst = 0.0;
            for (std::uint64_t k = 0; k < samples; ++k) {
                auto rng = sphmax::stream_rng(seed, q * 8191 + k);
                std::uint64_t u = mod.units()[rng.next_below(mod.units().size())];
                std::vector<std::int64_t> n(d);
                for (auto& c : n) c = static_cast<std::int64_t>(rng.next_below(q));
                sphmax::SumParams p(d, sphmax::Modulus(q), 0, n);
                double cap = std::pow(2.0, 0.5 * d) * std::pow(static_cast<double>(q), -0.5 * d);
                worst = std::max(worst, sphmax::gauss_sum(p, u).abs() / cap);
            }
            rows.push_back({q, worst});
            overall = std::max(overall, worst);
        }
    } else if (kind == "dyadic") {
        for (std::uint64_t Q = 2; Q <= q_max; Q *= 2) {
            double worst = 0.0;
            for (std::uint64_t N = 1; N <= n_max; ++N)
                worst = std::max(worst, sphmax::ramanujan_dyadic_average(Q, N).bound_ratio);
            rows.push_back({Q, worst});
            overall = std::max(overall, worst);
        }
    } else {
        throw CLI::ValidationError("--kind", "expected weil|gauss|dyadic");
    }

    if (format == "csv") {
        write_csv_preamble(f, cfg);
        f << "q,max_ratio\n";
        for (const auto& r : rows) f << r.q << "," << fmt_double(r.value) << "\n";
        f << "# overall_max=" << fmt_double(overall) << "\n";
    } else {
        json j = json_envelope(cfg);
        j["rows"] = json::array();
        for (const auto& r : rows) j["rows"].push_back({{"q", r.q}, {"max_ratio", r.value}});
        j["overall_max"] = overall;
        f << j.dump(2) << "\n";
    }
    std::cout << "sums/" << kind << ": overall max ratio " << fmt_double(overall) << ", wrote "
              << (out_dir / name).string() << "\n";
    return 0;
}

int run_sequence(const fs::path& out_dir, std::uint64_t m, double eta, std::uint64_t j_max,
                 std::uint64_t j0, std::uint64_t p_max, double s, unsigned threads) {
    Config cfg;
    cfg.command = "sequence";
    cfg.set("m", m);
    cfg.set("eta", eta);
    cfg.set("j_max", j_max);
    cfg.set("j0", j0);
    cfg.set("p_max", p_max);
    cfg.set("s", s);

    auto seq = sphmax::generate(m, eta, j_max, j0);
    auto classes = sphmax::classify_primes(seq, p_max, threads);
    auto dirichlet = sphmax::bad_prime_dirichlet_partial(seq, s, p_max, threads);

    json j = json_envelope(cfg);
    json body = sphmax::to_json(seq, classes);
    for (auto& [k, v] : body.items()) j[k] = v;
    j["dirichlet"] = {{"s", s},
                      {"bad_sum", dirichlet.bad_sum},
                      {"surrogate", dirichlet.surrogate},
                      {"bad_prime_count", dirichlet.bad_primes.size()}};
    j["lacunarity_min_ratio"] = seq.terms.size() > 1 ? sphmax::lacunarity_min_ratio(seq) : 0.0;

    std::string name = "sequence_m" + std::to_string(m) + "_j" + std::to_string(j_max) + ".json";
    auto f = open_output(out_dir, name);
    f << j.dump(2) << "\n";
    std::size_t bad = 0;
    for (const auto& c : classes)
        if (c.bad) ++bad;
    std::cout << "sequence: " << seq.terms.size() << " terms, " << classes.size() << " primes ("
              << bad << " bad), dirichlet partial " << fmt_double(dirichlet.bad_sum)
              << " <= surrogate " << fmt_double(dirichlet.surrogate) << ", wrote "
              << (out_dir / name).string() << "\n";
    return 0;
}

int run_multiplier(const fs::path& out_dir, int d, const std::string& n_list_text,
                   std::uint64_t samples, std::uint64_t seed, std::uint64_t q_max,
                   unsigned threads) {
    Config cfg;
    cfg.command = "multiplier";
    cfg.set("d", static_cast<std::uint64_t>(d));
    cfg.set("n_list", n_list_text);
    cfg.set("samples", samples);
    cfg.set("seed", seed);
    cfg.set("q_max", q_max);

    auto N_list = parse_u64_list(n_list_text);
    if (N_list.empty()) throw CLI::ValidationError("--n-list", "need at least one N");

    std::string name = "multiplier_d" + std::to_string(d) + ".csv";
    auto f = open_output(out_dir, name);
    write_csv_preamble(f, cfg);
    f << "N";
    for (int i = 0; i < d; ++i) f << ",xi" << i;
    f << ",discrete_re,discrete_im,main_re,main_im,abs_error\n";

    sphmax::KloostermanBank bank;
    for (std::uint64_t N : N_list) {
        auto sphere = sphmax::enumerate_sphere(d, N);
        for (std::uint64_t k = 0; k < samples; ++k) {
            auto xi = sphmax::detail::decay_sample(d, N, k, seed);
            auto s = sphmax::sample_multiplier(bank, sphere, xi,
                                               q_max ? q_max : sphmax::isqrt_u64(N));
            f << N;
            for (double t : s.xi) f << "," << fmt_double(t);
            f << "," << fmt_double(s.discrete.real()) << "," << fmt_double(s.discrete.imag()) << ","
              << fmt_double(s.main_term.real()) << "," << fmt_double(s.main_term.imag()) << ","
              << fmt_double(std::abs(s.error)) << "\n";
        }
    }

    json summary = json_envelope(cfg);
    if (N_list.size() >= 2) {
        auto fit = sphmax::error_multiplier_decay(d, N_list, samples, seed, threads);
        summary["fitted_exponent"] = fit.slope;
        summary["points"] = json::array();
        for (const auto& p : fit.points)
            summary["points"].push_back({{"N", p.N}, {"e_max", p.e_max}});
        std::cout << "multiplier: fitted decay exponent " << fmt_double(fit.slope) << "\n";
    }
    summary["samples"] = samples;
    summary["seed"] = seed;
    auto fj = open_output(out_dir, "multiplier_d" + std::to_string(d) + "_summary.json");
    fj << summary.dump(2) << "\n";
    std::cout << "multiplier: wrote " << (out_dir / name).string() << "\n";
    return 0;
}

int run_bench(const fs::path& out_dir, int d, const std::string& radii_text, double p,
              const std::string& family_text, const std::string& mode_text, bool dump_grid,
              std::uint64_t seed, unsigned threads) {
    Config cfg;
    cfg.command = "bench";
    cfg.set("d", static_cast<std::uint64_t>(d));
    cfg.set("radii", radii_text);
    cfg.set("p", p);
    cfg.set("family", family_text);
    cfg.set("mode", mode_text);
    cfg.set("seed", seed);

    auto radii = parse_radii(radii_text);
    sphmax::AvgMode mode =
        mode_text == "renorm" ? sphmax::AvgMode::Renormalized : sphmax::AvgMode::Probability;

    sphmax::ProbeSpec spec;
    if (family_text == "delta") {
        spec.family = sphmax::ProbeFamily::Delta;
    } else if (family_text.rfind("ball:", 0) == 0) {
        spec.family = sphmax::ProbeFamily::Ball;
        spec.ball_R_sq = std::stoull(family_text.substr(5));
    } else if (family_text.rfind("random", 0) == 0) {
        spec.family = sphmax::ProbeFamily::Random;
        spec.seed = seed;
    } else {
        throw CLI::ValidationError("--family", "expected delta|ball:R|random");
    }

    auto res = sphmax::ratio_probe(d, radii, p, spec, mode, threads);

    json j = json_envelope(cfg);
    j["ratio"] = res.ratio;
    j["norm_Mf"] = res.norm_Mf;
    j["norm_f"] = res.norm_f;
    j["grid_L"] = res.L;
    j["radii_count"] = radii.squared.size();
    std::string name = "bench_d" + std::to_string(d) + "_p" + fmt_double(p) + ".json";
    auto f = open_output(out_dir, name);
    f << j.dump(2) << "\n";

    if (dump_grid) {
        // dense recomputation for the dump; guarded by the grid size cap
        sphmax::GridFunction gf = [&] {
            switch (spec.family) {
                case sphmax::ProbeFamily::Delta:
                    return sphmax::delta_function(d, res.L);
                case sphmax::ProbeFamily::Ball:
                    return sphmax::ball_indicator(d, res.L, spec.ball_R_sq);
                default:
                    return sphmax::random_function(d, res.L, seed);
            }
        }();
        auto mf = sphmax::maximal_function(gf, radii, mode);
        sphmax::write_grid(out_dir / ("bench_d" + std::to_string(d) + "_maximal.bin"), mf);
    }
    std::cout << "bench: ratio " << fmt_double(res.ratio) << " on L=" << res.L << " grid, wrote "
              << (out_dir / name).string() << "\n";
    return 0;
}

int run_accept(const fs::path& out_dir, unsigned threads, bool write_json) {
    sphmax::acceptance::Options opt;
    opt.threads = threads;
    auto results = sphmax::acceptance::run_all(opt, &std::cout);
    bool ok = sphmax::acceptance::all_passed(results);
    if (write_json) {
        Config cfg;
        cfg.command = "accept";
        cfg.set("threads", static_cast<std::uint64_t>(threads));
        json j = json_envelope(cfg);
        j["criteria"] = json::array();
        for (const auto& r : results)
            j["criteria"].push_back({{"id", r.id},
                                     {"name", r.name},
                                     {"pass", r.pass},
                                     {"detail", r.detail},
                                     {"seconds", r.seconds}});
        j["all_passed"] = ok;
        auto f = open_output(out_dir, "acceptance.json");
        f << j.dump(2) << "\n";
    }
    std::cout << (ok ? "accept: all criteria passed\n" : "accept: FAILURES present\n");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sphmax: discrete spherical sums, counts, multipliers and operator probes"};
    app.require_subcommand(1);

    std::string out_flag;
    unsigned threads = 0;
    app.add_option("--out,-o", out_flag, "output directory (default $SPHMAX_OUT_DIR or .)");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    // count
    auto* count = app.add_subcommand("count", "lattice point count tables with the Jacobi oracle");
    int count_d = 4;
    std::uint64_t count_nmax = 100;
    bool count_jacobi = true;
    std::string count_format = "csv";
    count->add_option("--d", count_d, "dimension")->check(CLI::Range(1, 8));
    count->add_option("--n-max", count_nmax, "largest squared radius");
    count->add_flag("--jacobi,!--no-jacobi", count_jacobi, "cross-check d=4 counts (d=4 only)");
    count->add_option("--format", count_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    // sums
    auto* sums = app.add_subcommand("sums", "exponential-sum sweeps");
    std::string sums_kind = "weil";
    int sums_d = 4;
    std::uint64_t sums_qmax = 512, sums_nmax = 100, sums_samples = 4, sums_seed = 0x3E11;
    double sums_eps = 0.1;
    std::string sums_format = "csv";
    sums->add_option("--kind", sums_kind, "weil|gauss|dyadic")
        ->check(CLI::IsMember({"weil", "gauss", "dyadic"}));
    sums->add_option("--d", sums_d, "dimension")->check(CLI::Range(1, 8));
    sums->add_option("--q-max", sums_qmax, "largest modulus");
    sums->add_option("--n-max", sums_nmax, "largest N");
    sums->add_option("--eps", sums_eps, "epsilon in the Weil envelope");
    sums->add_option("--samples", sums_samples, "n samples per (q, N)");
    sums->add_option("--seed", sums_seed, "sample seed");
    sums->add_option("--format", sums_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    // sequence
    auto* sequence = app.add_subcommand("sequence", "primorial radii sequences and prime splits");
    std::uint64_t seq_m = 1, seq_jmax = 3, seq_j0 = 1, seq_pmax = 1000;
    double seq_eta = 1.1, seq_s = 1.0;
    sequence->add_option("--m", seq_m, "offset m");
    sequence->add_option("--eta", seq_eta, "growth exponent (> 1)");
    sequence->add_option("--j-max", seq_jmax, "number of terms");
    sequence->add_option("--j0", seq_j0, "starting prime index");
    sequence->add_option("--p-max", seq_pmax, "sieve bound for prime classification");
    sequence->add_option("--s", seq_s, "Dirichlet exponent in (0, 1]");

    // multiplier
    auto* multiplier = app.add_subcommand("multiplier", "approximation-formula experiments");
    int mult_d = 5;
    std::string mult_nlist = "25,49,81";
    std::uint64_t mult_samples = 200, mult_seed = 0xDECA, mult_qmax = 0;
    multiplier->add_option("--d", mult_d, "dimension")->check(CLI::Range(4, 5));
    multiplier->add_option("--n-list", mult_nlist, "comma list of squared radii");
    multiplier->add_option("--samples", mult_samples, "xi samples per N");
    multiplier->add_option("--seed", mult_seed, "sample seed");
    multiplier->add_option("--q-max", mult_qmax, "truncation (0 = floor(r))");

    // bench
    auto* bench = app.add_subcommand("bench", "operator-norm probes on periodic grids");
    int bench_d = 5;
    std::string bench_radii = "full:16", bench_family = "delta", bench_mode = "prob";
    double bench_p = 1.2;
    bool bench_dump = false;
    std::uint64_t bench_seed = 7;
    bench->add_option("--d", bench_d, "dimension")->check(CLI::Range(2, 6));
    bench->add_option("--radii", bench_radii, "full:R | lacunary:base,count | custom:n1,n2,...");
    bench->add_option("--p", bench_p, "ell^p exponent");
    bench->add_option("--family", bench_family, "delta | ball:R | random");
    bench->add_option("--mode", bench_mode, "prob|renorm")
        ->check(CLI::IsMember({"prob", "renorm"}));
    bench->add_flag("--dump-grid", bench_dump, "write the maximal function as flat binary");
    bench->add_option("--seed", bench_seed, "seed for the random family");

    // accept
    auto* accept = app.add_subcommand("accept", "run the full acceptance suite");
    bool accept_json = true;
    accept->add_flag("--json,!--no-json", accept_json, "write acceptance.json");

    CLI11_PARSE(app, argc, argv);
    fs::path out_dir = resolve_out_dir(out_flag);

    try {
        if (count->parsed())
            return run_count(out_dir, count_d, count_nmax, count_jacobi && count_d == 4,
                             count_format);
        if (sums->parsed())
            return run_sums(out_dir, sums_kind, sums_d, sums_qmax, sums_nmax, sums_eps,
                            sums_samples, sums_seed, sums_format);
        if (sequence->parsed())
            return run_sequence(out_dir, seq_m, seq_eta, seq_jmax, seq_j0, seq_pmax, seq_s,
                                threads);
        if (multiplier->parsed())
            return run_multiplier(out_dir, mult_d, mult_nlist, mult_samples, mult_seed, mult_qmax,
                                  threads);
        if (bench->parsed())
            return run_bench(out_dir, bench_d, bench_radii, bench_p, bench_family, bench_mode,
                             bench_dump, bench_seed, threads);
        if (accept->parsed()) return run_accept(out_dir, threads, accept_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
