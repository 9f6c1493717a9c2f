// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when a
// gating criterion fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dirac/cli.hpp"
#include "oracles.hpp"

using namespace dirac;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    bool gating;
    std::function<Outcome()> check;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

bool bit_equal(const FeatureMap<double>& a, const FeatureMap<double>& b) {
    return a.same_shape(b) && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

GridSet<double> random_grids(std::mt19937_64& rng, std::size_t n, const Extents& dims) {
    std::vector<SamplingGrid<double>> grids;
    std::vector<std::pair<double, double>> ranges;
    for (auto d : dims) ranges.emplace_back(-1.5, static_cast<double>(d) + 0.5);
    for (std::size_t k = 0; k < n; ++k) grids.push_back(oracle::random_grid(rng, dims.size(), dims, ranges));
    return GridSet<double>(std::move(grids));
}

Outcome adjoint_identity() {
    std::mt19937_64 rng(101);
    const auto start = Clock::now();
    double worst = 0;
    std::size_t runs = 0;
    for (std::size_t n : {1u, 3u, 15u})
        for (auto k : {Kernel::Integer, Kernel::Bilinear})
            for (int t = 0; t < 100; ++t, ++runs) {
                const auto u = oracle::random_map(rng, 1, {8, 8}, 0, 1);
                const auto a = oracle::random_map(rng, 1, {8, 8}, 0, 1);
                worst = std::max(worst, adjoint_check(u, a, random_grids(rng, n, {8, 8}), k, Exec::sequential()));
            }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-12 && elapsed < 1.0,
            fmt("%.0f instances, worst discrepancy %.3g, %.3f s", static_cast<double>(runs), worst, elapsed)};
}

Outcome gradient_check() {
    double worst = 0;
    bool all = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cli::GradcheckArgs args;
        args.size = {6, 6};
        args.seed = seed;
        args.kernel = seed % 2 ? Kernel::Integer : Kernel::Bilinear;
        const auto r = cli::run_gradcheck(args);
        worst = std::max({worst, r.deda_error, r.sample_source_error, r.sample_grid_error});
        all = all && r.passed;
    }
    return {all && worst <= 1e-4, fmt("20 instances at 6x6, worst relative error %.3g", worst)};
}

Outcome symmetry() {
    std::mt19937_64 rng(303);
    bool integer_exact = true;
    double bilinear_gap = 0;
    for (int t = 0; t < 100; ++t) {
        const auto a = oracle::random_map(rng, 1, {8, 8});
        const auto grids = random_grids(rng, 1, {8, 8});
        const auto bi = deda_backward(a, grids, Kernel::Integer, {8, 8});
        integer_exact = integer_exact && bit_equal(bi, grid_sample(a, grids[0], Kernel::Integer));
        const auto bb = deda_backward(a, grids, Kernel::Bilinear, {8, 8});
        const auto rb = grid_sample(a, grids[0], Kernel::Bilinear);
        for (std::size_t i = 0; i < bb.size(); ++i)
            bilinear_gap = std::max(bilinear_gap, std::abs(bb.data()[i] - rb.data()[i]));
    }
    return {integer_exact && bilinear_gap <= 1e-12,
            std::string("integer ") + (integer_exact ? "bit-identical" : "differs") +
                fmt(", bilinear max gap %.3g", bilinear_gap)};
}

FeatureMap<double> random_line(std::mt19937_64& rng, std::size_t side) {
    std::uniform_real_distribution<double> pos(0, static_cast<double>(side) - 1);
    FeatureMap<double> img(1, {side, side});
    double x0, y0, x1, y1;
    do {
        x0 = pos(rng), y0 = pos(rng), x1 = pos(rng), y1 = pos(rng);
    } while (std::hypot(x1 - x0, y1 - y0) < static_cast<double>(side) / 2);
    const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0))));
    for (int s = 0; s <= steps; ++s) {
        const double f = static_cast<double>(s) / steps;
        img(0, static_cast<std::size_t>(std::lround(x0 + f * (x1 - x0))),
            static_cast<std::size_t>(std::lround(y0 + f * (y1 - y0)))) = 1.0;
    }
    return img;
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(404);
    bool radon_exact = true;
    for (int t = 0; t < 20; ++t) {
        const auto u = oracle::random_map(rng, 1, {9, 13});
        const auto cols = radon_projection(u, 0.0, 13), rows = radon_projection(u, std::numbers::pi / 2, 9);
        for (std::size_t j = 0; j < 13; ++j) {
            double s = 0;
            for (std::size_t i = 0; i < 9; ++i) s += u(0, i, j);
            radon_exact = radon_exact && cols.data()[j] == s;
        }
        for (std::size_t i = 0; i < 9; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < 13; ++j) s += u(0, i, j);
            radon_exact = radon_exact && rows.data()[i] == s;
        }
    }
    int hough_matches = 0;
    for (int t = 0; t < 20; ++t) {
        const auto img = random_line(rng, 32);
        const auto acc = hough_lines(img, 91, 90);
        if (oracle::argmax2d(acc) == oracle::argmax2d(oracle::hough_voting(img, 91, 90))) ++hough_matches;
    }
    return {radon_exact && hough_matches == 20,
            std::string("radon ") + (radon_exact ? "exact" : "inexact") +
                fmt(", hough argmax agrees on %.0f/20 line images", hough_matches)};
}

Outcome rim_detection() {
    Rng rng(505, 0);
    const Extents dims{40, 40};
    const DatrConfig cfg;
    int hits = 0, oracle_agree = 0;
    for (int t = 0; t < 200; ++t) {
        LesionSpec s;
        s.kind = LesionKind::RimPositive;
        s.radius = 5 + t % 11;
        s.rim_width = rng.uniform(1.5, 2.5);
        s.interior_intensity = rng.uniform(0.2, 0.5);
        s.rim_intensity = s.interior_intensity + rng.uniform(0.4, 0.8);
        s.center = {19.5 + rng.uniform(-1, 1), 19.5 + rng.uniform(-1, 1)};
        const auto u = generate_lesion<double>(s, dims).patch;
        const auto r = datr_transform(u, cfg, Exec::sequential());
        const auto peak = oracle::argmax2d(r.v_s);

        const auto [gx, gy] = oracle::sobel(u);
        FeatureMap<double> mag(1, dims);
        for (std::size_t i = 0; i < mag.size(); ++i) mag.data()[i] = std::hypot(gx.data()[i], gy.data()[i]);
        const auto ref = oracle::shift_and_histogram(mag, gx, gy, cfg.radii, cfg.epsilon);
        bool same = oracle::argmax2d(ref) == peak;
        for (std::size_t i = 0; i < ref.size(); ++i) same = same && std::abs(ref.data()[i] - r.v_s.data()[i]) <= 1e-9;
        oracle_agree += same;

        if (std::abs(static_cast<double>(peak.first) - s.center[0]) <= 1.0 &&
            std::abs(static_cast<double>(peak.second) - s.center[1]) <= 1.0)
            ++hits;
    }
    return {hits >= 190 && oracle_agree == 200,
            fmt("%.0f/200 peaks within 1 px, oracle agrees on %.0f/200", hits, oracle_agree)};
}

std::vector<MetricsReport> reports_seen;

Outcome formula_consistency() {
    std::vector<bool> y;
    std::vector<double> s;
    auto add = [&](std::size_t n, bool label, double score) {
        y.insert(y.end(), n, label);
        s.insert(s.end(), n, score);
    };
    add(126, true, 0.9);
    add(33, false, 0.9);
    add(51, true, 0.2);
    add(400, false, 0.2);
    add(3986 - 433, false, 0.1);
    const auto r = classify_scores(y, s);
    reports_seen.push_back(r);
    bool identity = true;
    for (const auto& m : reports_seen)
        if (m.precision + m.sensitivity > 0)
            identity = identity && std::abs(m.f1 - 2 * m.precision * m.sensitivity / (m.precision + m.sensitivity)) <= 1e-15;
    return {std::abs(r.f1 - 0.750) <= 1e-3 && identity,
            fmt("precision %.4f, sensitivity %.4f -> F1 %.4f", r.precision, r.sensitivity, r.f1) +
                fmt("; F1 identity over %.0f reports", static_cast<double>(reports_seen.size()))};
}

/// Pinned after the reference run, which gave ROC AUC 1.0 at the default
/// noise level (0.04, a tenth of the smallest rim contrast).
constexpr double pinned_roc_auc = 0.99;

Outcome synthetic_benchmark() {
    const auto start = Clock::now();
    DatasetConfig dc;
    dc.count = 500;
    dc.seed = 7;
    const auto samples = make_dataset(dc);
    const auto res = run_benchmark(samples, DatrConfig{}, 5, 7, Exec::sequential());
    const double elapsed = seconds_since(start);
    reports_seen.push_back(res.pooled);
    for (const auto& f : res.folds)
        if (f.report) reports_seen.push_back(*f.report);
    std::size_t pos = 0;
    for (const auto& s : samples) pos += s.spec.kind == LesionKind::RimPositive;
    return {res.pooled.roc_auc >= pinned_roc_auc && elapsed < 30.0,
            fmt("%.0f rim+ of 500, ROC AUC %.4f (pinned >= 0.99), ", static_cast<double>(pos), res.pooled.roc_auc) +
                fmt("pROC %.4f, PR %.4f, ", res.pooled.proc_auc, res.pooled.pr_auc) + fmt("%.2f s", elapsed)};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "dirac_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ostringstream sink;
    auto bench = [&](const std::string& tag, unsigned threads) {
        cli::BenchArgs a;
        a.generate = 120;
        a.seed = 11;
        a.output = root / tag;
        if (cli::cmd_bench(a, sink, sink, Exec{threads}) != cli::exit_ok) return std::string("failed");
        std::string all;
        for (const char* f : {"metrics.csv", "metrics.json", "folds.csv", "scores.csv"}) all += read_file(a.output / f);
        return all;
    };
    LesionSpec s;
    s.center = {3, 20.0, 17.5};
    s.radius = 9;
    s.noise_sigma = 0.05;
    s.seed = 4;
    write_tensor(root / "vol.dact", generate_lesion<double>(s, {6, 40, 40}).patch);
    auto datr = [&](const std::string& tag, unsigned threads) {
        cli::DatrArgs a;
        a.input = root / "vol.dact";
        a.output = (root / tag).string();
        if (cli::cmd_datr(a, sink, sink, Exec{threads}) != cli::exit_ok) return std::string("failed");
        std::string all = read_file(a.output + "_vs.dact") + read_file(a.output + "_vu.dact") +
                          read_file(a.output + ".json");
        for (std::size_t z = 0; z < 6; ++z) all += read_file(a.output + "_vs_c0_z" + std::to_string(z) + ".pgm");
        return all;
    };
    const auto b1 = bench("b1", 1), b2 = bench("b2", 1), b4 = bench("b4", 4);
    const auto d1 = datr("d1", 1), d2 = datr("d2", 1), d4 = datr("d4", 4);
    const bool bench_ok = b1 != "failed" && b1 == b2 && b1 == b4;
    const bool datr_ok = d1 != "failed" && d1 == d2 && d1 == d4;

    std::mt19937_64 rng(808);
    const auto u = oracle::random_map(rng, 2, {32, 32});
    const auto grids = random_grids(rng, 15, {32, 32});
    bool ops_ok = true;
    for (auto k : {Kernel::Integer, Kernel::Bilinear}) {
        const auto f1 = deda_forward(u, grids, k, {32, 32}, Exec::sequential());
        ops_ok = ops_ok && bit_equal(f1, deda_forward(u, grids, k, {32, 32}, Exec{4}));
        ops_ok = ops_ok && bit_equal(deda_backward(f1, grids, k, {32, 32}, Exec::sequential()),
                                     deda_backward(f1, grids, k, {32, 32}, Exec{4}));
    }
    fs::remove_all(root);
    return {bench_ok && datr_ok && ops_ok,
            std::string("bench ") + (bench_ok ? "identical" : "differs") + ", datr " +
                (datr_ok ? "identical" : "differs") + ", operators 1 vs 4 threads " +
                (ops_ok ? "bit-exact" : "differ")};
}

Outcome performance_floor() {
    std::mt19937_64 rng(909);
    const auto u = oracle::random_map(rng, 1, {32, 32});
    const auto grids = random_grids(rng, 15, {32, 32});
    std::vector<double> times;
    for (int t = 0; t < 50; ++t) {
        const auto start = Clock::now();
        const auto v = deda_forward(u, grids, Kernel::Integer, {32, 32}, Exec::sequential());
        times.push_back(seconds_since(start));
        if (v.size() == 0) return {false, "empty output"};
    }
    std::sort(times.begin(), times.end());
    const double median_ms = times[times.size() / 2] * 1e3;
    return {median_ms < 5.0, fmt("median %.3f ms over 50 runs (tracked, not gating)", median_ms)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "adjoint identity", true, adjoint_identity},
        {2, "gradient check", true, gradient_check},
        {3, "single-grid symmetry", true, symmetry},
        {4, "transform oracle equivalence", true, oracle_equivalence},
        {5, "rim detection", true, rim_detection},
        {7, "synthetic benchmark", true, synthetic_benchmark},
        {6, "metric formula consistency", true, formula_consistency},
        {8, "determinism", true, determinism},
        {9, "performance floor", false, performance_floor},
    };
    std::vector<std::string> lines(10);
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        lines[c.id] = std::string(o.pass ? "PASS" : "FAIL") + "  criterion " + std::to_string(c.id) + " (" +
                      c.title + "): " + o.detail;
        if (!o.pass && c.gating) ++failures;
    }
    for (int id = 1; id <= 9; ++id) std::printf("%s\n", lines[id].c_str());
    std::printf("%s\n", failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED");
    return failures ? 1 : 0;
}
