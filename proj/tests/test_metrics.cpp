#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "dirac/bench.hpp"
#include "dirac/metrics.hpp"

using namespace dirac;

namespace {

struct Enumerated {
    double threshold, f1, roc, proc, pr;
};

/// Tries every distinct score as a threshold and recomputes each curve from
/// its definition: ROC AUC as the Mann-Whitney statistic, PR AUC as average
/// precision over the positives, partial ROC by integrating the left-continuous
/// step function at interval midpoints.
Enumerated enumerate(const std::vector<bool>& y, const std::vector<double>& s) {
    const std::set<double> distinct(s.begin(), s.end());
    double P = 0, N = 0;
    for (bool b : y) (b ? P : N) += 1;
    Enumerated out{0, -1, 0, 0, 0};
    std::vector<std::pair<double, double>> points{{0.0, 0.0}};
    for (double t : distinct) {
        double tp = 0, fp = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (s[i] >= t) (y[i] ? tp : fp) += 1;
        const double prec = tp / (tp + fp), sens = tp / P;
        const double f1 = prec + sens > 0 ? 2 * prec * sens / (prec + sens) : 0.0;
        if (f1 > out.f1) {  // ascending thresholds: strict keeps the lowest
            out.f1 = f1;
            out.threshold = t;
        }
        points.emplace_back(fp / N, sens);
    }
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[i] && !y[j]) out.roc += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    out.roc /= P * N;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!y[i]) continue;
        double tp = 0, all = 0;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (s[j] >= s[i]) {
                all += 1;
                tp += y[j] ? 1 : 0;
            }
        out.pr += tp / all / P;
    }
    std::set<double> cuts{0.0, 0.1};
    for (auto [f, t] : points)
        if (f < 0.1) cuts.insert(f);
    for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
        const double a = *it, b = *std::next(it), mid = (a + b) / 2;
        double best = 0;
        for (auto [f, t] : points)
            if (f < mid) best = std::max(best, t);
        out.proc += (b - a) * best;
    }
    out.proc /= 0.1;
    return out;
}

void expect_f1_identity(const MetricsReport& r) {
    if (r.precision + r.sensitivity > 0)
        EXPECT_NEAR(r.f1, 2 * r.precision * r.sensitivity / (r.precision + r.sensitivity), 1e-15);
}

}  // namespace

TEST(ClassifyScores, ReconstructsPublishedF1) {
    // 177 positives and 3986 negatives; 126 true and 33 false positives score
    // highest, giving precision 0.792 and sensitivity 0.712.
    std::vector<bool> y;
    std::vector<double> s;
    auto add = [&](std::size_t n, bool label, double score) {
        for (std::size_t i = 0; i < n; ++i) {
            y.push_back(label);
            s.push_back(score);
        }
    };
    add(126, true, 0.9);
    add(33, false, 0.9);
    add(51, true, 0.2);
    add(400, false, 0.2);
    add(3986 - 433, false, 0.1);
    const auto r = classify_scores(y, s);
    EXPECT_NEAR(r.precision, 0.792, 5e-4);
    EXPECT_NEAR(r.sensitivity, 0.712, 5e-4);
    EXPECT_NEAR(r.f1, 0.750, 1e-3);
    EXPECT_EQ(r.threshold, 0.9);
    EXPECT_EQ(r.tp, 126u);
    EXPECT_EQ(r.fp, 33u);
    expect_f1_identity(r);
    EXPECT_NEAR(f1_from(0.792, 0.712), 0.750, 1e-3);
}

TEST(ClassifyScores, PerfectSeparation) {
    const auto r = classify_scores({false, true, false, true, true}, {0.1, 0.8, 0.3, 0.9, 0.7});
    for (double v : {r.accuracy, r.f1, r.roc_auc, r.proc_auc, r.pr_auc, r.sensitivity, r.specificity, r.precision})
        EXPECT_EQ(v, 1.0);
    EXPECT_EQ(r.threshold, 0.7);
}

TEST(ClassifyScores, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> level(0, 5);
    for (int t = 0; t < 200; ++t) {
        std::vector<bool> y(10);
        std::vector<double> s(10);
        for (std::size_t i = 0; i < 10; ++i) {
            y[i] = i < 4;
            s[i] = level(rng) / 5.0;
        }
        std::shuffle(y.begin(), y.end(), rng);
        const auto r = classify_scores(y, s);
        const auto e = enumerate(y, s);
        EXPECT_EQ(r.threshold, e.threshold);
        EXPECT_NEAR(r.f1, e.f1, 1e-15);
        EXPECT_NEAR(r.roc_auc, e.roc, 1e-12);
        EXPECT_NEAR(r.pr_auc, e.pr, 1e-12);
        EXPECT_NEAR(r.proc_auc, e.proc, 1e-12);
        EXPECT_GE(r.proc_auc, 0.0);
        EXPECT_LE(r.proc_auc, 1.0);
        expect_f1_identity(r);
    }
}

TEST(ClassifyScores, InvariantUnderMonotoneTransform) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> noise(0, 1);
    std::vector<bool> y(60);
    std::vector<double> s(60), t(60);
    for (std::size_t i = 0; i < 60; ++i) {
        y[i] = i % 4 == 0;
        s[i] = noise(rng) + (y[i] ? 1.0 : 0.0);
        t[i] = std::exp(3 * s[i]) - 7;
    }
    const auto a = classify_scores(y, s), b = classify_scores(y, t);
    EXPECT_EQ(a.tp, b.tp);
    EXPECT_EQ(a.fp, b.fp);
    EXPECT_EQ(a.f1, b.f1);
    EXPECT_EQ(a.roc_auc, b.roc_auc);
    EXPECT_EQ(a.proc_auc, b.proc_auc);
    EXPECT_EQ(a.pr_auc, b.pr_auc);
}

TEST(ClassifyScores, Errors) {
    EXPECT_THROW(classify_scores({true, true}, {0.1, 0.2}), invalid_argument);
    EXPECT_THROW(classify_scores({true}, {0.1}), invalid_argument);
    EXPECT_THROW(classify_scores({true, false}, {0.1}), invalid_argument);
    EXPECT_THROW(classify_scores({true, false}, {0.1, std::nan("")}), invalid_argument);
}

TEST(SubjectCounts, IdenticalPredictions) {
    std::vector<LesionPrediction> l{{"a", true, true}, {"b", false, false}, {"b", true, true}, {"c", true, true},
                                    {"c", true, true}};
    const auto r = subject_counts(l);
    EXPECT_DOUBLE_EQ(r.rho, 1.0);
    EXPECT_EQ(r.mse, 0.0);
}

TEST(SubjectCounts, OneExtraPrediction) {
    const auto direct = count_agreement({0, 1, 2, 3}, {0, 1, 2, 4});
    EXPECT_EQ(direct.mse, 0.25);
    std::vector<LesionPrediction> l{{"s0", false, false}, {"s1", true, true}, {"s2", true, true}, {"s2", true, true},
                                    {"s3", true, true},   {"s3", true, true}, {"s3", true, true}, {"s3", false, true}};
    const auto grouped = subject_counts(l);
    EXPECT_EQ(grouped.mse, 0.25);
    EXPECT_DOUBLE_EQ(grouped.rho, direct.rho);
}

TEST(SubjectCounts, MatchesOnePassFormula) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> d(0, 9);
    std::vector<double> a(30), b(30);
    for (std::size_t i = 0; i < 30; ++i) {
        a[i] = d(rng);
        b[i] = a[i] + d(rng) - 4;
    }
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < 30; ++i) {
        sa += a[i];
        sb += b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
        sab += a[i] * b[i];
    }
    const double n = 30;
    const double rho = (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
    EXPECT_NEAR(count_agreement(a, b).rho, rho, 1e-12);
}

TEST(SubjectCounts, Errors) {
    EXPECT_THROW(count_agreement({1, 1, 1}, {0, 1, 2}), undefined_correlation);
    EXPECT_THROW(count_agreement({1}, {1}), invalid_argument);
    EXPECT_THROW(count_agreement({1, 2}, {1}), invalid_argument);
}

TEST(StratifiedFolds, GroupBoundaries) {
    std::vector<int> got;
    for (int c : {0, 0, 2, 5, 9, 3, 4, 6, 7, 1}) got.push_back(rim_count_group(c));
    EXPECT_EQ(got, (std::vector<int>{0, 0, 1, 2, 3, 1, 2, 2, 3, 1}));
    EXPECT_THROW(rim_count_group(-1), invalid_argument);
}

TEST(StratifiedFolds, ExactDivision) {
    std::vector<SubjectRimCount> subjects;
    for (int g = 0; g < 4; ++g)
        for (int i = 0; i < 5; ++i) subjects.push_back({"s" + std::to_string(g) + std::to_string(i), std::array{0, 2, 5, 9}[g]});
    const auto a = stratified_folds(subjects, 5, 42);
    std::map<std::pair<int, int>, int> cell;
    for (const auto& e : a.entries) ++cell[{e.fold, e.group}];
    EXPECT_EQ(cell.size(), 20u);
    for (const auto& [key, count] : cell) EXPECT_EQ(count, 1);
}

TEST(StratifiedFolds, DeterministicAndBalanced) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> d(0, 10);
    std::vector<SubjectRimCount> subjects;
    for (int i = 0; i < 37; ++i) subjects.push_back({"p" + std::to_string(i), d(rng)});
    const auto a = stratified_folds(subjects, 5, 9), b = stratified_folds(subjects, 5, 9);
    ASSERT_EQ(a.entries.size(), 37u);
    std::vector<int> sizes(5, 0);
    std::map<int, std::vector<int>> per_group;
    for (std::size_t i = 0; i < 37; ++i) {
        EXPECT_EQ(a.entries[i].fold, b.entries[i].fold);
        EXPECT_EQ(a.entries[i].id, subjects[i].id);
        ++sizes[a.entries[i].fold];
        per_group[a.entries[i].group].resize(5);
        ++per_group[a.entries[i].group][a.entries[i].fold];
    }
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);
    for (auto& [g, counts] : per_group)
        EXPECT_LE(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()), 1);
    EXPECT_EQ(a.fold_of("p3"), a.entries[3].fold);
    EXPECT_THROW(a.fold_of("nobody"), invalid_argument);
}

TEST(StratifiedFolds, Errors) {
    std::vector<SubjectRimCount> few{{"a", 0}, {"b", 1}};
    EXPECT_THROW(stratified_folds(few, 1), invalid_argument);
    EXPECT_THROW(stratified_folds(few, 3), invalid_argument);
}

TEST(PeakFeature, ConstantPatchScoresZero) {
    FeatureMap<double> p(1, {2, 24, 24});
    for (auto& v : p.data()) v = 0.4;
    EXPECT_EQ(peak_feature_score(p, DatrConfig{}), 0.0);
}

TEST(PeakFeature, RimPositiveScoresHigher) {
    for (double r : {5.0, 7.0, 9.0}) {
        LesionSpec s;
        s.center = {15.5, 15.5};
        s.radius = r;
        s.rim_intensity = 0.8;
        s.interior_intensity = 0.35;
        const auto pos = generate_lesion<double>(s, {32, 32}).patch;
        s.kind = LesionKind::RimNegative;
        const auto neg = generate_lesion<double>(s, {32, 32}).patch;
        EXPECT_GT(peak_feature_score(pos, DatrConfig{}), peak_feature_score(neg, DatrConfig{})) << r;
    }
}

TEST(Benchmark, NoiselessSetSeparatesPerfectly) {
    DatasetConfig cfg;
    cfg.count = 60;
    cfg.noise_sigma = 0.0;
    cfg.dims = {2, 32, 32};
    cfg.positive_fraction = 0.25;
    const auto res = run_benchmark(make_dataset(cfg), DatrConfig{}, 5, 1, Exec::sequential());
    EXPECT_EQ(res.pooled.roc_auc, 1.0);
    EXPECT_EQ(res.folds.size(), 5u);
    expect_f1_identity(res.pooled);
}

TEST(Benchmark, DatasetIsSeeded) {
    DatasetConfig cfg;
    cfg.count = 12;
    cfg.dims = {2, 32, 32};
    const auto a = make_dataset(cfg), b = make_dataset(cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].patch, b[i].patch);
        EXPECT_EQ(a[i].subject, b[i].subject);
    }
    cfg.count = 1;
    EXPECT_THROW(make_dataset(cfg), invalid_argument);
}
