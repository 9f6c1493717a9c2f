#pragma once

// Lesion-level classification metrics, subject-level count agreement and
// stratified fold assignment.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dirac/core.hpp"
#include "dirac/random.hpp"

namespace dirac {

class undefined_correlation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct MetricsReport {
    double accuracy = 0, f1 = 0, sensitivity = 0, specificity = 0, precision = 0;
    double roc_auc = 0, proc_auc = 0, pr_auc = 0;
    std::optional<double> pearson_rho;
    std::optional<double> mse;
    double threshold = 0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline double f1_from(double precision, double sensitivity) {
    const double s = precision + sensitivity;
    return s > 0 ? 2 * precision * sensitivity / s : 0.0;
}

/// Upper FPR bound of the partial ROC area.
inline constexpr double partial_roc_fpr = 0.1;

/// Predictions are `score >= threshold`. The threshold maximizes F1 over the
/// distinct scores, ties going to the lowest threshold. ROC AUC uses the
/// trapezoid rule; the partial ROC area over FPR in (0, 0.1) and the PR area
/// use piecewise-constant (step) interpolation. The partial area is divided
/// by 0.1 so a perfect ranking scores 1.
inline MetricsReport classify_scores(const std::vector<bool>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size()) throw invalid_argument("classify_scores: length mismatch");
    if (labels.size() < 2) throw invalid_argument("classify_scores: need at least two samples");
    for (double s : scores)
        if (!std::isfinite(s)) throw invalid_argument("classify_scores: non-finite score");
    const std::size_t pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw invalid_argument("classify_scores: both classes must be present");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    struct Point {
        double threshold;
        std::size_t tp, fp;
    };
    std::vector<Point> points;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (labels[order[i]] ? tp : fp) += 1;
        if (i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]])
            points.push_back({scores[order[i]], tp, fp});
    }

    const double P = static_cast<double>(pos), N = static_cast<double>(neg);
    MetricsReport r;
    double best_f1 = -1;
    const Point* best = nullptr;
    for (const auto& p : points) {
        const double prec = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
        const double f1 = f1_from(prec, static_cast<double>(p.tp) / P);
        if (f1 >= best_f1) {
            best_f1 = f1;
            best = &p;
        }
    }
    r.threshold = best->threshold;
    r.tp = best->tp;
    r.fp = best->fp;
    r.fn = pos - best->tp;
    r.tn = neg - best->fp;
    r.sensitivity = static_cast<double>(r.tp) / P;
    r.specificity = static_cast<double>(r.tn) / N;
    r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(labels.size());
    r.f1 = f1_from(r.precision, r.sensitivity);

    double prev_fpr = 0, prev_tpr = 0, prev_recall = 0;
    for (const auto& p : points) {
        const double fpr = static_cast<double>(p.fp) / N, tpr = static_cast<double>(p.tp) / P;
        r.roc_auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2;
        const double lo = std::min(prev_fpr, partial_roc_fpr), hi = std::min(fpr, partial_roc_fpr);
        r.proc_auc += (hi - lo) * prev_tpr;
        const double prec = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
        r.pr_auc += (tpr - prev_recall) * prec;
        prev_fpr = fpr;
        prev_tpr = tpr;
        prev_recall = tpr;
    }
    r.proc_auc /= partial_roc_fpr;
    return r;
}

struct CountAgreement {
    double rho;
    double mse;
};

/// Pearson correlation and mean squared error between per-subject counts.
inline CountAgreement count_agreement(const std::vector<double>& truth, const std::vector<double>& predicted) {
    if (truth.size() != predicted.size()) throw invalid_argument("count_agreement: length mismatch");
    if (truth.size() < 2) throw invalid_argument("count_agreement: need at least two subjects");
    const double n = static_cast<double>(truth.size());
    const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    const double mp = std::accumulate(predicted.begin(), predicted.end(), 0.0) / n;
    double stt = 0, spp = 0, stp = 0, se = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double dt = truth[i] - mt, dp = predicted[i] - mp;
        stt += dt * dt;
        spp += dp * dp;
        stp += dt * dp;
        se += (predicted[i] - truth[i]) * (predicted[i] - truth[i]);
    }
    if (stt == 0 || spp == 0) throw undefined_correlation("count_agreement: counts have zero variance");
    return {stp / std::sqrt(stt * spp), se / n};
}

struct LesionPrediction {
    std::string subject;
    bool truth;
    bool predicted;
};

/// Groups lesion decisions by subject (first-appearance order) and compares
/// the per-subject rim+ counts.
inline CountAgreement subject_counts(const std::vector<LesionPrediction>& lesions) {
    std::vector<std::string> subjects;
    std::map<std::string, std::pair<double, double>> counts;
    for (const auto& l : lesions) {
        auto [it, fresh] = counts.try_emplace(l.subject, 0.0, 0.0);
        if (fresh) subjects.push_back(l.subject);
        it->second.first += l.truth ? 1 : 0;
        it->second.second += l.predicted ? 1 : 0;
    }
    std::vector<double> truth, pred;
    for (const auto& s : subjects) {
        truth.push_back(counts[s].first);
        pred.push_back(counts[s].second);
    }
    return count_agreement(truth, pred);
}

// ---------------------------------------------------------------------------

struct SubjectRimCount {
    std::string id;
    int rim_count;
};

/// 0: no rim+ lesion, 1: 1-3, 2: 4-6, 3: more than 6.
inline int rim_count_group(int rim_count) {
    if (rim_count < 0) throw invalid_argument("rim_count_group: negative count");
    if (rim_count == 0) return 0;
    if (rim_count <= 3) return 1;
    if (rim_count <= 6) return 2;
    return 3;
}

struct FoldAssignment {
    struct Entry {
        std::string id;
        int rim_count;
        int group;
        int fold;
    };
    std::vector<Entry> entries;  // input order
    int folds = 0;

    int fold_of(const std::string& id) const {
        for (const auto& e : entries)
            if (e.id == id) return e.fold;
        throw invalid_argument("FoldAssignment: unknown subject '" + id + "'");
    }
};

/// Buckets subjects by rim+ count group, shuffles each bucket with `seed` and
/// deals it round-robin over the folds. The dealing position carries over
/// from one bucket to the next so fold sizes stay balanced too.
inline FoldAssignment stratified_folds(const std::vector<SubjectRimCount>& subjects, int k = 5,
                                       std::uint64_t seed = 0) {
    if (k < 2) throw invalid_argument("stratified_folds: need at least two folds");
    if (subjects.size() < static_cast<std::size_t>(k))
        throw invalid_argument("stratified_folds: fewer subjects than folds");
    FoldAssignment out;
    out.folds = k;
    std::vector<std::vector<std::size_t>> buckets(4);
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const int g = rim_count_group(subjects[i].rim_count);
        out.entries.push_back({subjects[i].id, subjects[i].rim_count, g, -1});
        buckets[g].push_back(i);
    }
    Rng rng(seed, 4);
    std::size_t next = 0;
    for (auto& bucket : buckets) {
        rng.shuffle(bucket);
        for (auto idx : bucket) out.entries[idx].fold = static_cast<int>(next++ % static_cast<std::size_t>(k));
    }
    return out;
}

}  // namespace dirac
