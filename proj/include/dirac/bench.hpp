#pragma once

// Desk-scale rim benchmark: labelled synthetic patches, a non-learned score
// computed from rim-transform accumulators, and cross-validated evaluation
// with stratified subject folds.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dirac/core.hpp"
#include "dirac/datr.hpp"
#include "dirac/deda.hpp"
#include "dirac/metrics.hpp"
#include "dirac/random.hpp"
#include "dirac/synth.hpp"

namespace dirac {

/// Half-width of the central window, in pixels from the patch centre.
inline constexpr double score_window_half_width = 2.5;

/// Score of one patch (2D, or 3D with axial slices). Every pixel votes along
/// its gradient as in the rim transform; within the central window we then
/// read three accumulators over the radii:
///   a = D(S*S), b = D(S) (= v_s), u = D(S*U)
/// and return a / (8 b) + u / b: the S-weighted mean gradient magnitude
/// (divided by the Sobel gain 8) plus the S-weighted mean intensity of the
/// pixels whose votes converge on the centre. Rim+ lesions have stronger,
/// brighter edges converging there. Flat patches score 0.
template <std::floating_point T>
double peak_feature_score(const FeatureMap<T>& patch, const DatrConfig& cfg, const Exec& exec = Exec::sequential()) {
    cfg.validate();
    const std::size_t slices = patch.rank() == 3 ? patch.dims()[0] : 1;
    double a = 0, b = 0, u = 0;
    for (std::size_t z = 0; z < slices; ++z) {
        const FeatureMap<T> plane = patch.rank() == 3 ? axial_slice(patch, z) : patch;
        const Extents& dims = plane.dims();
        const auto field = sobel_gradients(plane, static_cast<T>(cfg.epsilon));
        const auto radii = cfg.effective_radii(dims);
        const double cx = (static_cast<double>(dims[0]) - 1) / 2, cy = (static_cast<double>(dims[1]) - 1) / 2;
        for (std::size_t c = 0; c < plane.channels(); ++c) {
            const auto grids = build_rim_grids(field, radii, c);
            const auto s = detail::single_channel(field.magnitude, c);
            FeatureMap<T> ss(1, dims), su(1, dims);
            for (std::size_t i = 0; i < s.size(); ++i) {
                ss.data()[i] = s.data()[i] * s.data()[i];
                su.data()[i] = s.data()[i] * plane.channel(c)[i];
            }
            const auto v_s = deda_forward(s, grids, Kernel::Integer, dims, exec);
            const auto v_ss = deda_forward(ss, grids, Kernel::Integer, dims, exec);
            const auto v_su = deda_forward(su, grids, Kernel::Integer, dims, exec);
            for (std::size_t i = 0; i < dims[0]; ++i) {
                if (std::abs(static_cast<double>(i) - cx) > score_window_half_width) continue;
                for (std::size_t j = 0; j < dims[1]; ++j) {
                    if (std::abs(static_cast<double>(j) - cy) > score_window_half_width) continue;
                    a += v_ss(0, i, j);
                    b += v_s(0, i, j);
                    u += v_su(0, i, j);
                }
            }
        }
    }
    if (!(b > 1e-12)) return 0.0;
    return a / (8 * b) + u / b;
}

template <std::floating_point T>
std::vector<double> peak_feature_classifier(const std::vector<FeatureMap<T>>& patches, const DatrConfig& cfg,
                                            const Exec& exec = Exec::from_env()) {
    std::vector<double> scores(patches.size());
    parallel_for(exec, patches.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) scores[i] = peak_feature_score(patches[i], cfg);
    });
    return scores;
}

// ---------------------------------------------------------------------------

struct DatasetConfig {
    std::size_t count = 500;
    /// rim+ : rim- close to 1 : 10.
    double positive_fraction = 1.0 / 11.0;
    Extents dims{8, 32, 32};
    double noise_sigma = 0.04;
    double min_radius = 5.0, max_radius = 15.0;
    std::pair<double, double> rim_width{1.5, 2.5};
    std::pair<double, double> interior{0.2, 0.5};
    std::pair<double, double> rim_contrast{0.4, 0.8};
    /// In-plane jitter of the lesion centre around the patch centre.
    double center_jitter = 1.5;
    std::size_t lesions_per_subject = 10;
    std::uint64_t seed = 7;
};

struct Sample {
    std::string id;
    std::string subject;
    LesionSpec spec;
    FeatureMap<double> patch;
};

/// Lesion radius is drawn from [min_radius, max_radius] clipped so that the
/// lesion keeps the 2-pixel margin inside the patch.
inline std::vector<Sample> make_dataset(const DatasetConfig& cfg) {
    if (cfg.count < 2) throw invalid_argument("make_dataset: need at least two samples");
    detail::check_spatial(cfg.dims, "make_dataset", 2);
    const std::size_t rank = cfg.dims.size();
    const double half_plane =
        (static_cast<double>(std::min(cfg.dims[rank - 2], cfg.dims[rank - 1])) - 1) / 2;
    Rng rng(cfg.seed, 10);

    std::size_t positives = static_cast<std::size_t>(std::lround(cfg.positive_fraction * static_cast<double>(cfg.count)));
    positives = std::clamp<std::size_t>(positives, 1, cfg.count - 1);
    std::vector<bool> is_pos(cfg.count, false);
    std::fill(is_pos.begin(), is_pos.begin() + static_cast<long>(positives), true);
    rng.shuffle(is_pos);

    const std::size_t subjects = std::max<std::size_t>(5, cfg.count / std::max<std::size_t>(1, cfg.lesions_per_subject));
    std::vector<Sample> out;
    out.reserve(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i) {
        LesionSpec s;
        s.kind = is_pos[i] ? LesionKind::RimPositive : LesionKind::RimNegative;
        s.rim_width = rng.uniform(cfg.rim_width.first, cfg.rim_width.second);
        const double fit = half_plane - 2.0 - cfg.center_jitter - s.rim_width / 2;
        const double r_hi = std::min(cfg.max_radius, fit);
        if (r_hi < cfg.min_radius) throw invalid_argument("make_dataset: patch too small for the radius range");
        s.radius = rng.uniform(cfg.min_radius, r_hi);
        s.interior_intensity = rng.uniform(cfg.interior.first, cfg.interior.second);
        s.rim_intensity = s.interior_intensity + rng.uniform(cfg.rim_contrast.first, cfg.rim_contrast.second);
        s.noise_sigma = cfg.noise_sigma;
        s.seed = rng.next();
        s.center.resize(rank);
        for (std::size_t a = 0; a < rank; ++a) {
            const double mid = (static_cast<double>(cfg.dims[a]) - 1) / 2;
            s.center[a] = a + 2 >= rank ? mid + rng.uniform(-cfg.center_jitter, cfg.center_jitter) : mid;
        }
        // rim+ lesions concentrate in a few subjects; rim- spread uniformly.
        const double w = rng.uniform();
        const auto subj = static_cast<std::size_t>(static_cast<double>(subjects) * (is_pos[i] ? w * w : w));
        Sample sample{"L" + std::to_string(i), "S" + std::to_string(std::min(subj, subjects - 1)), s,
                      generate_lesion<double>(s, cfg.dims).patch};
        out.push_back(std::move(sample));
    }
    return out;
}

struct FoldResult {
    int fold;
    double train_threshold;
    std::optional<MetricsReport> report;  // absent when the fold holds a single class
};

struct BenchResult {
    MetricsReport pooled;
    std::vector<FoldResult> folds;
    FoldAssignment assignment;
    std::vector<double> scores;
    std::vector<bool> predicted;
};

/// Scores every sample, assigns subjects to stratified folds, and for each
/// fold applies the F1-optimal threshold of the remaining folds to its
/// samples. Those out-of-fold decisions give the subject-level count
/// agreement; the pooled report ranks all scores together.
inline BenchResult run_benchmark(const std::vector<Sample>& samples, const DatrConfig& cfg, int k = 5,
                                 std::uint64_t seed = 0, const Exec& exec = Exec::from_env()) {
    std::vector<FeatureMap<double>> patches;
    std::vector<bool> labels;
    for (const auto& s : samples) {
        patches.push_back(s.patch);
        labels.push_back(s.spec.kind == LesionKind::RimPositive);
    }
    BenchResult res;
    res.scores = peak_feature_classifier(patches, cfg, exec);
    res.pooled = classify_scores(labels, res.scores);

    std::vector<std::string> order;
    std::map<std::string, int> rim_counts;
    for (const auto& s : samples) {
        auto [it, fresh] = rim_counts.try_emplace(s.subject, 0);
        if (fresh) order.push_back(s.subject);
        if (s.spec.kind == LesionKind::RimPositive) ++it->second;
    }
    std::vector<SubjectRimCount> subjects;
    for (const auto& id : order) subjects.push_back({id, rim_counts[id]});
    res.assignment = stratified_folds(subjects, k, seed);
    std::map<std::string, int> fold_of;
    for (const auto& e : res.assignment.entries) fold_of[e.id] = e.fold;

    res.predicted.assign(samples.size(), false);
    for (int f = 0; f < k; ++f) {
        std::vector<bool> train_labels, test_labels;
        std::vector<double> train_scores, test_scores;
        std::vector<std::size_t> test_index;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (fold_of[samples[i].subject] == f) {
                test_labels.push_back(labels[i]);
                test_scores.push_back(res.scores[i]);
                test_index.push_back(i);
            } else {
                train_labels.push_back(labels[i]);
                train_scores.push_back(res.scores[i]);
            }
        }
        FoldResult fr{f, res.pooled.threshold, std::nullopt};
        const auto pos = std::count(train_labels.begin(), train_labels.end(), true);
        if (pos > 0 && pos < static_cast<long>(train_labels.size()))
            fr.train_threshold = classify_scores(train_labels, train_scores).threshold;
        for (auto i : test_index) res.predicted[i] = res.scores[i] >= fr.train_threshold;
        const auto test_pos = std::count(test_labels.begin(), test_labels.end(), true);
        if (test_pos > 0 && test_pos < static_cast<long>(test_labels.size()))
            fr.report = classify_scores(test_labels, test_scores);
        res.folds.push_back(fr);
    }

    std::vector<LesionPrediction> lesions;
    for (std::size_t i = 0; i < samples.size(); ++i) lesions.push_back({samples[i].subject, labels[i], res.predicted[i]});
    try {
        const auto agreement = subject_counts(lesions);
        res.pooled.pearson_rho = agreement.rho;
        res.pooled.mse = agreement.mse;
    } catch (const undefined_correlation&) {
        // leave rho/mse empty; reported as null
    }
    return res;
}

}  // namespace dirac
