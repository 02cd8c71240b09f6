#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nlglrt/classifier.hpp"
#include "nlglrt/detector.hpp"
#include "nlglrt/errors.hpp"
#include "nlglrt/sha256.hpp"
#include "nlglrt/signal.hpp"

namespace nlglrt {

enum class IndexLabel : std::uint8_t { negative = 0, positive = 1, excluded = 2 };

// Marks the k + 1 + 2*guard consecutive evaluation indices starting at the
// first index whose anchor time reaches the onset as positive; those are the
// evaluations whose z_new window can contain post-onset samples. On an
// unedited stream this is exactly "anchor original time in
// [T0 - guard, T0 + k + guard]"; on an edited stream the kept-index table has
// already been folded into original_time, so the band stays k + 1 indices
// wide in the edited stream's own clock. `excluded` indices are skipped by
// the ROC sweep.
inline std::vector<IndexLabel> label_indices(const DetectionTrace& tr, std::size_t onset_t0,
                                             std::size_t k, std::size_t guard) {
    if (tr.original_time.empty()) throw EmptyInput("label_indices: empty trace");
    if (onset_t0 > tr.original_time.back())
        throw OnsetOutOfRange("label_indices: onset " + std::to_string(onset_t0) +
                              " is past the last evaluated time " +
                              std::to_string(tr.original_time.back()));
    const std::size_t n = tr.original_time.size();
    std::size_t first = 0;  // first index with anchor time >= onset
    while (first < n && tr.original_time[first] < onset_t0) ++first;
    const std::size_t lo = first >= guard ? first - guard : 0;
    const std::size_t hi = first + k + guard;  // inclusive
    std::vector<IndexLabel> labels(n, IndexLabel::negative);
    for (std::size_t i = lo; i <= hi && i < n; ++i) labels[i] = IndexLabel::positive;
    return labels;
}

struct RocPoint {
    double gamma;
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // non-decreasing FPR from (0,0) to (1,1)
    double auc = 0.0;
};

struct LabeledTrace {
    DetectionTrace trace;
    std::vector<IndexLabel> labels;
};

namespace detail {

inline void collect_scores(const DetectionTrace& trace, const std::vector<IndexLabel>& labels,
                           std::vector<std::pair<double, bool>>& scored) {
    if (trace.stat.size() != labels.size())
        throw DimensionMismatch("roc: trace and labels differ in length");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == IndexLabel::excluded) continue;
        scored.emplace_back(trace.stat[i], labels[i] == IndexLabel::positive);
    }
}

// Threshold sweep over every distinct statistic value; trapezoid AUC.
inline RocCurve roc_from_scores(std::vector<std::pair<double, bool>>& scored) {
    std::size_t pos = 0, neg = 0;
    for (const auto& s : scored) (s.second ? pos : neg) += 1;
    if (pos == 0 || neg == 0)
        throw DegenerateLabels("roc: need at least one positive and one negative index");
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0, auc = 0.0;
    std::size_t i = 0;
    while (i < scored.size()) {
        const double gamma = scored[i].first;
        while (i < scored.size() && scored[i].first == gamma) {
            scored[i].second ? ++tp : ++fp;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        curve.points.push_back({gamma, fpr, tpr});
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.auc = auc;
    return curve;
}

}  // namespace detail

inline RocCurve roc_from_traces(const std::vector<LabeledTrace>& traces) {
    std::vector<std::pair<double, bool>> scored;
    for (const LabeledTrace& lt : traces) detail::collect_scores(lt.trace, lt.labels, scored);
    return detail::roc_from_scores(scored);
}

enum class PipelineMode { linear, nonlinear, nonlinear_dnn, linear_dnn };

inline const char* to_string(PipelineMode m) {
    switch (m) {
        case PipelineMode::linear: return "linear";
        case PipelineMode::nonlinear: return "nonlinear";
        case PipelineMode::nonlinear_dnn: return "nonlinear_dnn";
        case PipelineMode::linear_dnn: return "linear_dnn";
    }
    return "unknown";
}

inline PipelineMode pipeline_mode_from_string(const std::string& s) {
    if (s == "linear") return PipelineMode::linear;
    if (s == "nonlinear") return PipelineMode::nonlinear;
    if (s == "nonlinear_dnn") return PipelineMode::nonlinear_dnn;
    if (s == "linear_dnn") return PipelineMode::linear_dnn;
    throw ConfigError("unknown pipeline mode '" + s +
                      "' (expected linear, nonlinear, nonlinear_dnn or linear_dnn)");
}

inline bool mode_uses_model(PipelineMode m) {
    return m == PipelineMode::nonlinear_dnn || m == PipelineMode::linear_dnn;
}

struct PipelineOptions {
    double diag_relative_loading = 1e-9;  // scaled by mean(diag R_old) per window
    std::size_t guard = 0;
    std::size_t num_threads = 1;
};

struct TrialResult {
    std::uint64_t seed = 0;
    DetectionTrace trace;
    std::vector<IndexLabel> labels;
    std::size_t kept_samples = 0;
    std::size_t peak_original_time = 0;
    double peak_stat = 0.0;
};

struct ExperimentReport {
    PipelineMode mode = PipelineMode::linear;
    std::vector<std::uint64_t> seeds;
    std::vector<TrialResult> trials;   // in seed order
    RocCurve roc;                      // pooled across all trials
    std::string config_digest;
};

inline std::string scene_family_digest(const SceneConfig& cfg, const PipelineOptions& opts) {
    char extra[80];
    std::snprintf(extra, sizeof extra, ";guard=%zu;loading=%.17g", opts.guard,
                  opts.diag_relative_loading);
    return sha256_hex(canonical_family_string(cfg) + extra);
}

// One seed of one mode: synthesize, optionally edit, slide the detector,
// label the evaluation indices.
inline TrialResult run_trial(const SceneConfig& base, const MlpModel* model, PipelineMode mode,
                             std::uint64_t seed, const PipelineOptions& opts) {
    SceneConfig cfg = base;
    cfg.seed = seed;
    const Scene scene = synthesize_scene(cfg);
    const bool from_linear = mode == PipelineMode::linear || mode == PipelineMode::linear_dnn;
    const ComplexMatrix& src = from_linear ? scene.z_linear : scene.z_nonlinear;

    HpdInverseOptions inv_opts;
    inv_opts.diag_relative_loading = opts.diag_relative_loading;

    TrialResult res;
    res.seed = seed;
    if (mode_uses_model(mode)) {
        const EditResult edit = classify_and_edit(src, *model);
        if (edit.edited.cols() < 2 * cfg.window_k)
            throw InsufficientSamples("seed " + std::to_string(seed) + ": " +
                                      std::to_string(edit.edited.cols()) +
                                      " samples left after editing, need " +
                                      std::to_string(2 * cfg.window_k));
        res.kept_samples = edit.edited.cols();
        res.trace = sliding_trace(edit.edited, cfg.window_k, inv_opts);
        remap_original_time(res.trace, edit.kept_indices);
    } else {
        res.kept_samples = cfg.num_samples;
        res.trace = sliding_trace(src, cfg.window_k, inv_opts);
    }
    try {
        res.labels = label_indices(res.trace, cfg.onset_t0, cfg.window_k, opts.guard);
    } catch (const OnsetOutOfRange& e) {
        // editing can delete the whole post-onset segment; that is degenerate
        // data for this trial, same as running out of samples
        throw InsufficientSamples("seed " + std::to_string(seed) +
                                  ": edited stream has no evaluation at or after the onset (" +
                                  e.what() + ")");
    }

    std::size_t argmax = 0;
    for (std::size_t i = 1; i < res.trace.stat.size(); ++i)
        if (res.trace.stat[i] > res.trace.stat[argmax]) argmax = i;
    res.peak_original_time = res.trace.original_time[argmax];
    res.peak_stat = res.trace.stat[argmax];
    return res;
}

// Monte-Carlo run over seeds. Seeds are independent and may fan out to worker
// threads; results are merged in seed order, so the report does not depend on
// the thread count.
inline ExperimentReport run_pipeline(const SceneConfig& base, const MlpModel* model,
                                     PipelineMode mode, const std::vector<std::uint64_t>& seeds,
                                     const PipelineOptions& opts = {}) {
    if (seeds.empty()) throw EmptyInput("run_pipeline: need at least one seed");
    if (mode_uses_model(mode) && model == nullptr)
        throw MissingArtifact(std::string("run_pipeline: mode ") + to_string(mode) +
                              " requires a trained model");
    validate(base);

    ExperimentReport rep;
    rep.mode = mode;
    rep.seeds = seeds;
    rep.config_digest = scene_family_digest(base, opts);
    rep.trials.resize(seeds.size());

    const std::size_t workers =
        std::max<std::size_t>(1, std::min(opts.num_threads, seeds.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i)
            rep.trials[i] = run_trial(base, model, mode, seeds[i], opts);
    } else {
        std::vector<std::exception_ptr> errors(seeds.size());
        std::atomic<std::size_t> next{0};
        auto work = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= seeds.size()) return;
                try {
                    rep.trials[i] = run_trial(base, model, mode, seeds[i], opts);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors)  // first failure in seed order
            if (e) std::rethrow_exception(e);
    }

    std::vector<std::pair<double, bool>> scored;
    for (const TrialResult& trial : rep.trials)
        detail::collect_scores(trial.trace, trial.labels, scored);
    rep.roc = detail::roc_from_scores(scored);
    return rep;
}

}  // namespace nlglrt
