#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nlglrt/complex_matrix.hpp"
#include "nlglrt/errors.hpp"
#include "nlglrt/rng.hpp"

namespace nlglrt {

// [Re z_1 .. Re z_M, Im z_1 .. Im z_M]
inline std::vector<double> stack_sample(const std::vector<cxd>& column) {
    const std::size_t m = column.size();
    std::vector<double> out(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = column[i].real();
        out[m + i] = column[i].imag();
    }
    return out;
}

inline std::vector<cxd> unstack_sample(const std::vector<double>& v) {
    if (v.size() % 2 != 0) throw ShapeMismatch("unstack_sample: odd length");
    const std::size_t m = v.size() / 2;
    std::vector<cxd> column(m);
    for (std::size_t i = 0; i < m; ++i) column[i] = {v[i], v[m + i]};
    return column;
}

inline std::vector<double> stack_column(const ComplexMatrix& z, std::size_t t) {
    const std::size_t m = z.rows();
    std::vector<double> out(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = z(i, t).real();
        out[m + i] = z(i, t).imag();
    }
    return out;
}

// d_t = || z(:,t) - f(z(:,t)) ||_2 per column.
inline std::vector<double> sample_distances(const ComplexMatrix& z_linear,
                                            const ComplexMatrix& z_nonlinear) {
    if (z_linear.rows() != z_nonlinear.rows() || z_linear.cols() != z_nonlinear.cols())
        throw DimensionMismatch("sample_distances: matrices must have identical shape");
    std::vector<double> d(z_linear.cols());
    for (std::size_t t = 0; t < z_linear.cols(); ++t) {
        double acc = 0.0;
        for (std::size_t m = 0; m < z_linear.rows(); ++m)
            acc += std::norm(z_linear(m, t) - z_nonlinear(m, t));
        d[t] = std::sqrt(acc);
    }
    return d;
}

// Nearest-rank (1 - flagged_fraction) quantile of the distances; samples
// strictly above it get flagged, so roughly flagged_fraction of them do.
inline double choose_threshold(const std::vector<double>& distances, double flagged_fraction) {
    if (distances.empty()) throw EmptyInput("choose_threshold: no distances");
    if (!(flagged_fraction > 0.0 && flagged_fraction < 1.0))
        throw InvalidConfig("flagged_fraction must lie in (0, 1)");
    std::vector<double> sorted = distances;
    std::sort(sorted.begin(), sorted.end());
    const double q = 1.0 - flagged_fraction;
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(sorted.size())));
    rank = std::max<std::size_t>(1, std::min(rank, sorted.size()));
    return sorted[rank - 1];
}

// [1,0] when d <= threshold (near-linear), [0,1] otherwise.
inline std::vector<std::array<double, 2>> make_labels(const std::vector<double>& distances,
                                                      double threshold) {
    if (!(threshold >= 0.0)) throw InvalidConfig("make_labels: threshold must be >= 0");
    std::vector<std::array<double, 2>> labels(distances.size());
    for (std::size_t t = 0; t < distances.size(); ++t)
        labels[t] = (distances[t] <= threshold) ? std::array<double, 2>{1.0, 0.0}
                                                : std::array<double, 2>{0.0, 1.0};
    return labels;
}

struct LabeledSampleSet {
    std::vector<std::vector<double>> samples;  // stacked f(z) columns
    std::vector<std::array<double, 2>> labels;
    std::vector<double> distances;
    double threshold = 0.0;
};

// Pairs each nonlinear column with the label derived from its linear twin.
inline LabeledSampleSet build_labeled_set(const ComplexMatrix& z_linear,
                                          const ComplexMatrix& z_nonlinear,
                                          double flagged_fraction) {
    LabeledSampleSet set;
    set.distances = sample_distances(z_linear, z_nonlinear);
    set.threshold = choose_threshold(set.distances, flagged_fraction);
    set.labels = make_labels(set.distances, set.threshold);
    set.samples.reserve(z_nonlinear.cols());
    for (std::size_t t = 0; t < z_nonlinear.cols(); ++t)
        set.samples.push_back(stack_column(z_nonlinear, t));
    return set;
}

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
};

// Hidden tanh layers followed by a 2-unit softmax head. Inputs are centered
// and whitened with training-set statistics stored in the model: the
// interference bulk concentrates in one feature direction, and whitening is
// what brings the faint distortion-sensitive directions up to unit scale so
// the stated training budget can resolve them. feat_whiten is a row-major
// width x width matrix; when empty, per-dimension feat_std scaling is used.
struct MlpModel {
    std::vector<DenseLayer> layers;
    std::vector<double> feat_mean;    // empty = no input transform at all
    std::vector<double> feat_std;
    std::vector<double> feat_whiten;  // row-major, takes precedence over feat_std
    double label_threshold = 0.0;     // d_T the training labels used

    std::size_t input_width() const { return layers.empty() ? 0 : layers.front().in; }

    std::vector<std::size_t> layer_sizes() const {
        std::vector<std::size_t> sizes;
        if (layers.empty()) return sizes;
        sizes.push_back(layers.front().in);
        for (const DenseLayer& l : layers) sizes.push_back(l.out);
        return sizes;
    }
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::size_t max_epochs = 500;
    std::size_t patience = 25;      // epochs without training-loss improvement
    std::size_t hidden_layers = 3;
    std::size_t hidden_units = 10;
    Optimizer optimizer = Optimizer::adam;
    std::uint64_t seed = 7;
};

inline void validate(const TrainConfig& c) {
    if (c.batch_size == 0) throw InvalidConfig("batch_size must be > 0");
    if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate))
        throw InvalidConfig("learning_rate must be finite and >= 0");
    if (c.max_epochs == 0) throw InvalidConfig("max_epochs must be > 0");
    if (c.patience == 0 || c.patience > c.max_epochs)
        throw InvalidConfig("patience must satisfy 1 <= patience <= max_epochs");
    if (c.hidden_layers == 0) throw InvalidConfig("hidden_layers must be > 0");
    if (c.hidden_units == 0) throw InvalidConfig("hidden_units must be > 0");
}

inline const char* to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

inline Optimizer optimizer_from_string(const std::string& s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

namespace detail {

inline void affine(const DenseLayer& l, const std::vector<double>& x, std::vector<double>& out) {
    out.assign(l.out, 0.0);
    for (std::size_t r = 0; r < l.out; ++r) {
        double s = l.b[r];
        const double* wr = l.w.data() + r * l.in;
        for (std::size_t c = 0; c < l.in; ++c) s += wr[c] * x[c];
        out[r] = s;
    }
}

inline std::array<double, 2> softmax2(double a, double b) {
    const double m = std::max(a, b);
    const double ea = std::exp(a - m);
    const double eb = std::exp(b - m);
    const double z = ea + eb;
    return {ea / z, eb / z};
}

inline std::vector<double> normalize_input(const MlpModel& model, const std::vector<double>& x) {
    if (!model.layers.empty() && x.size() != model.layers.front().in)
        throw ShapeMismatch("input width " + std::to_string(x.size()) + " != model width " +
                            std::to_string(model.input_width()));
    if (model.feat_mean.empty()) return x;
    const std::size_t n = x.size();
    if (model.feat_mean.size() != n)
        throw ShapeMismatch("normalization vectors do not match input width");
    if (!model.feat_whiten.empty()) {
        if (model.feat_whiten.size() != n * n)
            throw ShapeMismatch("whitening matrix does not match input width");
        std::vector<double> centered(n), out(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - model.feat_mean[i];
        for (std::size_t r = 0; r < n; ++r) {
            const double* wr = model.feat_whiten.data() + r * n;
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c) s += wr[c] * centered[c];
            out[r] = s;
        }
        return out;
    }
    if (model.feat_std.size() != n)
        throw ShapeMismatch("normalization vectors do not match input width");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - model.feat_mean[i]) / model.feat_std[i];
    return out;
}

// Cyclic Jacobi eigen-decomposition of a dense symmetric matrix (row-major).
// Returns eigenvalues; v receives the eigenvector matrix column-wise
// (v[r*n+c] = component r of eigenvector c).
inline std::vector<double> symmetric_eigen(std::vector<double> a, std::size_t n,
                                           std::vector<double>& v) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p], aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i], aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i * n + p], viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
    return eig;
}

// ZCA whitening transform W = U diag(lambda^-1/2) U^T of the sample
// covariance, with a floor that only guards numerically-zero directions.
inline std::vector<double> whitening_from_samples(const std::vector<std::vector<double>>& samples,
                                                  const std::vector<double>& mean) {
    const std::size_t n = mean.size();
    std::vector<double> cov(n * n, 0.0);
    for (const std::vector<double>& s : samples)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                cov[i * n + j] += (s[i] - mean[i]) * (s[j] - mean[j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            cov[i * n + j] /= static_cast<double>(samples.size());
            cov[j * n + i] = cov[i * n + j];
        }
    std::vector<double> vecs;
    std::vector<double> eig = symmetric_eigen(cov, n, vecs);
    double lam_max = 0.0;
    for (const double l : eig) lam_max = std::max(lam_max, l);
    const double floor = std::max(lam_max, 1.0) * 1e-12;
    std::vector<double> w(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += vecs[r * n + k] * vecs[c * n + k] / std::sqrt(std::max(eig[k], floor));
            w[r * n + c] = s;
        }
    return w;
}

inline void check_layer_chain(const MlpModel& model) {
    if (model.layers.empty()) throw ShapeMismatch("model has no layers");
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const DenseLayer& l = model.layers[i];
        if (l.w.size() != l.in * l.out || l.b.size() != l.out)
            throw ShapeMismatch("layer " + std::to_string(i) + " parameter sizes are inconsistent");
        if (i > 0 && model.layers[i - 1].out != l.in)
            throw ShapeMismatch("layer " + std::to_string(i) + " input does not chain");
    }
    if (model.layers.back().out != 2) throw ShapeMismatch("output layer must have 2 units");
}

}  // namespace detail

// Softmax class probabilities for one stacked sample.
inline std::array<double, 2> mlp_forward(const MlpModel& model, const std::vector<double>& x) {
    detail::check_layer_chain(model);
    std::vector<double> cur = detail::normalize_input(model, x);
    std::vector<double> next;
    for (std::size_t li = 0; li + 1 < model.layers.size(); ++li) {
        detail::affine(model.layers[li], cur, next);
        for (double& v : next) v = std::tanh(v);
        cur.swap(next);
    }
    detail::affine(model.layers.back(), cur, next);
    return detail::softmax2(next[0], next[1]);
}

struct MlpGradient {
    std::vector<DenseLayer> layers;  // same shapes as the model, gradient values
    double loss = 0.0;               // mean over batch and outputs of squared residual
    std::vector<double> sample_loss; // per-sample terms; loss is their mean
};

namespace detail {

// Exact gradient of the batch-mean MSE between softmax output and one-hot
// labels, accumulated sample by sample.
inline MlpGradient mlp_gradient_batch(const MlpModel& model,
                                      const std::vector<const std::vector<double>*>& xs,
                                      const std::vector<const std::array<double, 2>*>& ys) {
    check_layer_chain(model);
    if (xs.empty() || xs.size() != ys.size())
        throw ShapeMismatch("mlp_gradient: batch inputs and labels do not match");

    MlpGradient grad;
    grad.layers.resize(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        grad.layers[i].in = model.layers[i].in;
        grad.layers[i].out = model.layers[i].out;
        grad.layers[i].w.assign(model.layers[i].w.size(), 0.0);
        grad.layers[i].b.assign(model.layers[i].b.size(), 0.0);
    }

    const std::size_t nl = model.layers.size();
    const double inv_b = 1.0 / static_cast<double>(xs.size());
    std::vector<std::vector<double>> act(nl);  // act[0] = normalized input, act[i>0] = tanh outputs
    std::vector<double> logits, delta, delta_prev;

    for (std::size_t b = 0; b < xs.size(); ++b) {
        act[0] = normalize_input(model, *xs[b]);
        for (std::size_t li = 0; li + 1 < nl; ++li) {
            affine(model.layers[li], act[li], logits);
            for (double& v : logits) v = std::tanh(v);
            act[li + 1] = logits;
        }
        affine(model.layers.back(), act[nl - 1], logits);
        const std::array<double, 2> yhat = softmax2(logits[0], logits[1]);
        const std::array<double, 2>& y = *ys[b];

        const double r0 = yhat[0] - y[0];
        const double r1 = yhat[1] - y[1];
        grad.sample_loss.push_back(0.5 * (r0 * r0 + r1 * r1));
        grad.loss += inv_b * grad.sample_loss.back();

        // chain rule through the softmax Jacobian
        const double g0 = r0 * inv_b;
        const double g1 = r1 * inv_b;
        const double dot = g0 * yhat[0] + g1 * yhat[1];
        delta = {yhat[0] * (g0 - dot), yhat[1] * (g1 - dot)};

        for (std::size_t li = nl; li-- > 0;) {
            const DenseLayer& l = model.layers[li];
            DenseLayer& gl = grad.layers[li];
            const std::vector<double>& in = act[li];
            for (std::size_t r = 0; r < l.out; ++r) {
                gl.b[r] += delta[r];
                double* gw = gl.w.data() + r * l.in;
                for (std::size_t c = 0; c < l.in; ++c) gw[c] += delta[r] * in[c];
            }
            if (li > 0) {
                delta_prev.assign(l.in, 0.0);
                for (std::size_t r = 0; r < l.out; ++r) {
                    const double* wr = l.w.data() + r * l.in;
                    for (std::size_t c = 0; c < l.in; ++c) delta_prev[c] += wr[c] * delta[r];
                }
                for (std::size_t c = 0; c < l.in; ++c)
                    delta_prev[c] *= 1.0 - in[c] * in[c];  // through tanh
                delta.swap(delta_prev);
            }
        }
    }
    return grad;
}

}  // namespace detail

inline MlpGradient mlp_gradient(const MlpModel& model,
                                const std::vector<std::vector<double>>& xs,
                                const std::vector<std::array<double, 2>>& ys) {
    std::vector<const std::vector<double>*> xp(xs.size());
    std::vector<const std::array<double, 2>*> yp(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xp[i] = &xs[i];
    for (std::size_t i = 0; i < ys.size(); ++i) yp[i] = &ys[i];
    return detail::mlp_gradient_batch(model, xp, yp);
}

// Fresh model with fan-in-scaled symmetric uniform weights and zero biases.
inline MlpModel make_mlp(std::size_t input_width, std::size_t hidden_layers,
                         std::size_t hidden_units, StreamRng& rng) {
    if (input_width == 0) throw ShapeMismatch("make_mlp: input width must be > 0");
    std::vector<std::size_t> sizes;
    sizes.push_back(input_width);
    for (std::size_t i = 0; i < hidden_layers; ++i) sizes.push_back(hidden_units);
    sizes.push_back(2);

    MlpModel model;
    model.layers.resize(sizes.size() - 1);
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        DenseLayer& l = model.layers[i];
        l.in = sizes[i];
        l.out = sizes[i + 1];
        l.w.resize(l.in * l.out);
        l.b.assign(l.out, 0.0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
        for (double& w : l.w) w = scale * rng.uniform_sym();
    }
    return model;
}

struct TrainResult {
    MlpModel model;                  // parameters at the best recorded training loss
    std::vector<double> epoch_loss;  // one entry per epoch actually run
    bool early_stopped = false;
};

namespace detail {

// Per-parameter first/second moment state for Adam updates.
struct AdamState {
    std::vector<DenseLayer> m;
    std::vector<DenseLayer> v;
    std::size_t step = 0;

    explicit AdamState(const MlpModel& model) {
        m = model.layers;
        v = model.layers;
        for (auto* s : {&m, &v})
            for (DenseLayer& l : *s) {
                std::fill(l.w.begin(), l.w.end(), 0.0);
                std::fill(l.b.begin(), l.b.end(), 0.0);
            }
    }

    void apply(MlpModel& model, const MlpGradient& grad, double lr) {
        static constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t li = 0; li < model.layers.size(); ++li) {
            auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                              std::vector<double>& mw, std::vector<double>& vw) {
                for (std::size_t i = 0; i < w.size(); ++i) {
                    mw[i] = beta1 * mw[i] + (1.0 - beta1) * g[i];
                    vw[i] = beta2 * vw[i] + (1.0 - beta2) * g[i] * g[i];
                    w[i] -= lr * (mw[i] / bc1) / (std::sqrt(vw[i] / bc2) + eps);
                }
            };
            update(model.layers[li].w, grad.layers[li].w, m[li].w, v[li].w);
            update(model.layers[li].b, grad.layers[li].b, m[li].b, v[li].b);
        }
    }
};

}  // namespace detail

// Minibatch descent on the softmax-MSE loss (Adam moment estimation by
// default, plain gradient steps with optimizer = sgd). Epoch order is
// shuffled from a seeded substream; stops at max_epochs or when the training
// loss has not improved for `patience` consecutive epochs. Deterministic
// given the seed.
inline TrainResult mlp_train(const LabeledSampleSet& data, const TrainConfig& cfg) {
    validate(cfg);
    const std::size_t n = data.samples.size();
    if (n != data.labels.size())
        throw ShapeMismatch("mlp_train: samples and labels differ in count");
    if (n < cfg.batch_size)
        throw InsufficientSamples("mlp_train: " + std::to_string(n) +
                                  " samples, need at least batch_size = " +
                                  std::to_string(cfg.batch_size));
    const std::size_t width = data.samples.front().size();

    // per-dimension standardization from the training set
    std::vector<double> mean(width, 0.0), stdev(width, 0.0);
    for (const std::vector<double>& s : data.samples) {
        if (s.size() != width) throw ShapeMismatch("mlp_train: ragged sample widths");
        for (std::size_t i = 0; i < width; ++i) mean[i] += s[i];
    }
    for (double& v : mean) v /= static_cast<double>(n);
    for (const std::vector<double>& s : data.samples)
        for (std::size_t i = 0; i < width; ++i) {
            const double d = s[i] - mean[i];
            stdev[i] += d * d;
        }
    for (double& v : stdev) {
        v = std::sqrt(v / static_cast<double>(n));
        if (!(v > 1e-12)) v = 1.0;  // constant feature
    }

    StreamRng init_rng(cfg.seed, RngStream::weight_init);
    MlpModel model = make_mlp(width, cfg.hidden_layers, cfg.hidden_units, init_rng);
    model.feat_mean = mean;
    model.feat_std = stdev;
    model.feat_whiten = detail::whitening_from_samples(data.samples, mean);
    model.label_threshold = data.threshold;

    StreamRng shuffle_rng(cfg.seed, RngStream::shuffle);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    TrainResult result;
    MlpModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale_epochs = 0;
    std::vector<const std::vector<double>*> xs;
    std::vector<const std::array<double, 2>*> ys;
    detail::AdamState adam(model);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        for (std::size_t i = n; i-- > 1;) {  // Fisher-Yates
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_below(i + 1));
            std::swap(order[i], order[j]);
        }

        // per-sample slots keep the epoch loss independent of the shuffle,
        // so lr = 0 gives exactly repeating losses and a clean early stop
        std::vector<double> slot_loss(n, 0.0);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bsz = std::min(cfg.batch_size, n - start);
            xs.resize(bsz);
            ys.resize(bsz);
            for (std::size_t i = 0; i < bsz; ++i) {
                xs[i] = &data.samples[order[start + i]];
                ys[i] = &data.labels[order[start + i]];
            }
            const MlpGradient grad = detail::mlp_gradient_batch(model, xs, ys);
            for (std::size_t i = 0; i < bsz; ++i)
                slot_loss[order[start + i]] = grad.sample_loss[i];
            if (cfg.optimizer == Optimizer::adam) {
                adam.apply(model, grad, cfg.learning_rate);
            } else {
                for (std::size_t li = 0; li < model.layers.size(); ++li) {
                    DenseLayer& l = model.layers[li];
                    const DenseLayer& gl = grad.layers[li];
                    for (std::size_t i = 0; i < l.w.size(); ++i)
                        l.w[i] -= cfg.learning_rate * gl.w[i];
                    for (std::size_t i = 0; i < l.b.size(); ++i)
                        l.b[i] -= cfg.learning_rate * gl.b[i];
                }
            }
        }
        double loss_sum = 0.0;
        for (const double v : slot_loss) loss_sum += v;
        const double epoch_loss = loss_sum / static_cast<double>(n);
        if (!std::isfinite(epoch_loss))
            throw NonFiniteLoss("mlp_train: training loss became non-finite at epoch " +
                                std::to_string(epoch + 1));
        result.epoch_loss.push_back(epoch_loss);
        if (epoch_loss < best_loss) {
            best_loss = epoch_loss;
            best = model;
            stale_epochs = 0;
        } else if (++stale_epochs >= cfg.patience) {
            result.early_stopped = true;
            break;
        }
    }
    result.model = std::move(best);
    return result;
}

// True when the model calls the sample excessively nonlinear (yhat1 < yhat2;
// ties count as linear).
inline bool predict_flag(const MlpModel& model, const std::vector<double>& x) {
    const std::array<double, 2> yhat = mlp_forward(model, x);
    return yhat[0] < yhat[1];
}

struct EditResult {
    ComplexMatrix edited;                    // kept columns, original order and content
    std::vector<std::size_t> kept_indices;   // strictly increasing original positions
    std::size_t flagged_count = 0;
};

// Deletes the columns the model flags; kept columns are copied bit-identically.
inline EditResult classify_and_edit(const ComplexMatrix& z, const MlpModel& model) {
    if (model.input_width() != 2 * z.rows())
        throw ShapeMismatch("classify_and_edit: model width " +
                            std::to_string(model.input_width()) + " != 2M = " +
                            std::to_string(2 * z.rows()));
    EditResult res;
    res.kept_indices.reserve(z.cols());
    for (std::size_t t = 0; t < z.cols(); ++t)
        if (!predict_flag(model, stack_column(z, t))) res.kept_indices.push_back(t);
    res.flagged_count = z.cols() - res.kept_indices.size();
    res.edited = ComplexMatrix(z.rows(), res.kept_indices.size());
    for (std::size_t j = 0; j < res.kept_indices.size(); ++j)
        for (std::size_t m = 0; m < z.rows(); ++m)
            res.edited(m, j) = z(m, res.kept_indices[j]);
    return res;
}

// Mean of the per-class hit rates of the flag decision against reference labels.
inline double balanced_accuracy(const MlpModel& model,
                                const std::vector<std::vector<double>>& samples,
                                const std::vector<std::array<double, 2>>& labels) {
    if (samples.size() != labels.size() || samples.empty())
        throw ShapeMismatch("balanced_accuracy: samples and labels do not match");
    std::size_t hit[2] = {0, 0}, total[2] = {0, 0};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const bool truth_flagged = labels[i][1] > labels[i][0];
        const bool pred_flagged = predict_flag(model, samples[i]);
        ++total[truth_flagged ? 1 : 0];
        if (pred_flagged == truth_flagged) ++hit[truth_flagged ? 1 : 0];
    }
    if (total[0] == 0 || total[1] == 0)
        throw DegenerateLabels("balanced_accuracy: need both classes present");
    return 0.5 * (static_cast<double>(hit[0]) / static_cast<double>(total[0]) +
                  static_cast<double>(hit[1]) / static_cast<double>(total[1]));
}

}  // namespace nlglrt
