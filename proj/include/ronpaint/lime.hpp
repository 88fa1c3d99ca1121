#pragma once

// Local linear explanations of a binary-fingerprint classifier.
//
// The instance x is perturbed by switching off random subsets of its set bits
// (never switching bits on). Each perturbed vector z is weighted by
// exp(-(h / kernel_width)^2), h being its Hamming distance to x, and a weighted
// ridge regression of f(z) on the active coordinates of z gives the surrogate.
// At most K features are kept: the K largest |w| after a first fit, then refit.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ronpaint/error.hpp"
#include "ronpaint/patterns.hpp"
#include "ronpaint/rng.hpp"

namespace ronpaint {

struct SurrogateConfig {
    std::size_t n_samples = 1000;
    double kernel_width = 0.0;  // 0 selects 0.75 * sqrt(d)
    double ridge_lambda = 1e-3;
    std::size_t max_active_features = 10;
    std::uint64_t seed = 0;

    double resolved_kernel_width(std::size_t d) const {
        return kernel_width > 0.0 ? kernel_width : 0.75 * std::sqrt(static_cast<double>(d));
    }

    bool operator==(const SurrogateConfig&) const = default;
};

struct PerturbedSample {
    std::vector<std::uint8_t> z;
    double proximity = 1.0;
    double prediction = 0.0;
};

struct Explanation {
    FingerprintVector instance;
    std::map<std::size_t, double> weights;  // feature index -> weight
    double intercept = 0.0;
    double loss = 0.0;
    SurrogateConfig config;

    /// Surrogate prediction g(z).
    double evaluate(std::span<const std::uint8_t> z) const {
        double g = intercept;
        for (const auto& [f, w] : weights) g += w * z[f];
        return g;
    }

    bool operator==(const Explanation&) const = default;
};

template <class C>
concept ProbabilisticClassifier = requires(const C& c, std::span<const std::uint8_t> x) {
    { c.predict_proba(x) } -> std::convertible_to<double>;
};

namespace detail {

inline void validate_surrogate_config(const SurrogateConfig& cfg) {
    if (cfg.n_samples == 0) throw InputError("n_samples must be positive");
    if (cfg.max_active_features == 0) throw InputError("the feature budget K must be at least 1");
    if (!(cfg.ridge_lambda >= 0.0) || !std::isfinite(cfg.ridge_lambda)) throw InputError("ridge_lambda must be >= 0");
    if (!(cfg.kernel_width >= 0.0) || !std::isfinite(cfg.kernel_width))
        throw InputError("kernel_width must be positive (or 0 for the default)");
}

// In-place Cholesky solve of A w = b for symmetric positive-definite A (row-major n x n).
inline std::vector<double> cholesky_solve(std::vector<double> A, std::vector<double> b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = A[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= A[j * n + k] * A[j * n + k];
        if (!(diag > 0.0)) throw InputError("surrogate design is singular; use ridge_lambda > 0");
        const double l = std::sqrt(diag);
        A[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = A[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= A[i * n + k] * A[j * n + k];
            A[i * n + j] = v / l;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= A[i * n + k] * b[k];
        b[i] /= A[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= A[k * n + i] * b[k];
        b[i] /= A[i * n + i];
    }
    return b;
}

struct RidgeFit {
    std::vector<double> w;  // aligned with the requested columns
    double intercept = 0.0;
};

// Minimizes sum_i p_i (y_i - b - w.z_i[cols])^2 + lambda |w|^2 with b unpenalized.
inline RidgeFit weighted_ridge(const std::vector<PerturbedSample>& samples, const std::vector<std::size_t>& cols,
                               double lambda) {
    const std::size_t n = cols.size();
    double sw = 0.0;
    for (const auto& s : samples) sw += s.proximity;
    if (!(sw > 0.0)) throw InputError("all sample proximities are zero");

    // Weighted means. The target mean is accumulated relative to the first
    // prediction, so a constant target centers to exactly zero.
    const double y0 = samples.front().prediction;
    double ydev = 0.0;
    std::vector<double> xbar(n, 0.0);
    for (const auto& s : samples) {
        ydev += s.proximity * (s.prediction - y0);
        for (std::size_t j = 0; j < n; ++j) xbar[j] += s.proximity * s.z[cols[j]];
    }
    const double ybar = y0 + ydev / sw;
    for (auto& v : xbar) v /= sw;

    std::vector<double> A(n * n, 0.0), rhs(n, 0.0), xc(n);
    for (const auto& s : samples) {
        const double yc = s.prediction - ybar;
        for (std::size_t j = 0; j < n; ++j) xc[j] = s.z[cols[j]] - xbar[j];
        for (std::size_t j = 0; j < n; ++j) {
            rhs[j] += s.proximity * xc[j] * yc;
            for (std::size_t k = 0; k <= j; ++k) A[j * n + k] += s.proximity * xc[j] * xc[k];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        A[j * n + j] += lambda;
        for (std::size_t k = 0; k < j; ++k) A[k * n + j] = A[j * n + k];
    }

    RidgeFit fit;
    fit.w = n ? cholesky_solve(std::move(A), std::move(rhs), n) : std::vector<double>{};
    fit.intercept = ybar;
    for (std::size_t j = 0; j < n; ++j) fit.intercept -= fit.w[j] * xbar[j];
    return fit;
}

}  // namespace detail

/// Sample 0 is x itself. Every other sample removes k ~ U{1..m} distinct set bits of x.
inline std::vector<PerturbedSample> sample_perturbations(const FingerprintVector& x, const SurrogateConfig& cfg) {
    detail::validate_surrogate_config(cfg);
    const auto active = x.active();
    if (active.empty()) throw InputError("nothing to explain: the molecule matches no pattern");
    const double kw = cfg.resolved_kernel_width(x.size());
    Rng rng(cfg.seed);
    std::vector<PerturbedSample> out;
    out.reserve(cfg.n_samples);
    out.push_back({x.bits, 1.0, 0.0});
    const std::size_t m = active.size();
    for (std::size_t i = 1; i < cfg.n_samples; ++i) {
        const auto k = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(m)));
        PerturbedSample s{x.bits, 0.0, 0.0};
        for (auto j : rng.sample_without_replacement(m, k)) s.z[active[j]] = 0;
        const double h = static_cast<double>(k) / kw;
        s.proximity = std::exp(-h * h);
        out.push_back(std::move(s));
    }
    return out;
}

/// Weighted loss sum p (f(z) - g(z))^2 of `e` over `samples`.
inline double surrogate_loss(const Explanation& e, const std::vector<PerturbedSample>& samples) {
    double loss = 0.0;
    for (const auto& s : samples) {
        const double r = s.prediction - e.evaluate(s.z);
        loss += s.proximity * r * r;
    }
    return loss;
}

inline Explanation fit_surrogate(const std::vector<PerturbedSample>& samples, const FingerprintVector& x,
                                 const SurrogateConfig& cfg) {
    detail::validate_surrogate_config(cfg);
    if (samples.empty()) throw InputError("no perturbed samples to fit");
    for (const auto& s : samples)
        if (s.z.size() != x.size()) throw InputError("perturbed sample length differs from the instance");
    bool distinct = false;
    for (const auto& s : samples) distinct = distinct || s.z != samples.front().z;
    if (!distinct) throw InputError("degenerate design: all perturbed samples are identical");

    const auto active = x.active();
    auto fit = detail::weighted_ridge(samples, active, cfg.ridge_lambda);
    std::vector<std::size_t> kept = active;
    if (active.size() > cfg.max_active_features) {
        std::vector<std::size_t> order(active.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(fit.w[a]) > std::abs(fit.w[b]); });
        order.resize(cfg.max_active_features);
        std::sort(order.begin(), order.end());
        kept.clear();
        for (auto i : order) kept.push_back(active[i]);
        fit = detail::weighted_ridge(samples, kept, cfg.ridge_lambda);
    }

    Explanation e;
    e.instance = x;
    e.config = cfg;
    e.intercept = fit.intercept;
    for (std::size_t j = 0; j < kept.size(); ++j) e.weights[kept[j]] = fit.w[j];
    e.loss = surrogate_loss(e, samples);
    return e;
}

/// Memoized classifier calls; perturbed vectors repeat often when few bits are set.
using PredictionCache = std::map<std::vector<std::uint8_t>, double>;

template <ProbabilisticClassifier C>
Explanation explain(const C& model, const FingerprintVector& x, const SurrogateConfig& cfg,
                    PredictionCache* cache = nullptr) {
    if constexpr (requires { model.pattern_set_id; }) {
        if (x.pattern_set_id != model.pattern_set_id)
            throw InputError("instance was fingerprinted with pattern set " + x.pattern_set_id +
                             " but the model expects " + model.pattern_set_id);
    }
    PredictionCache local;
    PredictionCache& memo = cache ? *cache : local;
    auto samples = sample_perturbations(x, cfg);
    for (auto& s : samples) {
        auto it = memo.find(s.z);
        if (it == memo.end()) it = memo.emplace(s.z, static_cast<double>(model.predict_proba(s.z))).first;
        s.prediction = it->second;
    }
    return fit_surrogate(samples, x, cfg);
}

struct MoleculeWeighting {
    std::map<std::size_t, double> mean_weight_per_feature;  // features selected in at least one replicate
    double molecule_score = 0.0;
    std::size_t B = 0;
    std::vector<std::uint64_t> replicate_seeds;
};

/// Seed of bootstrap replicate r: cfg.seed itself for r = 0, derived otherwise.
inline std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) { return r == 0 ? seed : derive_seed(seed, r); }

/// Averages B explanations with different sampling seeds. A feature missing from
/// a replicate's top-K counts as 0 there. molecule_score is the mean averaged
/// weight over all set bits of x.
template <ProbabilisticClassifier C>
MoleculeWeighting bootstrap_weighting(const C& model, const FingerprintVector& x, const SurrogateConfig& cfg,
                                      std::size_t B = 100) {
    if (B == 0) throw InputError("bootstrap count must be at least 1");
    MoleculeWeighting out;
    out.B = B;
    PredictionCache cache;
    for (std::size_t r = 0; r < B; ++r) {
        SurrogateConfig rc = cfg;
        rc.seed = replicate_seed(cfg.seed, r);
        out.replicate_seeds.push_back(rc.seed);
        const auto e = explain(model, x, rc, &cache);
        for (const auto& [f, w] : e.weights) out.mean_weight_per_feature[f] += w;
    }
    for (auto& [f, w] : out.mean_weight_per_feature) w /= static_cast<double>(B);
    const auto active = x.active();
    double total = 0.0;
    for (auto f : active) {
        auto it = out.mean_weight_per_feature.find(f);
        if (it != out.mean_weight_per_feature.end()) total += it->second;
    }
    out.molecule_score = total / static_cast<double>(active.size());
    return out;
}

// ------------------------------------------------------------------- export

/// Per-feature context for the export; any vector may be empty.
struct FeatureAnnotations {
    std::vector<std::string> pattern_ids;
    std::vector<std::string> pattern_texts;
    std::vector<double> importances;
    std::vector<double> accuracy, precision, recall;
};

inline nlohmann::ordered_json explanation_to_json(const Explanation& e, const FeatureAnnotations& notes) {
    nlohmann::ordered_json j;
    j["pattern_set_id"] = e.instance.pattern_set_id;
    j["instance"] = e.instance.bits;
    auto features = nlohmann::ordered_json::array();
    for (const auto& [f, w] : e.weights) {
        nlohmann::ordered_json row;
        row["index"] = f;
        if (f < notes.pattern_ids.size()) row["pattern_id"] = notes.pattern_ids[f];
        if (f < notes.pattern_texts.size()) row["pattern"] = notes.pattern_texts[f];
        row["weight"] = w;
        if (f < notes.accuracy.size()) row["accuracy"] = notes.accuracy[f];
        if (f < notes.precision.size()) row["precision"] = notes.precision[f];
        if (f < notes.recall.size()) row["recall"] = notes.recall[f];
        if (f < notes.importances.size()) row["importance"] = notes.importances[f];
        features.push_back(std::move(row));
    }
    j["features"] = std::move(features);
    j["intercept"] = e.intercept;
    j["loss"] = e.loss;
    j["config"] = {{"n_samples", e.config.n_samples},
                   {"kernel_width", e.config.resolved_kernel_width(e.instance.size())},
                   {"ridge_lambda", e.config.ridge_lambda},
                   {"max_active_features", e.config.max_active_features},
                   {"seed", e.config.seed}};
    return j;
}

inline nlohmann::ordered_json weighting_to_json(const MoleculeWeighting& mw, const FeatureAnnotations& notes) {
    nlohmann::ordered_json j;
    j["bootstraps"] = mw.B;
    j["molecule_score"] = mw.molecule_score;
    auto features = nlohmann::ordered_json::array();
    for (const auto& [f, w] : mw.mean_weight_per_feature) {
        nlohmann::ordered_json row;
        row["index"] = f;
        if (f < notes.pattern_ids.size()) row["pattern_id"] = notes.pattern_ids[f];
        row["mean_weight"] = w;
        features.push_back(std::move(row));
    }
    j["mean_weights"] = std::move(features);
    j["replicate_seeds"] = mw.replicate_seeds;
    return j;
}

}  // namespace ronpaint
