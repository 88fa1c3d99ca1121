#pragma once

// Random forest over binary fingerprints.
//
// Trees split on a single bit (0-branch left, 1-branch right) and are grown on
// bootstrap resamples until pure. A tree votes 1 when its leaf holds more high
// than low samples, 0 for the reverse and 0.5 on a tie; the forest probability
// is the mean vote. Tree t draws from the stream derive_seed(master_seed, t),
// so the thread count never changes the model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ronpaint/dataset.hpp"
#include "ronpaint/error.hpp"
#include "ronpaint/rng.hpp"
#include "ronpaint/stats.hpp"

namespace ronpaint {

struct ForestConfig {
    std::size_t n_trees = 500;
    std::size_t max_features = 0;  // 0 selects ceil(sqrt(d))
    std::size_t min_leaf = 1;
    std::uint64_t master_seed = 0;
    std::size_t n_threads = 1;  // does not affect the result

    std::size_t resolved_max_features(std::size_t d) const {
        return max_features ? max_features : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    }

    bool operator==(const ForestConfig&) const = default;
};

/// Flattened binary tree. Node i is a leaf when feature[i] < 0.
struct DecisionTree {
    std::vector<std::int32_t> feature;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> right;
    std::vector<std::uint32_t> low;
    std::vector<std::uint32_t> high;

    std::size_t size() const noexcept { return feature.size(); }

    std::size_t add_leaf(std::uint32_t n_low, std::uint32_t n_high) {
        feature.push_back(-1);
        left.push_back(-1);
        right.push_back(-1);
        low.push_back(n_low);
        high.push_back(n_high);
        return feature.size() - 1;
    }

    std::size_t leaf_for(std::span<const std::uint8_t> x) const {
        std::size_t node = 0;
        while (feature[node] >= 0) node = static_cast<std::size_t>(x[feature[node]] ? right[node] : left[node]);
        return node;
    }

    double vote(std::span<const std::uint8_t> x) const {
        const auto leaf = leaf_for(x);
        if (high[leaf] > low[leaf]) return 1.0;
        if (high[leaf] < low[leaf]) return 0.0;
        return 0.5;
    }

    bool operator==(const DecisionTree&) const = default;
};

/// A fingerprint bit scored as a direct predictor of the high class on the training rows.
struct FeatureScore {
    double accuracy = 0.0, precision = 0.0, recall = 0.0;
    bool operator==(const FeatureScore&) const = default;
};

class ForestModel {
public:
    ForestConfig config;
    std::string pattern_set_id;
    std::size_t n_features = 0;
    std::vector<DecisionTree> trees;
    std::vector<double> importances;
    std::vector<FeatureScore> feature_scores;

    double predict_proba(std::span<const std::uint8_t> x) const {
        if (x.size() != n_features)
            throw InputError("fingerprint has " + std::to_string(x.size()) + " bits, model expects " +
                             std::to_string(n_features));
        if (trees.empty()) throw InvariantError("forest has no trees");
        double votes = 0.0;
        for (const auto& t : trees) votes += t.vote(x);
        return votes / static_cast<double>(trees.size());
    }

    double predict_proba(const FingerprintVector& x) const {
        if (x.pattern_set_id != pattern_set_id)
            throw InputError("fingerprint pattern set '" + x.pattern_set_id + "' does not match model's '" +
                             pattern_set_id + "'");
        return predict_proba(std::span<const std::uint8_t>(x.bits));
    }

    bool operator==(const ForestModel&) const = default;
};

namespace detail {

inline double gini(double n_low, double n_high) {
    const double n = n_low + n_high;
    if (n <= 0.0) return 0.0;
    const double p = n_high / n;
    return 2.0 * p * (1.0 - p);
}

// Weighted child Gini of a split, up to the positive factor 2 / n_node:
//   a*b/n0 + c*d/n1 = (a*b*n1 + c*d*n0) / (n0*n1)
// kept as an exact fraction so ties are detected exactly.
struct SplitScore {
    unsigned __int128 num = 0;
    unsigned __int128 den = 1;

    friend bool operator<(const SplitScore& x, const SplitScore& y) { return x.num * y.den < y.num * x.den; }
    friend bool operator==(const SplitScore& x, const SplitScore& y) { return x.num * y.den == y.num * x.den; }
};

inline SplitScore split_score(const std::uint32_t (&c)[4]) {
    using u = unsigned __int128;
    const u n0 = c[0] + c[1], n1 = c[2] + c[3];
    return {u(c[0]) * c[1] * n1 + u(c[2]) * c[3] * n0, n0 * n1};
}

struct TrainingView {
    const std::vector<std::vector<std::uint8_t>>* bits;
    const std::vector<std::uint8_t>* labels;
};

// Grows one tree on `sample` (row indices, with repetition). Adds the tree's
// unnormalized importances into `importance`.
inline DecisionTree grow_tree(const TrainingView& view, std::vector<std::size_t> sample, const ForestConfig& cfg,
                              std::size_t d, Rng& rng, std::vector<double>& importance) {
    const auto& X = *view.bits;
    const auto& y = *view.labels;
    const std::size_t max_features = cfg.resolved_max_features(d);
    const double n_root = static_cast<double>(sample.size());

    DecisionTree tree;
    struct Pending {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    auto counts = [&](const std::vector<std::size_t>& rows) {
        std::uint32_t hi = 0;
        for (auto r : rows) hi += y[r];
        return std::pair<std::uint32_t, std::uint32_t>{static_cast<std::uint32_t>(rows.size()) - hi, hi};
    };

    {
        auto [lo, hi] = counts(sample);
        tree.add_leaf(lo, hi);
    }
    std::vector<Pending> stack;
    stack.push_back({0, std::move(sample)});
    std::vector<std::size_t> order(d);

    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        const double n_lo = tree.low[job.node], n_hi = tree.high[job.node];
        if (n_lo == 0 || n_hi == 0) continue;
        if (job.rows.size() < 2 * cfg.min_leaf) continue;

        for (std::size_t f = 0; f < d; ++f) order[f] = f;
        std::size_t visited = 0;
        std::size_t remaining = d;
        int best_feature = -1;
        SplitScore best_score;
        std::uint32_t best_counts[4] = {0, 0, 0, 0};
        // Visit features in random order until max_features of them vary in this node.
        while (visited < max_features && remaining > 0) {
            const std::size_t pick = static_cast<std::size_t>(rng.below(remaining));
            const std::size_t f = order[pick];
            std::swap(order[pick], order[remaining - 1]);
            --remaining;
            std::uint32_t c[4] = {0, 0, 0, 0};  // (bit, label) -> count
            for (auto r : job.rows) ++c[2 * X[r][f] + y[r]];
            const std::uint32_t n0 = c[0] + c[1], n1 = c[2] + c[3];
            if (n0 == 0 || n1 == 0) continue;
            ++visited;
            if (n0 < cfg.min_leaf || n1 < cfg.min_leaf) continue;
            const SplitScore score = split_score(c);
            if (best_feature < 0 || score < best_score || (score == best_score && static_cast<int>(f) < best_feature)) {
                best_feature = static_cast<int>(f);
                best_score = score;
                std::copy(std::begin(c), std::end(c), best_counts);
            }
        }
        if (best_feature < 0) continue;

        const double n_node = static_cast<double>(job.rows.size());
        const auto& c = best_counts;
        const double n0 = c[0] + c[1], n1 = c[2] + c[3];
        const double child = (n0 * gini(c[0], c[1]) + n1 * gini(c[2], c[3])) / n_node;
        importance[best_feature] += (n_node / n_root) * (gini(n_lo, n_hi) - child);

        std::vector<std::size_t> rows0, rows1;
        for (auto r : job.rows) (X[r][best_feature] ? rows1 : rows0).push_back(r);
        const auto l = tree.add_leaf(best_counts[0], best_counts[1]);
        const auto rgt = tree.add_leaf(best_counts[2], best_counts[3]);
        tree.feature[job.node] = best_feature;
        tree.left[job.node] = static_cast<std::int32_t>(l);
        tree.right[job.node] = static_cast<std::int32_t>(rgt);
        // Right pushed first so the left subtree is expanded first.
        stack.push_back({rgt, std::move(rows1)});
        stack.push_back({l, std::move(rows0)});
    }
    return tree;
}

inline std::vector<std::vector<std::uint8_t>> bit_matrix(const Dataset& data) {
    std::vector<std::vector<std::uint8_t>> X;
    X.reserve(data.size());
    for (const auto& r : data.rows()) X.push_back(r.fingerprint.bits);
    return X;
}

}  // namespace detail

/// Draw stream of tree `t`: its bootstrap sample comes first, then its feature choices.
inline std::uint64_t tree_seed(std::uint64_t master_seed, std::size_t t) { return derive_seed(master_seed, t); }

inline ForestModel train_forest(const Dataset& data, const ForestConfig& cfg) {
    const std::size_t d = data.n_features();
    if (data.size() < 2) throw InputError("training needs at least 2 rows");
    if (data.count(RonClass::high) == 0 || data.count(RonClass::low) == 0)
        throw InputError("training data contains a single class; both high and low rows are required");
    if (d == 0) throw InputError("fingerprints have no features");
    if (cfg.n_trees == 0) throw InputError("n_trees must be positive");
    if (cfg.min_leaf == 0) throw InputError("min_leaf must be positive");
    if (cfg.resolved_max_features(d) > d)
        throw InputError("max_features (" + std::to_string(cfg.max_features) + ") exceeds feature count " +
                         std::to_string(d));

    const auto X = detail::bit_matrix(data);
    const auto y = data.labels();
    const detail::TrainingView view{&X, &y};

    ForestModel model;
    model.config = cfg;
    model.config.max_features = cfg.resolved_max_features(d);
    model.config.n_threads = 1;
    model.pattern_set_id = data.pattern_set_id();
    model.n_features = d;
    model.trees.resize(cfg.n_trees);
    std::vector<std::vector<double>> per_tree(cfg.n_trees, std::vector<double>(d, 0.0));

    auto build = [&](std::size_t t) {
        Rng rng(tree_seed(cfg.master_seed, t));
        std::vector<std::size_t> sample(data.size());
        for (auto& r : sample) r = static_cast<std::size_t>(rng.below(data.size()));
        model.trees[t] = detail::grow_tree(view, std::move(sample), cfg, d, rng, per_tree[t]);
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.n_threads, cfg.n_trees));
    if (threads == 1) {
        for (std::size_t t = 0; t < cfg.n_trees; ++t) build(t);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < cfg.n_trees; t += threads) build(t);
            });
        for (auto& th : pool) th.join();
    }

    // Summed in tree order so the result is independent of scheduling.
    model.importances.assign(d, 0.0);
    for (const auto& imp : per_tree)
        for (std::size_t f = 0; f < d; ++f) model.importances[f] += imp[f];
    double total = 0.0;
    for (auto& v : model.importances) {
        v /= static_cast<double>(cfg.n_trees);
        total += v;
    }
    if (total > 0.0)
        for (auto& v : model.importances) v /= total;
    for (const auto& m : stats::per_feature_metrics(data).per_feature)
        model.feature_scores.push_back({m.accuracy, m.precision, m.recall});
    return model;
}

/// Out-of-bag accuracy at threshold 0.5. Rows in every bootstrap sample are skipped.
inline double oob_score(const ForestModel& model, const Dataset& data) {
    if (model.n_features != data.n_features()) throw InputError("dataset does not match model");
    const std::size_t n = data.size();
    std::vector<double> votes(n, 0.0);
    std::vector<std::size_t> voters(n, 0);
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        Rng rng(tree_seed(model.config.master_seed, t));
        std::vector<std::uint8_t> in_bag(n, 0);
        for (std::size_t i = 0; i < n; ++i) in_bag[rng.below(n)] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_bag[i]) continue;
            votes[i] += model.trees[t].vote(data.row(i).fingerprint.bits);
            ++voters[i];
        }
    }
    std::size_t scored = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!voters[i]) continue;
        ++scored;
        const bool high = votes[i] / static_cast<double>(voters[i]) >= 0.5;
        correct += high == (data.row(i).label == RonClass::high);
    }
    if (!scored) throw InputError("no out-of-bag rows; use more trees");
    return static_cast<double>(correct) / static_cast<double>(scored);
}

// ---------------------------------------------------------------- persistence

inline constexpr int kModelSchemaVersion = 1;

inline nlohmann::ordered_json model_to_json(const ForestModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "ronpaint-forest";
    j["schema_version"] = kModelSchemaVersion;
    j["pattern_set_id"] = m.pattern_set_id;
    j["n_features"] = m.n_features;
    j["config"] = {{"n_trees", m.config.n_trees},
                   {"max_features", m.config.resolved_max_features(m.n_features)},
                   {"min_leaf", m.config.min_leaf},
                   {"master_seed", m.config.master_seed}};
    j["importances"] = m.importances;
    auto scores = nlohmann::ordered_json::array();
    for (const auto& f : m.feature_scores)
        scores.push_back({{"accuracy", f.accuracy}, {"precision", f.precision}, {"recall", f.recall}});
    j["feature_scores"] = std::move(scores);
    auto trees = nlohmann::ordered_json::array();
    for (const auto& t : m.trees)
        trees.push_back(
            {{"feature", t.feature}, {"left", t.left}, {"right", t.right}, {"low", t.low}, {"high", t.high}});
    j["trees"] = std::move(trees);
    return j;
}

inline ForestModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", "") != "ronpaint-forest") throw InputError("not a ronpaint forest model");
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw InputError("unsupported model schema_version " + std::to_string(version));
        ForestModel m;
        m.pattern_set_id = j.at("pattern_set_id").get<std::string>();
        m.n_features = j.at("n_features").get<std::size_t>();
        const auto& c = j.at("config");
        m.config.n_trees = c.at("n_trees").get<std::size_t>();
        m.config.max_features = c.at("max_features").get<std::size_t>();
        m.config.min_leaf = c.at("min_leaf").get<std::size_t>();
        m.config.master_seed = c.at("master_seed").get<std::uint64_t>();
        m.importances = j.at("importances").get<std::vector<double>>();
        for (const auto& f : j.at("feature_scores"))
            m.feature_scores.push_back(
                {f.at("accuracy").get<double>(), f.at("precision").get<double>(), f.at("recall").get<double>()});
        for (const auto& t : j.at("trees")) {
            DecisionTree tree;
            tree.feature = t.at("feature").get<std::vector<std::int32_t>>();
            tree.left = t.at("left").get<std::vector<std::int32_t>>();
            tree.right = t.at("right").get<std::vector<std::int32_t>>();
            tree.low = t.at("low").get<std::vector<std::uint32_t>>();
            tree.high = t.at("high").get<std::vector<std::uint32_t>>();
            m.trees.push_back(std::move(tree));
        }
        if (m.importances.size() != m.n_features) throw InputError("importance vector has wrong length");
        if (m.feature_scores.size() != m.n_features) throw InputError("feature score list has wrong length");
        if (m.trees.size() != m.config.n_trees) throw InputError("tree count disagrees with config");
        for (const auto& t : m.trees) {
            const std::size_t n = t.size();
            if (n == 0 || t.left.size() != n || t.right.size() != n || t.low.size() != n || t.high.size() != n)
                throw InputError("malformed tree arrays");
            for (std::size_t i = 0; i < n; ++i) {
                if (t.feature[i] < 0) continue;
                if (static_cast<std::size_t>(t.feature[i]) >= m.n_features) throw InputError("split feature out of range");
                // Children always follow their parent, which rules out cycles.
                for (auto child : {t.left[i], t.right[i]})
                    if (child <= static_cast<std::int32_t>(i) || static_cast<std::size_t>(child) >= n)
                        throw InputError("malformed tree child index");
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
}

inline std::string serialize_model(const ForestModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline void save_model(const ForestModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write model file '" + path + "'");
    out << serialize_model(m);
    if (!out) throw InputError("failed writing model file '" + path + "'");
}

/// Loads a model; a non-empty `expected_pattern_set_id` must match the stored one.
inline ForestModel load_model(const std::string& path, const std::string& expected_pattern_set_id = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("model file '" + path + "' is not valid JSON: " + e.what());
    }
    auto m = model_from_json(j);
    if (!expected_pattern_set_id.empty() && m.pattern_set_id != expected_pattern_set_id)
        throw InputError("model was trained with pattern set " + m.pattern_set_id + " but the patterns file is " +
                         expected_pattern_set_id);
    return m;
}

// ----------------------------------------------------------------- evaluation

struct EvaluationSummary {
    std::vector<double> accuracy, precision, recall, roc_auc;
    stats::MeanStd accuracy_stats, precision_stats, recall_stats, roc_auc_stats;
    std::size_t holdout_size = 0;
};

inline constexpr std::size_t kSplitRetryCap = 1000;

/// Repeated random holdout. Each round holds out floor(n * holdout_fraction)
/// rows, trains on the rest and scores the holdout with positive class = high.
inline EvaluationSummary leave_out_evaluation(const Dataset& data, const ForestConfig& cfg, std::size_t rounds = 100,
                                              double holdout_fraction = 0.5, double threshold = 0.5) {
    if (rounds == 0) throw InputError("rounds must be at least 1");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw InputError("holdout fraction must lie in (0, 1)");
    const std::size_t n = data.size();
    const auto n_hold = static_cast<std::size_t>(std::floor(static_cast<double>(n) * holdout_fraction));
    if (n_hold < 2 || n - n_hold < 2)
        throw InputError("dataset of " + std::to_string(n) + " rows is too small for a " +
                         std::to_string(holdout_fraction) + " holdout");

    const auto labels = data.labels();
    EvaluationSummary out;
    out.holdout_size = n_hold;
    Rng split_rng(derive_seed(cfg.master_seed, 0xE7A1ULL));
    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<std::size_t> idx(n);
        bool ok = false;
        for (std::size_t attempt = 0; attempt < kSplitRetryCap && !ok; ++attempt) {
            for (std::size_t i = 0; i < n; ++i) idx[i] = i;
            split_rng.shuffle(idx);
            std::size_t hold_hi = 0, train_hi = 0;
            for (std::size_t i = 0; i < n; ++i) (i < n_hold ? hold_hi : train_hi) += labels[idx[i]];
            ok = hold_hi > 0 && hold_hi < n_hold && train_hi > 0 && train_hi < n - n_hold;
        }
        if (!ok)
            throw InputError("could not draw a split with both classes on each side after " +
                             std::to_string(kSplitRetryCap) + " attempts");
        std::vector<std::size_t> hold(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_hold));
        std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_hold), idx.end());
        std::sort(hold.begin(), hold.end());
        std::sort(train.begin(), train.end());

        ForestConfig round_cfg = cfg;
        round_cfg.master_seed = derive_seed(cfg.master_seed, 0x10000ULL + r);
        const auto model = train_forest(data.subset(train), round_cfg);

        std::vector<double> scores;
        std::vector<std::uint8_t> predicted, actual;
        for (auto i : hold) {
            const double p = model.predict_proba(std::span<const std::uint8_t>(data.row(i).fingerprint.bits));
            scores.push_back(p);
            predicted.push_back(p >= threshold);
            actual.push_back(labels[i]);
        }
        const auto m = stats::binary_metrics(predicted, actual);
        out.accuracy.push_back(m.accuracy);
        out.precision.push_back(m.precision);
        out.recall.push_back(m.recall);
        out.roc_auc.push_back(stats::roc_auc(scores, actual));
    }
    out.accuracy_stats = stats::mean_std(out.accuracy);
    out.precision_stats = stats::mean_std(out.precision);
    out.recall_stats = stats::mean_std(out.recall);
    out.roc_auc_stats = stats::mean_std(out.roc_auc);
    return out;
}

/// Four-line report, e.g. "accuracy: 83.41% (+/- 3.61)".
inline std::string format_evaluation(const EvaluationSummary& s) {
    return "accuracy: " + stats::format_percent(s.accuracy_stats) + "\n" +
           "precision: " + stats::format_percent(s.precision_stats) + "\n" +
           "recall: " + stats::format_percent(s.recall_stats) + "\n" +
           "roc_auc: " + stats::format_plain(s.roc_auc_stats) + "\n";
}

}  // namespace ronpaint
