#pragma once

// Command-line front end: train, evaluate, explain, validate.
//
// Exit codes: 0 success, 1 input error, 2 internal invariant violation.
// Every file written gets a `<file>.manifest.json` beside it recording the
// command line, resolved configuration, seeds, input digests and tool version.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ronpaint/dataset.hpp"
#include "ronpaint/digest.hpp"
#include "ronpaint/error.hpp"
#include "ronpaint/forest.hpp"
#include "ronpaint/lime.hpp"
#include "ronpaint/painting.hpp"
#include "ronpaint/stats.hpp"

#ifndef RONPAINT_VERSION
#define RONPAINT_VERSION "unknown"
#endif

namespace ronpaint::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInternal = 2;

struct Options {
    std::string data, patterns, model, out, paint, smiles;
    std::size_t trees = 500;
    std::uint64_t seed = 1;
    std::size_t rounds = 100;
    double holdout = 0.5;
    std::size_t samples = 1000;
    std::size_t bootstraps = 0;
    double kernel_width = 0.0;
    double ridge = 1e-3;
    std::size_t top_k = 10;
};

/// Provenance record written beside an output file.
struct RunManifest {
    std::vector<std::string> argv;
    std::string command;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)

    nlohmann::ordered_json to_json(const std::string& output_path, const std::string& output_digest) const {
        nlohmann::ordered_json j;
        j["format"] = "ronpaint-manifest";
        j["tool_version"] = RONPAINT_VERSION;
        j["command"] = command;
        j["argv"] = argv;
        j["config"] = config;
        j["seeds"] = seeds;
        auto in = nlohmann::ordered_json::array();
        for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"digest", digest}});
        j["inputs"] = std::move(in);
        j["output"] = {{"path", output_path}, {"digest", output_digest}};
        return j;
    }
};

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << content;
    if (!f) throw InputError("write to '" + path + "' failed");
}

/// Writes the output and its manifest.
inline void emit(const std::string& path, const std::string& content, const RunManifest& manifest) {
    write_file(path, content);
    const auto digest = "fnv1a64:" + hex64(fnv1a64(content));
    write_file(path + ".manifest.json", manifest.to_json(path, digest).dump(1) + "\n");
}

inline std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

inline ForestConfig forest_config(const Options& o) {
    ForestConfig cfg;
    cfg.n_trees = o.trees;
    cfg.master_seed = o.seed;
    cfg.n_threads = worker_count();
    return cfg;
}

inline SurrogateConfig surrogate_config(const Options& o) {
    SurrogateConfig cfg;
    cfg.n_samples = o.samples;
    cfg.kernel_width = o.kernel_width;
    cfg.ridge_lambda = o.ridge;
    cfg.max_active_features = o.top_k;
    cfg.seed = o.seed;
    return cfg;
}

inline nlohmann::ordered_json forest_config_json(const ForestConfig& c, std::size_t d) {
    return {{"n_trees", c.n_trees},
            {"max_features", c.resolved_max_features(d)},
            {"min_leaf", c.min_leaf},
            {"master_seed", c.master_seed}};
}

inline nlohmann::ordered_json surrogate_config_json(const SurrogateConfig& c, std::size_t d) {
    return {{"n_samples", c.n_samples},
            {"kernel_width", c.resolved_kernel_width(d)},
            {"ridge_lambda", c.ridge_lambda},
            {"max_active_features", c.max_active_features},
            {"seed", c.seed}};
}

inline RunManifest manifest_for(const std::vector<std::string>& argv, const std::string& command) {
    RunManifest m;
    m.argv = argv;
    m.command = command;
    return m;
}

inline FeatureAnnotations annotations(const ForestModel& model, const PatternSet& patterns) {
    FeatureAnnotations notes;
    for (const auto& p : patterns.patterns) {
        notes.pattern_ids.push_back(p.id);
        notes.pattern_texts.push_back(p.source_text);
    }
    notes.importances = model.importances;
    for (const auto& s : model.feature_scores) {
        notes.accuracy.push_back(s.accuracy);
        notes.precision.push_back(s.precision);
        notes.recall.push_back(s.recall);
    }
    return notes;
}

/// Loads a model and checks it was trained on this pattern file.
inline ForestModel load_matching_model(const std::string& model_path, const PatternSet& patterns) {
    auto model = load_model(model_path);
    if (model.pattern_set_id != patterns.id)
        throw InputError("model '" + model_path + "' was trained with pattern set " + model.pattern_set_id +
                         " but the patterns file has id " + patterns.id);
    return model;
}

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string format_rho(const stats::RankCorrelation& r) {
    return "rho = " + fixed(r.rho, 3) + " (" + stats::format_p(r.p_value) + ")";
}

}  // namespace detail

// ------------------------------------------------------------------ commands

inline int cmd_train(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto patterns = load_pattern_set(o.patterns);
    const auto data = load_dataset(o.data, patterns);
    const auto cfg = detail::forest_config(o);
    const auto model = train_forest(data, cfg);

    auto manifest = detail::manifest_for(argv, "train");
    manifest.config = detail::forest_config_json(cfg, data.n_features());
    manifest.config["pattern_set_id"] = patterns.id;
    manifest.seeds["master_seed"] = cfg.master_seed;
    manifest.inputs = {{o.data, file_digest(o.data)}, {o.patterns, file_digest(o.patterns)}};
    detail::emit(o.model, serialize_model(model), manifest);

    out << "trained " << cfg.n_trees << " trees on " << data.size() << " molecules (" << data.count(RonClass::high)
        << " high, " << data.count(RonClass::low) << " low), " << data.n_features() << " features\n";
    out << "top features by importance:\n";
    std::vector<std::size_t> order(model.n_features);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return model.importances[a] > model.importances[b]; });
    for (std::size_t r = 0; r < std::min<std::size_t>(10, order.size()); ++r) {
        const auto& p = patterns.patterns[order[r]];
        char line[256];
        std::snprintf(line, sizeof line, "%2zu  %.4f  %-20s %s\n", r + 1, model.importances[order[r]], p.id.c_str(),
                      p.source_text.c_str());
        out << line;
    }
    out << "model written to " << o.model << "\n";
    return kExitOk;
}

inline int cmd_evaluate(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto patterns = load_pattern_set(o.patterns);
    const auto data = load_dataset(o.data, patterns);
    const auto cfg = detail::forest_config(o);
    const auto summary = leave_out_evaluation(data, cfg, o.rounds, o.holdout);
    const auto report = format_evaluation(summary);
    out << report;
    if (!o.out.empty()) {
        auto manifest = detail::manifest_for(argv, "evaluate");
        manifest.config = detail::forest_config_json(cfg, data.n_features());
        manifest.config["rounds"] = o.rounds;
        manifest.config["holdout"] = o.holdout;
        manifest.config["holdout_size"] = summary.holdout_size;
        manifest.config["threshold"] = 0.5;
        manifest.seeds["master_seed"] = cfg.master_seed;
        manifest.inputs = {{o.data, file_digest(o.data)}, {o.patterns, file_digest(o.patterns)}};
        detail::emit(o.out, report, manifest);
    }
    return kExitOk;
}

namespace detail {

struct ExplainedMolecule {
    std::string name;
    Molecule mol;
    FingerprintVector fp;
    double probability = 0.0;
    Explanation explanation;
    nlohmann::ordered_json doc;
};

inline ExplainedMolecule explain_one(const std::string& name, const std::string& smiles, const ForestModel& model,
                                     const PatternSet& patterns, const FeatureAnnotations& notes,
                                     const SurrogateConfig& cfg, std::size_t bootstraps) {
    ExplainedMolecule m{name, parse_smiles(smiles), {}, 0.0, {}, {}};
    m.fp = compute_fingerprint(m.mol, patterns);
    if (m.fp.count() == 0) throw InputError("'" + smiles + "' matches none of the patterns: nothing to explain");
    m.probability = model.predict_proba(m.fp);
    PredictionCache cache;
    m.explanation = explain(model, m.fp, cfg, &cache);
    if (!name.empty()) m.doc["name"] = name;
    m.doc["smiles"] = smiles;
    m.doc["probability_high"] = m.probability;
    m.doc["explanation"] = explanation_to_json(m.explanation, notes);
    if (bootstraps > 0) m.doc["bootstrap"] = weighting_to_json(bootstrap_weighting(model, m.fp, cfg, bootstraps), notes);
    return m;
}

}  // namespace detail

/// Explains one SMILES, or every SMILES of a file given as `@path`.
inline int cmd_explain(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto patterns = load_pattern_set(o.patterns);
    const auto model = detail::load_matching_model(o.model, patterns);
    const auto cfg = detail::surrogate_config(o);
    const auto notes = detail::annotations(model, patterns);
    const bool from_file = !o.smiles.empty() && o.smiles.front() == '@';

    std::vector<detail::ExplainedMolecule> items;
    if (from_file) {
        const auto records = read_smiles_file(o.smiles.substr(1));
        if (records.empty()) throw InputError("no SMILES in '" + o.smiles.substr(1) + "'");
        std::vector<std::string> problems;
        for (const auto& r : records) {
            try {
                items.push_back(detail::explain_one(r.name, r.smiles, model, patterns, notes, cfg, o.bootstraps));
            } catch (const InputError& e) {
                problems.push_back("line " + std::to_string(r.line) + ": " + e.what());
            }
        }
        if (!problems.empty()) {
            std::string msg = "could not explain " + std::to_string(problems.size()) + " molecule(s):";
            for (const auto& p : problems) msg += "\n  " + p;
            throw InputError(msg);
        }
    } else {
        items.push_back(detail::explain_one("", o.smiles, model, patterns, notes, cfg, o.bootstraps));
    }

    nlohmann::ordered_json doc;
    const auto model_digest = file_digest(o.model);
    if (from_file) {
        doc["format"] = "ronpaint-explanation-set";
        doc["schema_version"] = 1;
        doc["model_digest"] = model_digest;
        doc["explanations"] = nlohmann::ordered_json::array();
        for (auto& m : items) doc["explanations"].push_back(std::move(m.doc));
    } else {
        doc["format"] = "ronpaint-explanation";
        doc["schema_version"] = 1;
        doc["model_digest"] = model_digest;
        for (auto& [k, v] : items[0].doc.items()) doc[k] = std::move(v);
    }
    const auto text = doc.dump(1) + "\n";

    auto manifest = detail::manifest_for(argv, "explain");
    manifest.config = detail::surrogate_config_json(cfg, patterns.size());
    manifest.config["bootstraps"] = o.bootstraps;
    manifest.config["smiles"] = o.smiles;
    manifest.seeds["surrogate_seed"] = cfg.seed;
    manifest.seeds["layout_seed"] = o.seed;
    manifest.inputs = {{o.model, model_digest}, {o.patterns, file_digest(o.patterns)}};
    if (from_file) manifest.inputs.emplace_back(o.smiles.substr(1), file_digest(o.smiles.substr(1)));

    if (o.out.empty())
        out << text;
    else
        detail::emit(o.out, text, manifest);

    if (o.paint.empty()) return kExitOk;
    if (!from_file) {
        const auto& m = items[0];
        const auto scores = project_weights(m.mol, match_all(m.mol, patterns), m.explanation);
        std::vector<LegendRow> legend;
        for (const auto& [f, w] : m.explanation.weights)
            legend.push_back({notes.pattern_ids[f], notes.pattern_texts[f], w, notes.accuracy[f], notes.precision[f],
                              notes.recall[f], notes.importances[f]});
        RenderOptions ro;
        ro.title = o.smiles + "  P(high) = " + detail::fixed(m.probability, 3);
        detail::emit(o.paint, render_svg(m.mol, compute_layout(m.mol, o.seed), scores, legend, ro), manifest);
    } else {
        std::vector<GridCell> cells;
        for (const auto& m : items) {
            GridCell c;
            c.caption = (m.name.empty() ? std::string("molecule") : m.name) + " P=" + detail::fixed(m.probability, 2);
            c.molecule = &m.mol;
            c.layout = compute_layout(m.mol, o.seed);
            c.scores = project_weights(m.mol, match_all(m.mol, patterns), m.explanation);
            cells.push_back(std::move(c));
        }
        detail::emit(o.paint, render_grid(cells), manifest);
    }
    return kExitOk;
}

inline int cmd_validate(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto patterns = load_pattern_set(o.patterns);
    const auto model = detail::load_matching_model(o.model, patterns);
    const auto data = load_dataset(o.data, patterns);
    if (data.size() < 3) throw InputError("validation needs at least 3 molecules for a rank correlation");
    for (const auto& row : data.rows())
        if (!row.measured_ron) throw InputError("validation row '" + row.name + "' has no measured RON");

    const auto cfg = detail::surrogate_config(o);
    const std::size_t B = o.bootstraps == 0 ? 100 : o.bootstraps;
    const std::size_t n = data.size();
    std::vector<double> prob(n), score(n), ron(n);
    std::vector<std::map<std::size_t, double>> weights(n);

    // Molecules are independent; each worker takes every k-th one.
    std::vector<std::string> failures(n);
    const std::size_t workers = std::min(detail::worker_count(), n);
    auto work = [&](std::size_t w) {
        for (std::size_t i = w; i < n; i += workers) {
            try {
                const auto& fp = data.row(i).fingerprint;
                if (fp.count() == 0) throw InputError("matches none of the patterns");
                prob[i] = model.predict_proba(fp);
                const auto mw = bootstrap_weighting(model, fp, cfg, B);
                score[i] = mw.molecule_score;
                weights[i] = mw.mean_weight_per_feature;
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < n; ++i)
        if (!failures[i].empty()) throw InputError("validation row '" + data.row(i).name + "': " + failures[i]);
    for (std::size_t i = 0; i < n; ++i) ron[i] = *data.row(i).measured_ron;

    std::string report;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %8s %8s %8s\n", "name", "RON", "P(high)", "score");
    report += line;
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(line, sizeof line, "%-24s %8.1f %8.3f %8.3f\n", data.row(i).name.c_str(), ron[i], prob[i],
                      score[i]);
        report += line;
    }
    const auto s_p = stats::spearman(score, prob);
    const auto p_r = stats::spearman(prob, ron);
    const auto s_r = stats::spearman(score, ron);
    report += "score vs probability: " + detail::format_rho(s_p) + "\n";
    report += "probability vs RON: " + detail::format_rho(p_r) + "\n";
    report += "score vs RON: " + detail::format_rho(s_r) + "\n";
    out << report;

    auto manifest = detail::manifest_for(argv, "validate");
    manifest.config = detail::surrogate_config_json(cfg, data.n_features());
    manifest.config["bootstraps"] = B;
    manifest.seeds["surrogate_seed"] = cfg.seed;
    manifest.seeds["layout_seed"] = o.seed;
    manifest.inputs = {{o.model, file_digest(o.model)}, {o.patterns, file_digest(o.patterns)},
                       {o.data, file_digest(o.data)}};
    if (!o.out.empty()) detail::emit(o.out, report, manifest);

    if (!o.paint.empty()) {
        std::vector<GridCell> cells;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& mol = *data.row(i).molecule;
            GridCell c;
            c.caption = data.row(i).name + " (RON " + detail::fixed(ron[i], 1) + ")";
            c.molecule = &mol;
            c.layout = compute_layout(mol, o.seed);
            c.scores = project_weights(mol, match_all(mol, patterns), weights[i]);
            cells.push_back(std::move(c));
        }
        detail::emit(o.paint, render_grid(cells), manifest);
    }
    return kExitOk;
}

// --------------------------------------------------------------------- entry

/// Parses arguments and runs one subcommand. Never throws.
inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interpretable RON classification from substructure fingerprints", "ronpaint"};
    app.set_version_flag("--version", std::string(RONPAINT_VERSION));
    app.require_subcommand(1);
    Options o;

    auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Master random seed")->capture_default_str(); };
    auto add_forest = [&](CLI::App* c) {
        c->add_option("--trees", o.trees, "Number of trees")->capture_default_str()->check(CLI::PositiveNumber);
    };
    auto add_surrogate = [&](CLI::App* c) {
        c->add_option("--samples", o.samples, "Perturbed samples per explanation")->capture_default_str();
        c->add_option("--kernel-width", o.kernel_width, "Proximity kernel width (0 = 0.75 * sqrt(d))")
            ->capture_default_str();
        c->add_option("--ridge", o.ridge, "Ridge penalty")->capture_default_str();
        c->add_option("--top-k", o.top_k, "Features kept in the surrogate")->capture_default_str();
    };

    auto* train = app.add_subcommand("train", "Fit a forest and write the model");
    train->add_option("--data", o.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--patterns", o.patterns, "Pattern TSV")->required()->check(CLI::ExistingFile);
    train->add_option("--model", o.model, "Output model path")->required();
    add_forest(train);
    add_seed(train);

    auto* evaluate = app.add_subcommand("evaluate", "Repeated random leave-out evaluation");
    evaluate->add_option("--data", o.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--patterns", o.patterns, "Pattern TSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--rounds", o.rounds, "Leave-out rounds")->capture_default_str();
    evaluate->add_option("--holdout", o.holdout, "Held-out fraction")->capture_default_str();
    evaluate->add_option("--out", o.out, "Also write the report here");
    add_forest(evaluate);
    add_seed(evaluate);

    auto* expl = app.add_subcommand("explain", "Explain one prediction");
    expl->add_option("smiles", o.smiles, "Molecule SMILES, or @FILE with one SMILES per line")->required();
    expl->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
    expl->add_option("--patterns", o.patterns, "Pattern TSV")->required()->check(CLI::ExistingFile);
    expl->add_option("--bootstraps", o.bootstraps, "Bootstrap replicates (0 = none)")->capture_default_str();
    expl->add_option("--paint", o.paint, "Write an SVG painting here");
    expl->add_option("--out", o.out, "Write the explanation here instead of stdout");
    add_surrogate(expl);
    add_seed(expl);

    auto* validate = app.add_subcommand("validate", "Correlate molecule scores with probabilities and measured RON");
    validate->add_option("--data", o.data, "Validation CSV with measured RON")->required()->check(CLI::ExistingFile);
    validate->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
    validate->add_option("--patterns", o.patterns, "Pattern TSV")->required()->check(CLI::ExistingFile);
    validate->add_option("--bootstraps", o.bootstraps, "Bootstrap replicates per molecule (0 = 100)")
        ->capture_default_str();
    validate->add_option("--paint", o.paint, "Write the grid SVG here");
    validate->add_option("--out", o.out, "Also write the report here");
    add_surrogate(validate);
    add_seed(validate);

    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*train) return cmd_train(o, argv, out);
        if (*evaluate) return cmd_evaluate(o, argv, out);
        if (*expl) return cmd_explain(o, argv, out);
        return cmd_validate(o, argv, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InvariantError& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace ronpaint::cli
