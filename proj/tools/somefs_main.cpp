// somefs: train, evaluate and explain self-constructing fuzzy ensembles.
//
// Subcommands: train, eval, extract-rules, stats, ablate, noise-gen.
// Exit codes: 0 ok, 1 config error, 2 data error, 3 internal error.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "somefs/dataset.hpp"
#include "somefs/ensemble.hpp"
#include "somefs/errors.hpp"
#include "somefs/model_io.hpp"
#include "somefs/report.hpp"
#include "somefs/rng.hpp"
#include "somefs/rulemine.hpp"
#include "somefs/stats.hpp"

namespace {

using namespace somefs;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CommonOpts {
    std::string data_path;
    std::string label_column = "label";
    std::uint64_t seed = 0;
    std::size_t learners = 10;
    std::string preset = "SOME-FS";
    std::size_t folds = 5;
    bool noise = false;
    std::size_t threads = 0;
    LearnerConfig learner;
};

void add_learner_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--learners,-T", o.learners, "Number of base learners")
        ->capture_default_str();
    cmd->add_option("--preset", o.preset, "Ablation preset")
        ->check(CLI::IsMember(ablation_preset_names()))
        ->capture_default_str();
    cmd->add_option("--threads", o.threads, "Training threads (0 = hardware)")
        ->capture_default_str();
    cmd->add_option("--phi-in", o.learner.phi_in, "Rule creation threshold")
        ->capture_default_str();
    cmd->add_option("--s-thresh", o.learner.s_thresh, "Similarity ceiling")
        ->capture_default_str();
    cmd->add_option("--rule-max", o.learner.rule_max, "Rule cap per learner")
        ->capture_default_str();
    cmd->add_option("--sigma-init", o.learner.sigma_init, "Initial MF width")
        ->capture_default_str();
    cmd->add_option("--batch-size", o.learner.batch_size, "Mini-batch size")
        ->capture_default_str();
    cmd->add_option("--learning-rate", o.learner.learning_rate, "Adam step size")
        ->capture_default_str();
    cmd->add_option("--param-epochs", o.learner.param_epochs, "Parameter epochs")
        ->capture_default_str();
    cmd->add_option("--initial-clusters", o.learner.initial_clusters,
                    "Initial k-means partitions")
        ->capture_default_str();
    cmd->add_flag("--elbow", o.learner.use_elbow,
                  "Pick the initial partition count by the elbow method");
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::map<std::string, std::string> config_echo(const CommonOpts& o,
                                               std::uint64_t seed) {
    return {
        {"preset", o.preset},
        {"learners", std::to_string(o.learners)},
        {"folds", std::to_string(o.folds)},
        {"noise", o.noise ? "true" : "false"},
        {"seed", std::to_string(seed)},
        {"phi_in", fmt(o.learner.phi_in)},
        {"s_thresh", fmt(o.learner.s_thresh)},
        {"rule_max", std::to_string(o.learner.rule_max)},
        {"sigma_init", fmt(o.learner.sigma_init)},
        {"batch_size", std::to_string(o.learner.batch_size)},
        {"learning_rate", fmt(o.learner.learning_rate)},
        {"param_epochs", std::to_string(o.learner.param_epochs)},
        {"initial_clusters", std::to_string(o.learner.initial_clusters)},
        {"use_elbow", o.learner.use_elbow ? "true" : "false"},
    };
}

std::vector<std::vector<std::size_t>> confusion_matrix(const EnsembleModel& model,
                                                       const Dataset& standardized) {
    const std::size_t c = standardized.num_classes();
    std::vector<std::vector<std::size_t>> conf(c, std::vector<std::size_t>(c, 0));
    for (std::size_t i = 0; i < standardized.n(); ++i) {
        const int pred = model.predict(standardized.features.row(i)).label;
        conf[static_cast<std::size_t>(standardized.labels[i])]
            [static_cast<std::size_t>(pred)]++;
    }
    return conf;
}

// Per-fold run: standardize on the train split, optionally noise both
// splits, fit, evaluate on the test split.
struct FoldResult {
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;
};

FoldResult run_fold(const Dataset& ds, const FoldPlan::Fold& fold,
                    const CommonOpts& o, const AblationFlags& flags,
                    std::uint64_t fold_seed) {
    Dataset train = ds.select(fold.train);
    Dataset test = ds.select(fold.test);
    auto [train_std, stats] = standardize(train);
    Dataset test_std = apply_standardize(test, stats);
    if (o.noise) {
        train_std = add_gaussian_noise(train_std, derive_seed(fold_seed, 7001));
        test_std = add_gaussian_noise(test_std, derive_seed(fold_seed, 7002));
    }
    EnsembleModel model =
        fit(train_std, stats, o.learners, o.learner, flags, fold_seed, o.threads);
    FoldResult res;
    res.accuracy = model.evaluate(test_std);
    res.confusion = confusion_matrix(model, test_std);
    return res;
}

int cmd_train(const CommonOpts& o, const std::string& model_out,
              const std::string& report_out) {
    const auto t0 = std::chrono::steady_clock::now();
    Dataset ds = load_csv(o.data_path, o.label_column);
    auto [ds_std, stats] = standardize(ds);
    if (o.noise) ds_std = add_gaussian_noise(ds_std, derive_seed(o.seed, 7001));

    const AblationFlags flags = ablation_preset(o.preset);
    EnsembleModel model =
        fit(ds_std, stats, o.learners, o.learner, flags, o.seed, o.threads);
    save_model(model, model_out);

    Report report;
    report.class_names = ds.class_names;
    report.fold_accuracies = {model.evaluate(ds_std)};
    report.confusion = confusion_matrix(model, ds_std);
    report.config_echo = config_echo(o, o.seed);
    report.finalize();
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!report_out.empty()) atomic_write_text(report_out, report_to_json(report));
    std::cout << "model written to " << model_out << "\n"
              << render_report(report);
    return kExitOk;
}

int cmd_eval(const CommonOpts& o, const std::string& model_path,
             const std::string& test_path, const std::string& report_out) {
    const auto t0 = std::chrono::steady_clock::now();
    Report report;

    if (!model_path.empty()) {
        // test mode: saved model against a labeled file
        EnsembleModel model = load_model(model_path);
        const std::string path = test_path.empty() ? o.data_path : test_path;
        Dataset test = load_csv(path, o.label_column);
        if (test.dims() != model.dims())
            throw DataError("eval: dataset dimensions do not match the model");
        Dataset test_std = apply_standardize(test, model.feature_stats);
        if (o.noise) test_std = add_gaussian_noise(test_std, derive_seed(o.seed, 7002));
        report.class_names = test.class_names;
        report.fold_accuracies = {model.evaluate(test_std)};
        report.confusion = confusion_matrix(model, test_std);
    } else {
        // CV mode: retrain per fold with fold-derived seeds
        Dataset ds = load_csv(o.data_path, o.label_column);
        std::string warning;
        FoldPlan plan = kfold(ds, o.folds, /*stratified=*/true, o.seed, &warning);
        if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
        const AblationFlags flags = ablation_preset(o.preset);
        report.class_names = ds.class_names;
        report.confusion.assign(ds.num_classes(),
                                std::vector<std::size_t>(ds.num_classes(), 0));
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            FoldResult res =
                run_fold(ds, plan.folds[f], o, flags, derive_seed(o.seed, 9000 + f));
            report.fold_accuracies.push_back(res.accuracy);
            for (std::size_t r = 0; r < res.confusion.size(); ++r)
                for (std::size_t c = 0; c < res.confusion.size(); ++c)
                    report.confusion[r][c] += res.confusion[r][c];
        }
    }

    report.config_echo = config_echo(o, o.seed);
    report.finalize();
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!report_out.empty()) atomic_write_text(report_out, report_to_json(report));
    std::cout << render_report(report);
    return kExitOk;
}

int cmd_extract_rules(const std::string& model_path, const std::string& data_path,
                      const std::string& label_column, double min_support,
                      std::size_t max_len, const std::string& out_path) {
    EnsembleModel model = load_model(model_path);
    Dataset ds = load_csv(data_path, label_column);
    if (ds.dims() != model.dims())
        throw DataError("extract-rules: dataset dimensions do not match the model");
    Dataset ds_std = apply_standardize(ds, model.feature_stats);

    MiningOptions options;
    options.min_support = min_support;
    options.max_len = max_len;
    const auto rules = extract_stable_rules(model, ds_std, options);

    const std::string json = stable_rules_to_json(rules, model.feature_names,
                                                  model.class_names);
    if (!out_path.empty()) atomic_write_text(out_path, json);
    std::cout << render_stable_rules(rules, model.feature_names, model.class_names);
    return kExitOk;
}

int cmd_stats(const std::string& matrix_path, const std::string& control,
              double alpha, const std::string& out_path) {
    AccuracyMatrix m = load_accuracy_csv(matrix_path);
    std::size_t control_idx = m.num_classifiers();
    for (std::size_t i = 0; i < m.num_classifiers(); ++i)
        if (m.classifier_names[i] == control) control_idx = i;
    if (control_idx == m.num_classifiers())
        throw ConfigError("stats: unknown control classifier: " + control);

    RankReport rep = friedman(m);
    HolmReport holm = holm_vs_control(m, control_idx, alpha);
    const std::string json = rank_report_to_json(rep, m.classifier_names, &holm);
    if (!out_path.empty()) atomic_write_text(out_path, json);
    std::cout << render_rank_report(rep, m.classifier_names, &holm);
    return kExitOk;
}

int cmd_ablate(const CommonOpts& o, const std::string& report_out) {
    Dataset ds = load_csv(o.data_path, o.label_column);
    std::string warning;
    FoldPlan plan = kfold(ds, o.folds, /*stratified=*/true, o.seed, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << '\n';

    const auto& presets = ablation_preset_names();
    std::vector<std::vector<double>> accuracies(presets.size());
    for (std::size_t p = 0; p < presets.size(); ++p) {
        const AblationFlags flags = ablation_preset(presets[p]);
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            // identical fold seeds across presets: only the flags differ
            FoldResult res =
                run_fold(ds, plan.folds[f], o, flags, derive_seed(o.seed, 9000 + f));
            accuracies[p].push_back(res.accuracy);
        }
    }

    if (!report_out.empty()) {
        std::ostringstream js;
        js << "{\n";
        for (std::size_t p = 0; p < presets.size(); ++p) {
            js << "  \"" << presets[p] << "\": [";
            for (std::size_t f = 0; f < accuracies[p].size(); ++f)
                js << (f ? ", " : "") << accuracies[p][f];
            js << "]" << (p + 1 < presets.size() ? "," : "") << "\n";
        }
        js << "}\n";
        atomic_write_text(report_out, js.str());
    }
    std::cout << render_ablation_table(presets, accuracies);
    return kExitOk;
}

int cmd_noise_gen(const CommonOpts& o, const std::string& out_path) {
    Dataset ds = load_csv(o.data_path, o.label_column);
    auto [ds_std, stats] = standardize(ds);
    Dataset noisy = add_gaussian_noise(ds_std, o.seed);
    save_csv(noisy, out_path, o.label_column);
    std::cout << "noisy standardized dataset written to " << out_path << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-constructing multi-expert fuzzy system"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string model_path, test_path, out_path, report_path;
    double min_support = 0.3, alpha = 0.05;
    std::size_t max_len = 5;
    std::string control = "SOME-FS";

    auto add_data_flags = [&](CLI::App* cmd, bool need_seed) {
        cmd->set_config("--config", "", "Flat key=value config file; flags override");
        cmd->add_option("--data", opts.data_path, "CSV dataset")->required();
        cmd->add_option("--label", opts.label_column, "Label column name or index")
            ->capture_default_str();
        auto* seed = cmd->add_option("--seed", opts.seed, "Master RNG seed");
        if (need_seed) seed->required();
    };

    auto* train = app.add_subcommand("train", "Fit an ensemble and save the model");
    add_data_flags(train, true);
    add_learner_flags(train, opts);
    train->add_flag("--noise", opts.noise, "Add N(0,1) noise to standardized features");
    train->add_option("--out", out_path, "Model file")->required();
    train->add_option("--report", report_path, "Report JSON file");

    auto* eval = app.add_subcommand("eval", "Cross-validate, or score a saved model");
    add_data_flags(eval, true);
    add_learner_flags(eval, opts);
    eval->add_option("--model", model_path, "Saved model (test mode)");
    eval->add_option("--test", test_path, "Test CSV (defaults to --data)");
    eval->add_option("--folds", opts.folds, "CV folds")->capture_default_str();
    eval->add_flag("--noise", opts.noise, "Add N(0,1) noise to standardized features");
    eval->add_option("--report", report_path, "Report JSON file");

    auto* rules = app.add_subcommand("extract-rules", "Mine stable linguistic rules");
    rules->set_config("--config", "", "Flat key=value config file; flags override");
    rules->add_option("--model", model_path, "Saved model")->required();
    rules->add_option("--data", opts.data_path, "Labeled CSV")->required();
    rules->add_option("--label", opts.label_column, "Label column")->capture_default_str();
    rules->add_option("--min-support", min_support, "Minimum support")->capture_default_str();
    rules->add_option("--max-len", max_len, "Maximum itemset size")->capture_default_str();
    rules->add_option("--out", out_path, "Stable rules JSON file");

    auto* stats_cmd = app.add_subcommand("stats", "Rank, Friedman and Holm tests");
    stats_cmd->set_config("--config", "", "Flat key=value config file; flags override");
    stats_cmd->add_option("--matrix", opts.data_path, "Accuracy matrix CSV")->required();
    stats_cmd->add_option("--control", control, "Control classifier")->capture_default_str();
    stats_cmd->add_option("--alpha", alpha, "Significance level")->capture_default_str();
    stats_cmd->add_option("--out", out_path, "Report JSON file");

    auto* ablate = app.add_subcommand("ablate", "Compare the four ablation presets");
    add_data_flags(ablate, true);
    add_learner_flags(ablate, opts);
    ablate->add_option("--folds", opts.folds, "CV folds")->capture_default_str();
    ablate->add_flag("--noise", opts.noise, "Add N(0,1) noise to standardized features");
    ablate->add_option("--report", report_path, "Report JSON file");

    auto* noise_gen = app.add_subcommand("noise-gen", "Emit a noisy standardized CSV");
    add_data_flags(noise_gen, true);
    noise_gen->add_option("--out", out_path, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (train->parsed()) return cmd_train(opts, out_path, report_path);
        if (eval->parsed()) return cmd_eval(opts, model_path, test_path, report_path);
        if (rules->parsed())
            return cmd_extract_rules(model_path, opts.data_path, opts.label_column,
                                     min_support, max_len, out_path);
        if (stats_cmd->parsed()) return cmd_stats(opts.data_path, control, alpha, out_path);
        if (ablate->parsed()) return cmd_ablate(opts, report_path);
        if (noise_gen->parsed()) return cmd_noise_gen(opts, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitConfig;
}
