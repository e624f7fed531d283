#include "somefs/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "somefs/errors.hpp"

namespace somefs {

using nlohmann::json;

namespace {

json config_to_json(const LearnerConfig& cfg) {
    return json{
        {"phi_in", cfg.phi_in},
        {"s_thresh", cfg.s_thresh},
        {"rule_max", cfg.rule_max},
        {"sigma_init", cfg.sigma_init},
        {"batch_size", cfg.batch_size},
        {"learning_rate", cfg.learning_rate},
        {"structure_patience", cfg.structure_patience},
        {"param_epochs", cfg.param_epochs},
        {"early_stop_patience", cfg.early_stop_patience},
        {"seed", cfg.seed},
        {"initial_clusters", cfg.initial_clusters},
        {"use_elbow", cfg.use_elbow},
        {"elbow_min", cfg.elbow_min},
        {"elbow_max", cfg.elbow_max},
        {"dbscan_min_pts", cfg.dbscan_min_pts},
        {"activation_scale", cfg.activation_scale == ActivationScale::kGeometricMean
                                 ? "geometric_mean"
                                 : "raw_product"},
    };
}

LearnerConfig config_from_json(const json& j) {
    LearnerConfig cfg;
    cfg.phi_in = j.at("phi_in").get<double>();
    cfg.s_thresh = j.at("s_thresh").get<double>();
    cfg.rule_max = j.at("rule_max").get<std::size_t>();
    cfg.sigma_init = j.at("sigma_init").get<double>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.structure_patience = j.at("structure_patience").get<std::size_t>();
    cfg.param_epochs = j.at("param_epochs").get<std::size_t>();
    cfg.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.initial_clusters = j.at("initial_clusters").get<std::size_t>();
    cfg.use_elbow = j.at("use_elbow").get<bool>();
    cfg.elbow_min = j.at("elbow_min").get<std::size_t>();
    cfg.elbow_max = j.at("elbow_max").get<std::size_t>();
    cfg.dbscan_min_pts = j.at("dbscan_min_pts").get<std::size_t>();
    cfg.activation_scale = j.at("activation_scale").get<std::string>() == "raw_product"
                               ? ActivationScale::kRawProduct
                               : ActivationScale::kGeometricMean;
    return cfg;
}

json rule_to_json(const FuzzyRule& rule) {
    json m = json::array(), sigma = json::array();
    for (const auto& mf : rule.antecedent) {
        m.push_back(mf.m);
        sigma.push_back(mf.sigma);
    }
    json cons = json::array();
    for (std::size_t c = 0; c < rule.consequent.rows(); ++c) {
        json row = json::array();
        for (std::size_t d = 0; d < rule.consequent.cols(); ++d)
            row.push_back(rule.consequent(c, d));
        cons.push_back(std::move(row));
    }
    return json{{"m", std::move(m)}, {"sigma", std::move(sigma)},
                {"consequent", std::move(cons)}};
}

FuzzyRule rule_from_json(const json& j, std::size_t dims, std::size_t classes) {
    FuzzyRule rule;
    const auto& m = j.at("m");
    const auto& sigma = j.at("sigma");
    if (m.size() != dims || sigma.size() != dims)
        throw DataError("model file: rule dimension mismatch");
    rule.antecedent.resize(dims);
    for (std::size_t d = 0; d < dims; ++d)
        rule.antecedent[d] = {m[d].get<double>(), sigma[d].get<double>()};
    const auto& cons = j.at("consequent");
    if (cons.size() != classes) throw DataError("model file: consequent shape mismatch");
    rule.consequent = Matrix(classes, dims + 1);
    for (std::size_t c = 0; c < classes; ++c) {
        if (cons[c].size() != dims + 1)
            throw DataError("model file: consequent shape mismatch");
        for (std::size_t d = 0; d <= dims; ++d)
            rule.consequent(c, d) = cons[c][d].get<double>();
    }
    return rule;
}

}  // namespace

std::string model_to_json(const EnsembleModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["feature_stats"] = {{"mean", model.feature_stats.mean},
                          {"std", model.feature_stats.std}};
    j["ablation"] = {{"rule_based_voting", model.ablation.rule_based_voting},
                     {"mixed_structure_learning", model.ablation.mixed_structure_learning},
                     {"ln_relu", model.ablation.ln_relu}};
    j["config"] = config_to_json(model.config);
    j["class_names"] = model.class_names;
    j["feature_names"] = model.feature_names;
    j["oob_errors"] = model.oob_errors;
    j["weights"] = model.weights;

    json learners = json::array();
    for (const auto& learner : model.learners) {
        json rules = json::array();
        for (const auto& rule : learner.rulebase.rules) rules.push_back(rule_to_json(rule));
        learners.push_back(json{{"ln_relu", learner.ln_relu},
                                {"rule_max", learner.rulebase.rule_max},
                                {"rules", std::move(rules)}});
    }
    j["learners"] = std::move(learners);
    return j.dump(2);
}

EnsembleModel model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("model file: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion)
            throw DataError("model file: unsupported format_version");
        EnsembleModel model;
        model.feature_stats.mean = j.at("feature_stats").at("mean").get<std::vector<double>>();
        model.feature_stats.std = j.at("feature_stats").at("std").get<std::vector<double>>();
        const auto& ab = j.at("ablation");
        model.ablation.rule_based_voting = ab.at("rule_based_voting").get<bool>();
        model.ablation.mixed_structure_learning = ab.at("mixed_structure_learning").get<bool>();
        model.ablation.ln_relu = ab.at("ln_relu").get<bool>();
        model.config = config_from_json(j.at("config"));
        model.class_names = j.at("class_names").get<std::vector<std::string>>();
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        model.oob_errors = j.at("oob_errors").get<std::vector<double>>();
        model.weights = j.at("weights").get<std::vector<double>>();

        const std::size_t dims = model.feature_names.size();
        const std::size_t classes = model.class_names.size();
        for (const auto& lj : j.at("learners")) {
            TrainedLearner learner;
            learner.ln_relu = lj.at("ln_relu").get<bool>();
            learner.rulebase.rule_max = lj.at("rule_max").get<std::size_t>();
            learner.rulebase.dims = dims;
            learner.rulebase.num_classes = classes;
            for (const auto& rj : lj.at("rules"))
                learner.rulebase.rules.push_back(rule_from_json(rj, dims, classes));
            if (learner.rulebase.rules.empty())
                throw DataError("model file: learner with no rules");
            model.learners.push_back(std::move(learner));
        }
        if (model.learners.empty()) throw DataError("model file: no learners");
        if (model.weights.size() != model.learners.size() ||
            model.oob_errors.size() != model.learners.size())
            throw DataError("model file: weights/oob_errors length mismatch");
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp);
        out << content;
        if (!out) throw DataError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void save_model(const EnsembleModel& model, const std::string& path) {
    atomic_write_text(path, model_to_json(model));
}

EnsembleModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return model_from_json(text);
}

std::string stable_rules_to_json(const std::vector<StableRule>& rules,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<std::string>& class_names) {
    json arr = json::array();
    for (const auto& r : rules) {
        json items = json::array();
        for (const auto& item : r.items)
            items.push_back(json{{"feature", item.feature},
                                 {"feature_name", feature_names[item.feature]},
                                 {"label", to_string(item.label)}});
        arr.push_back(json{{"items", std::move(items)},
                           {"class", r.class_id},
                           {"class_name", class_names[static_cast<std::size_t>(r.class_id)]},
                           {"support", r.support},
                           {"firing_strength", r.firing_strength}});
    }
    return arr.dump(2);
}

}  // namespace somefs
