#include "somefs/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "somefs/errors.hpp"
#include "somefs/rng.hpp"

namespace somefs {

AblationFlags ablation_preset(const std::string& name) {
    if (name == "SOME-FS") return {true, true, true};
    if (name == "Ex-RV") return {false, true, true};
    if (name == "Ex-MSL") return {true, false, true};
    if (name == "MSL-Only") return {false, true, false};
    throw ConfigError("unknown ablation preset: " + name);
}

const std::vector<std::string>& ablation_preset_names() {
    static const std::vector<std::string> names = {"SOME-FS", "Ex-RV", "Ex-MSL",
                                                   "MSL-Only"};
    return names;
}

std::vector<double> compute_weights(const std::vector<double>& errs) {
    const auto [mn, mx] = std::minmax_element(errs.begin(), errs.end());
    const double emin = *mn, emax = *mx;
    std::vector<double> w(errs.size(), 1.0);
    if (emax <= emin) return w; // degenerate spread
    const double marg = (emax - emin) / 4.0;
    for (std::size_t t = 0; t < errs.size(); ++t)
        if (errs[t] > emin + marg)
            w[t] = ((emax + marg) - errs[t]) / (emax - emin);
    return w;
}

std::size_t EnsembleModel::dims() const {
    return learners.empty() ? 0 : learners.front().rulebase.dims;
}

EnsemblePrediction EnsembleModel::predict(std::span<const double> x) const {
    if (x.size() != dims()) throw DataError("predict: feature dimension mismatch");
    EnsemblePrediction out;
    const std::size_t C = num_classes();
    out.scores.assign(C, 0.0);
    out.traces.reserve(size());
    out.learner_labels.reserve(size());

    for (std::size_t t = 0; t < size(); ++t) {
        auto [label, trace] = learners[t].predict(x);
        out.learner_labels.push_back(label);
        if (ablation.rule_based_voting) {
            for (std::size_t c = 0; c < C; ++c)
                out.scores[c] += weights[t] * trace.y[c];
        } else {
            out.scores[static_cast<std::size_t>(label)] += weights[t];
        }
        out.traces.push_back(std::move(trace));
    }

    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c)
        if (out.scores[c] > out.scores[best]) best = c;
    out.label = static_cast<int>(best);
    return out;
}

double EnsembleModel::evaluate(const Dataset& standardized) const {
    if (standardized.n() == 0) throw DataError("evaluate: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < standardized.n(); ++i)
        if (predict(standardized.features.row(i)).label == standardized.labels[i])
            ++correct;
    return static_cast<double>(correct) / static_cast<double>(standardized.n());
}

namespace {

TrainedLearner fit_one(const Dataset& ds, const LearnerConfig& base_cfg,
                       const AblationFlags& ablation, std::uint64_t master_seed,
                       std::size_t t, double* oob_error) {
    LearnerConfig cfg = base_cfg;
    cfg.seed = derive_seed(master_seed, t);

    BootstrapSample bag = bootstrap(ds.n(), derive_seed(cfg.seed, 1));
    Dataset in_bag = ds.select(bag.in_bag);
    const std::size_t n = in_bag.n();
    cfg.batch_size = std::min(cfg.batch_size, n);

    RuleBase rb;
    if (ablation.mixed_structure_learning) {
        std::size_t p = cfg.use_elbow
                            ? elbow_select(in_bag.features, cfg.elbow_min,
                                           std::min(cfg.elbow_max, n),
                                           derive_seed(cfg.seed, 2))
                            : cfg.initial_clusters;
        p = std::min(p, n);
        rb = init_structure(in_bag.features, p, cfg.sigma_init, ds.num_classes(),
                            cfg.rule_max, derive_seed(cfg.seed, 3));
    } else {
        // fixed capacity: rule_max k-means rules, parameters only
        const std::size_t p = std::min(cfg.rule_max, n);
        rb = init_structure(in_bag.features, p, cfg.sigma_init, ds.num_classes(),
                            cfg.rule_max, derive_seed(cfg.seed, 3));
    }

    TrainedLearner learner =
        train(std::move(rb), in_bag.features, in_bag.labels, cfg, ablation.ln_relu,
              ablation.mixed_structure_learning);

    if (bag.oob.empty()) {
        *oob_error = 0.5; // uninformative prior
    } else {
        std::size_t wrong = 0;
        for (std::size_t i : bag.oob)
            if (learner.predict(ds.features.row(i)).first != ds.labels[i]) ++wrong;
        *oob_error = static_cast<double>(wrong) / static_cast<double>(bag.oob.size());
    }
    return learner;
}

}  // namespace

EnsembleModel fit(const Dataset& ds, const FeatureStats& stats, std::size_t T,
                  const LearnerConfig& cfg, const AblationFlags& ablation,
                  std::uint64_t master_seed, std::size_t n_threads) {
    if (T < 1) throw ConfigError("fit: need at least one learner");
    ds.validate();
    cfg.validate();

    EnsembleModel model;
    model.feature_stats = stats;
    model.ablation = ablation;
    model.config = cfg;
    model.class_names = ds.class_names;
    model.feature_names = ds.feature_names;
    model.learners.resize(T);
    model.oob_errors.assign(T, 0.0);

    if (n_threads == 0)
        n_threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, T);

    if (n_threads <= 1) {
        for (std::size_t t = 0; t < T; ++t)
            model.learners[t] =
                fit_one(ds, cfg, ablation, master_seed, t, &model.oob_errors[t]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t t = next.fetch_add(1);
                if (t >= T) return;
                model.learners[t] =
                    fit_one(ds, cfg, ablation, master_seed, t, &model.oob_errors[t]);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    model.weights = compute_weights(model.oob_errors);
    return model;
}

}  // namespace somefs
