#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "somefs/dataset.hpp"
#include "somefs/easonfin.hpp"

namespace somefs {

/// The three switchable operations on top of bagging.
struct AblationFlags {
    bool rule_based_voting = true;
    bool mixed_structure_learning = true;
    bool ln_relu = true;

    bool operator==(const AblationFlags&) const = default;
};

/// Named presets: SOME-FS (all on), Ex-RV (voting off), Ex-MSL (structure
/// learning off), MSL-Only (LN-ReLU and voting off).
AblationFlags ablation_preset(const std::string& name);
const std::vector<std::string>& ablation_preset_names();

struct EnsemblePrediction {
    int label = 0;
    std::vector<double> scores;        // aggregated C-vector
    std::vector<ForwardTrace> traces;  // one per learner
    std::vector<int> learner_labels;   // per-learner argmax
};

struct EnsembleModel {
    std::vector<TrainedLearner> learners;
    std::vector<double> weights;    // w_t from the OOB error spread
    std::vector<double> oob_errors; // err_t
    FeatureStats feature_stats;     // of the data the model was fit on
    AblationFlags ablation;
    LearnerConfig config;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;

    std::size_t size() const { return learners.size(); }
    std::size_t dims() const;
    std::size_t num_classes() const { return class_names.size(); }

    /// x must already be standardized with feature_stats.
    EnsemblePrediction predict(std::span<const double> x) const;

    /// Fraction of correct predictions on a standardized dataset.
    double evaluate(const Dataset& standardized) const;
};

/// Piecewise-linear voting weights from OOB error rates: error within
/// marg = (emax-emin)/4 of the best gives weight 1, then a linear drop to
/// 1/4 at the worst. Equal errors give everyone weight 1.
std::vector<double> compute_weights(const std::vector<double>& errs);

/// Bag T learners. `ds` must be standardized already; `stats` records how.
/// Learner t trains on its bootstrap in-bag sample with a seed derived
/// from (master_seed, t) and is scored on its own out-of-bag rows (empty
/// OOB counts as error 0.5). Training parallelizes over learners without
/// affecting results; n_threads = 0 picks the hardware count.
EnsembleModel fit(const Dataset& ds, const FeatureStats& stats, std::size_t T,
                  const LearnerConfig& cfg, const AblationFlags& ablation,
                  std::uint64_t master_seed, std::size_t n_threads = 0);

}  // namespace somefs
