#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "somefs/dataset.hpp"
#include "somefs/ensemble.hpp"

namespace somefs {

enum class LinguisticLabel : int {
    kExLow = 0,
    kVeryLow,
    kLow,
    kMed,
    kHigh,
    kVeryHigh,
    kExHigh,
};

const char* to_string(LinguisticLabel label);
LinguisticLabel linguistic_label_from_string(const std::string& s);

/// z-score bin edges for the seven labels:
/// (-inf,e0) ex_low, [e0,e1) very_low, [e1,e2) low, [e2,e3] med,
/// (e3,e4] high, (e4,e5] very_high, (e5,inf) ex_high.
struct LinguisticBins {
    std::array<double, 6> edges = {-2.0, -1.25, -0.5, 0.5, 1.25, 2.0};

    LinguisticLabel classify(double z) const;
};

struct LinguisticItem {
    std::size_t feature = 0;
    LinguisticLabel label = LinguisticLabel::kMed;

    auto operator<=>(const LinguisticItem&) const = default;
};

using ItemSet = std::vector<LinguisticItem>; // kept sorted

/// One activated rule of one correctly-predicting learner on one sample.
struct Transaction {
    ItemSet items;
    int class_id = 0;
    std::size_t learner_id = 0;
    std::size_t rule_id = 0;
    std::size_t sample_id = 0;
};

struct FrequentItemset {
    ItemSet items;
    int class_id = 0;
    double support = 0.0;
    std::size_t count = 0;
};

struct StableRule {
    ItemSet items;
    int class_id = 0;
    double support = 0.0;
    double firing_strength = 0.0;
};

struct MiningOptions {
    double min_support = 0.3;
    std::size_t max_len = 5;
    std::size_t min_len = 2; // short rules, but at least two conditions
    LinguisticBins bins;
};

/// One linguistic item per feature, from the z-score of the rule center
/// (centers live in standardized units, so z is the center itself).
ItemSet linguistic_map(const FuzzyRule& rule, const FeatureStats& stats,
                       const LinguisticBins& bins = {});

/// Transactions from every gate-activated rule of every learner whose
/// prediction matches the sample's label.
std::vector<Transaction> build_transactions(const EnsembleModel& model,
                                            const Dataset& standardized,
                                            const LinguisticBins& bins = {});

/// Exact frequent-itemset mining (FP-tree), per class: all itemsets of
/// size 1..max_len whose within-class support reaches min_support.
std::vector<FrequentItemset> fpgrowth(const std::vector<Transaction>& transactions,
                                      double min_support, std::size_t max_len);

/// Keep itemsets of length >= min_len that no other frequent itemset of
/// the same class strictly contains.
std::vector<FrequentItemset> select_maximal(const std::vector<FrequentItemset>& itemsets,
                                            std::size_t min_len);

/// Rebuild a Gaussian per item by averaging the centers/widths of every
/// model rule that maps to the same (feature, label); score the itemset by
/// its mean firing strength over the dataset rows of its class; rank by
/// strength, descending.
std::vector<StableRule> validate_rules(const std::vector<FrequentItemset>& itemsets,
                                       const EnsembleModel& model,
                                       const Dataset& standardized,
                                       const LinguisticBins& bins = {});

/// Full pipeline: transactions -> fpgrowth -> maximal short itemsets ->
/// validated, ranked stable rules.
std::vector<StableRule> extract_stable_rules(const EnsembleModel& model,
                                             const Dataset& standardized,
                                             const MiningOptions& options = {});

/// Text table with one column per stable rule and one row per feature
/// that occurs in any of them.
std::string render_stable_rules(const std::vector<StableRule>& rules,
                                const std::vector<std::string>& feature_names,
                                const std::vector<std::string>& class_names);

}  // namespace somefs
