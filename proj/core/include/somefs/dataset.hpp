#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "somefs/matrix.hpp"

namespace somefs {

/// Tabular classification data: n samples, D real features, C classes.
struct Dataset {
    Matrix features;                        // n x D
    std::vector<int> labels;                // n class indices in [0, C)
    std::vector<std::string> feature_names; // D
    std::vector<std::string> class_names;   // C, first-occurrence order

    std::size_t n() const { return features.rows(); }
    std::size_t dims() const { return features.cols(); }
    std::size_t num_classes() const { return class_names.size(); }

    /// Throws DataError if shapes or label ranges are inconsistent.
    void validate() const;

    /// Subset with the given row indices (repetition allowed).
    Dataset select(std::span<const std::size_t> idx) const;
};

/// Per-column mean/std of the data a model was standardized on.
/// Constant columns keep std = 1 so the transform is a no-op there.
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> std;
};

struct BootstrapSample {
    std::vector<std::size_t> in_bag; // n indices, with repetition
    std::set<std::size_t> oob;       // complement of the in-bag index set
};

struct FoldPlan {
    struct Fold {
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
    };
    std::vector<Fold> folds;
    bool stratified = false; // what was actually done
    std::uint64_t seed = 0;
};

/// Load a CSV with a header row; every non-label column must parse as a
/// real number. Class names are the distinct label strings in first
/// occurrence order. `label_column` is a column name, or a 0-based index
/// if no name matches and the string parses as an integer.
Dataset load_csv(const std::string& path, const std::string& label_column);

/// Inverse of load_csv: header + rows, label written as its class name.
void save_csv(const Dataset& ds, const std::string& path,
              const std::string& label_column = "label");

/// Column-wise z-scoring. Constant columns (std < 1e-12) become all-zero.
std::pair<Dataset, FeatureStats> standardize(const Dataset& ds);

/// Apply FeatureStats fitted elsewhere (e.g. transform test data with
/// training statistics).
Dataset apply_standardize(const Dataset& ds, const FeatureStats& stats);

/// Add i.i.d. N(0,1) noise to every feature cell. Labels untouched.
Dataset add_gaussian_noise(const Dataset& ds, std::uint64_t seed);

/// Draw n indices with replacement; oob is the complement.
BootstrapSample bootstrap(const Dataset& ds, std::uint64_t seed);
BootstrapSample bootstrap(std::size_t n, std::uint64_t seed);

/// k-fold split. Stratified keeps per-fold class counts within +-1 of
/// proportional; if some class has fewer than k members it falls back to
/// an unstratified split (FoldPlan.stratified records the fallback, and
/// `warning` when given receives a note).
FoldPlan kfold(const Dataset& ds, std::size_t k, bool stratified,
               std::uint64_t seed, std::string* warning = nullptr);

}  // namespace somefs
