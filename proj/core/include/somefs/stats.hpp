#pragma once

#include <string>
#include <vector>

#include "somefs/matrix.hpp"

namespace somefs {

/// N datasets x k classifiers accuracy table.
struct AccuracyMatrix {
    Matrix values;
    std::vector<std::string> dataset_names;
    std::vector<std::string> classifier_names;

    std::size_t num_datasets() const { return values.rows(); }
    std::size_t num_classifiers() const { return values.cols(); }

    void validate() const; // throws DataError
};

/// CSV: header row of classifier names (first cell names the dataset
/// column), one row per dataset.
AccuracyMatrix load_accuracy_csv(const std::string& path);

struct RankReport {
    std::vector<double> mean_ranks; // rank 1 = highest accuracy
    double chi2 = 0.0;
    double p_value = 1.0;
};

struct HolmComparison {
    std::size_t classifier = 0;
    double z = 0.0;
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    bool reject = false;
};

struct HolmReport {
    std::size_t control = 0;
    double alpha = 0.05;
    std::vector<HolmComparison> comparisons; // ascending raw_p
};

/// Row-wise ranks (average ranks on ties), averaged per classifier.
std::vector<double> rank_matrix(const AccuracyMatrix& m);

/// Friedman chi-square over the rank matrix, p from the chi-square
/// survival function with k-1 degrees of freedom.
RankReport friedman(const AccuracyMatrix& m);

/// Pairwise z-tests of every classifier against the control on mean
/// ranks, Holm step-down adjustment, reject when adjusted p < alpha.
HolmReport holm_vs_control(const AccuracyMatrix& m, std::size_t control,
                           double alpha = 0.05);

}  // namespace somefs
