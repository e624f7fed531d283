#pragma once

#include <map>
#include <string>
#include <vector>

#include "somefs/stats.hpp"

namespace somefs {

/// Experiment result, rendered both as JSON (deterministic: no timing)
/// and as a human table (with timing).
struct Report {
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion; // rows truth, cols predicted
    std::vector<std::string> class_names;
    std::map<std::string, std::string> config_echo;
    double wall_clock_seconds = 0.0;

    /// Fill mean/std from fold_accuracies.
    void finalize();
};

std::string report_to_json(const Report& report);
std::string render_report(const Report& report);

std::string rank_report_to_json(const RankReport& rep,
                                const std::vector<std::string>& classifier_names,
                                const HolmReport* holm = nullptr);
std::string render_rank_report(const RankReport& rep,
                               const std::vector<std::string>& classifier_names,
                               const HolmReport* holm = nullptr);

/// Side-by-side ablation accuracies, one column per preset.
std::string render_ablation_table(const std::vector<std::string>& presets,
                                  const std::vector<std::vector<double>>& fold_accuracies);

}  // namespace somefs
