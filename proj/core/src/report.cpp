#include "somefs/report.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace somefs {

using nlohmann::json;

void Report::finalize() {
    if (fold_accuracies.empty()) return;
    const double n = static_cast<double>(fold_accuracies.size());
    mean_accuracy =
        std::accumulate(fold_accuracies.begin(), fold_accuracies.end(), 0.0) / n;
    double sq = 0.0;
    for (double a : fold_accuracies) sq += (a - mean_accuracy) * (a - mean_accuracy);
    std_accuracy = std::sqrt(sq / n);
}

std::string report_to_json(const Report& report) {
    json j;
    j["fold_accuracies"] = report.fold_accuracies;
    j["mean_accuracy"] = report.mean_accuracy;
    j["std_accuracy"] = report.std_accuracy;
    j["confusion"] = report.confusion;
    j["class_names"] = report.class_names;
    j["config"] = report.config_echo;
    return j.dump(2);
}

std::string render_report(const Report& report) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "accuracy per fold:";
    for (double a : report.fold_accuracies) os << ' ' << a;
    os << '\n';
    os << "mean accuracy: " << report.mean_accuracy << " +- " << report.std_accuracy
       << '\n';
    if (!report.confusion.empty()) {
        os << "confusion matrix (rows = truth):\n";
        for (std::size_t r = 0; r < report.confusion.size(); ++r) {
            os << "  " << std::setw(12) << report.class_names[r] << " |";
            for (std::size_t c = 0; c < report.confusion[r].size(); ++c)
                os << std::setw(7) << report.confusion[r][c];
            os << '\n';
        }
    }
    os << "wall clock: " << std::setprecision(2) << report.wall_clock_seconds << " s\n";
    if (!report.config_echo.empty()) {
        os << "config:\n";
        for (const auto& [k, v] : report.config_echo) os << "  " << k << " = " << v << '\n';
    }
    return os.str();
}

std::string rank_report_to_json(const RankReport& rep,
                                const std::vector<std::string>& classifier_names,
                                const HolmReport* holm) {
    json j;
    json ranks = json::array();
    for (std::size_t i = 0; i < classifier_names.size(); ++i)
        ranks.push_back(json{{"classifier", classifier_names[i]},
                             {"mean_rank", rep.mean_ranks[i]}});
    j["mean_ranks"] = std::move(ranks);
    j["friedman_chi2"] = rep.chi2;
    j["friedman_p"] = rep.p_value;
    if (holm) {
        json cmp = json::array();
        for (const auto& c : holm->comparisons)
            cmp.push_back(json{{"classifier", classifier_names[c.classifier]},
                               {"z", c.z},
                               {"raw_p", c.raw_p},
                               {"adjusted_p", c.adjusted_p},
                               {"decision", c.reject ? "Reject" : "Not Reject"}});
        j["holm"] = {{"control", classifier_names[holm->control]},
                     {"alpha", holm->alpha},
                     {"comparisons", std::move(cmp)}};
    }
    return j.dump(2);
}

std::string render_rank_report(const RankReport& rep,
                               const std::vector<std::string>& classifier_names,
                               const HolmReport* holm) {
    std::ostringstream os;
    std::size_t w = 10;
    for (const auto& n : classifier_names) w = std::max(w, n.size());

    std::vector<std::size_t> order(classifier_names.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rep.mean_ranks[a] < rep.mean_ranks[b];
    });

    os << std::left << std::setw(static_cast<int>(w) + 2) << "Classifier"
       << "Mean Rank\n";
    os << std::fixed << std::setprecision(2);
    for (std::size_t i : order)
        os << std::left << std::setw(static_cast<int>(w) + 2) << classifier_names[i]
           << rep.mean_ranks[i] << '\n';
    os << "Friedman chi2 = " << rep.chi2 << ", p = " << std::setprecision(6)
       << rep.p_value << '\n';

    if (holm) {
        os << "\nHolm post hoc vs " << classifier_names[holm->control]
           << " (alpha = " << holm->alpha << "):\n";
        for (const auto& c : holm->comparisons)
            os << "  " << std::left << std::setw(static_cast<int>(w) + 2)
               << classifier_names[c.classifier] << " adjusted p = " << std::setw(12)
               << c.adjusted_p << (c.reject ? "Reject" : "Not Reject") << '\n';
    }
    return os.str();
}

std::string render_ablation_table(const std::vector<std::string>& presets,
                                  const std::vector<std::vector<double>>& fold_accuracies) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "fold";
    for (const auto& p : presets) os << std::setw(12) << p;
    os << '\n' << std::fixed << std::setprecision(4);
    const std::size_t folds = fold_accuracies.empty() ? 0 : fold_accuracies[0].size();
    for (std::size_t f = 0; f < folds; ++f) {
        os << std::left << std::setw(10) << (f + 1);
        for (const auto& accs : fold_accuracies) os << std::setw(12) << accs[f];
        os << '\n';
    }
    os << std::left << std::setw(10) << "mean";
    for (const auto& accs : fold_accuracies) {
        const double mean =
            std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
        os << std::setw(12) << mean;
    }
    os << '\n';
    return os.str();
}

}  // namespace somefs
