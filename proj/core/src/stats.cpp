#include "somefs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "somefs/errors.hpp"
#include "somefs/special.hpp"

namespace somefs {

void AccuracyMatrix::validate() const {
    if (num_datasets() < 2) throw DataError("accuracy matrix: need N >= 2 datasets");
    if (num_classifiers() < 2) throw DataError("accuracy matrix: need k >= 2 classifiers");
    for (double v : values.data())
        if (!std::isfinite(v)) throw DataError("accuracy matrix: non-finite value");
}

AccuracyMatrix load_accuracy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cur;
        while (std::getline(ss, cur, ',')) {
            auto b = cur.find_first_not_of(" \t\r\n");
            auto e = cur.find_last_not_of(" \t\r\n");
            cells.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
        }
        return cells;
    };

    AccuracyMatrix m;
    auto header = split(line);
    if (header.size() < 3) throw DataError("accuracy matrix: need at least 2 classifiers");
    m.classifier_names.assign(header.begin() + 1, header.end());

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw DataError("accuracy matrix row " + std::to_string(lineno) +
                            ": wrong cell count");
        m.dataset_names.push_back(cells[0]);
        std::vector<double> vals;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            try {
                vals.push_back(std::stod(cells[c]));
            } catch (const std::exception&) {
                throw DataError("accuracy matrix row " + std::to_string(lineno) +
                                ": cannot parse '" + cells[c] + "'");
            }
        }
        rows.push_back(std::move(vals));
    }
    m.values = Matrix(rows.size(), m.classifier_names.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), m.values.row(r).begin());
    m.validate();
    return m;
}

std::vector<double> rank_matrix(const AccuracyMatrix& m) {
    m.validate();
    const std::size_t N = m.num_datasets(), k = m.num_classifiers();
    std::vector<double> mean_ranks(k, 0.0);
    std::vector<std::size_t> order(k);
    for (std::size_t row = 0; row < N; ++row) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return m.values(row, a) > m.values(row, b); // rank 1 = best
        });
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && m.values(row, order[j + 1]) == m.values(row, order[i]))
                ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t t = i; t <= j; ++t) mean_ranks[order[t]] += avg;
            i = j + 1;
        }
    }
    for (double& r : mean_ranks) r /= static_cast<double>(N);
    return mean_ranks;
}

RankReport friedman(const AccuracyMatrix& m) {
    RankReport rep;
    rep.mean_ranks = rank_matrix(m);
    const double N = static_cast<double>(m.num_datasets());
    const double k = static_cast<double>(m.num_classifiers());
    double sumsq = 0.0;
    for (double r : rep.mean_ranks) sumsq += r * r;
    rep.chi2 = 12.0 * N / (k * (k + 1.0)) * (sumsq - k * (k + 1.0) * (k + 1.0) / 4.0);
    rep.chi2 = std::max(rep.chi2, 0.0); // sumsq can dip below by rounding on full ties
    rep.p_value = chi2_sf(rep.chi2, k - 1.0);
    return rep;
}

HolmReport holm_vs_control(const AccuracyMatrix& m, std::size_t control,
                           double alpha) {
    if (control >= m.num_classifiers())
        throw ConfigError("holm_vs_control: control index out of range");
    const auto ranks = rank_matrix(m);
    const double N = static_cast<double>(m.num_datasets());
    const double k = static_cast<double>(m.num_classifiers());
    const double se = std::sqrt(k * (k + 1.0) / (6.0 * N));

    HolmReport rep;
    rep.control = control;
    rep.alpha = alpha;
    for (std::size_t j = 0; j < m.num_classifiers(); ++j) {
        if (j == control) continue;
        HolmComparison c;
        c.classifier = j;
        c.z = (ranks[j] - ranks[control]) / se;
        c.raw_p = normal_two_sided_p(c.z);
        rep.comparisons.push_back(c);
    }
    std::sort(rep.comparisons.begin(), rep.comparisons.end(),
              [](const HolmComparison& a, const HolmComparison& b) {
                  if (a.raw_p != b.raw_p) return a.raw_p < b.raw_p;
                  return a.classifier < b.classifier;
              });
    const std::size_t count = rep.comparisons.size();
    double running = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        auto& c = rep.comparisons[i];
        running = std::max(running,
                           std::min(1.0, static_cast<double>(count - i) * c.raw_p));
        c.adjusted_p = running;
        c.reject = c.adjusted_p < alpha;
    }
    return rep;
}

}  // namespace somefs
