#include "somefs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "somefs/errors.hpp"
#include "somefs/rng.hpp"

namespace somefs {

void Dataset::validate() const {
    if (features.rows() != labels.size())
        throw DataError("dataset: feature rows != label count");
    if (dims() < 1) throw DataError("dataset: D must be >= 1");
    if (num_classes() < 2) throw DataError("dataset: fewer than 2 classes");
    if (n() < 1) throw DataError("dataset: empty");
    const int c = static_cast<int>(num_classes());
    for (int label : labels)
        if (label < 0 || label >= c)
            throw DataError("dataset: label index out of range");
    if (feature_names.size() != dims())
        throw DataError("dataset: feature_names size mismatch");
}

Dataset Dataset::select(std::span<const std::size_t> idx) const {
    Dataset out;
    out.features = features.take_rows(idx);
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) out.labels.push_back(labels[i]);
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) cells.push_back(cur);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);
    if (header.empty()) throw DataError("empty header row: " + path);

    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) { label_idx = i; break; }
    if (label_idx == header.size()) {
        // fall back to a numeric column index
        int idx = -1;
        auto t = trim(label_column);
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), idx);
        if (ec == std::errc() && p == t.data() + t.size() && idx >= 0 &&
            static_cast<std::size_t>(idx) < header.size()) {
            label_idx = static_cast<std::size_t>(idx);
        } else {
            throw DataError("label column not found: " + label_column);
        }
    }
    if (header.size() < 2)
        throw DataError("need at least one feature column besides the label");

    const std::size_t dims = header.size() - 1;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        std::vector<double> feats;
        feats.reserve(dims);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) { row_labels.push_back(trim(cells[c])); continue; }
            const std::string cell = trim(cells[c]);
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
                feats.push_back(v);
            } catch (const std::exception&) {
                throw DataError("row " + std::to_string(lineno) + ", column '" +
                                header[c] + "': cannot parse '" + cell + "' as a number");
            }
        }
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw DataError("no data rows in " + path);

    Dataset ds;
    ds.feature_names.reserve(dims);
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_idx) ds.feature_names.push_back(header[c]);

    std::unordered_map<std::string, int> class_ids;
    ds.labels.reserve(rows.size());
    for (const auto& name : row_labels) {
        auto it = class_ids.find(name);
        if (it == class_ids.end()) {
            int id = static_cast<int>(ds.class_names.size());
            class_ids.emplace(name, id);
            ds.class_names.push_back(name);
            ds.labels.push_back(id);
        } else {
            ds.labels.push_back(it->second);
        }
    }
    if (ds.class_names.size() < 2)
        throw DataError("fewer than 2 classes in " + path);

    ds.features = Matrix(rows.size(), dims);
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), ds.features.row(r).begin());
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path,
              const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out.precision(17);
    for (std::size_t d = 0; d < ds.dims(); ++d) out << ds.feature_names[d] << ',';
    out << label_column << '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        auto row = ds.features.row(i);
        for (double v : row) out << v << ',';
        out << ds.class_names[ds.labels[i]] << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::pair<Dataset, FeatureStats> standardize(const Dataset& ds) {
    const std::size_t n = ds.n(), dims = ds.dims();
    FeatureStats st;
    st.mean.assign(dims, 0.0);
    st.std.assign(dims, 1.0);
    for (std::size_t d = 0; d < dims; ++d) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += ds.features(i, d);
        const double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = ds.features(i, d) - mean;
            sq += c * c;
        }
        const double sd = std::sqrt(sq / static_cast<double>(n));
        st.mean[d] = mean;
        st.std[d] = sd < 1e-12 ? 1.0 : sd;
    }
    return {apply_standardize(ds, st), st};
}

Dataset apply_standardize(const Dataset& ds, const FeatureStats& stats) {
    if (stats.mean.size() != ds.dims() || stats.std.size() != ds.dims())
        throw DataError("feature stats dimension mismatch");
    Dataset out = ds;
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (std::size_t d = 0; d < ds.dims(); ++d)
            out.features(i, d) = (ds.features(i, d) - stats.mean[d]) / stats.std[d];
    return out;
}

Dataset add_gaussian_noise(const Dataset& ds, std::uint64_t seed) {
    Dataset out = ds;
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : out.features.data()) v += gauss(rng);
    return out;
}

BootstrapSample bootstrap(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("bootstrap: empty dataset");
    BootstrapSample bs;
    bs.in_bag.reserve(n);
    auto rng = make_rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = pick(rng);
        bs.in_bag.push_back(j);
        seen[j] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) bs.oob.insert(i);
    return bs;
}

BootstrapSample bootstrap(const Dataset& ds, std::uint64_t seed) {
    return bootstrap(ds.n(), seed);
}

FoldPlan kfold(const Dataset& ds, std::size_t k, bool stratified,
               std::uint64_t seed, std::string* warning) {
    const std::size_t n = ds.n();
    if (k < 2) throw ConfigError("kfold: k must be >= 2");
    if (k > n) throw ConfigError("kfold: k exceeds sample count");

    if (stratified) {
        std::vector<std::size_t> class_count(ds.num_classes(), 0);
        for (int label : ds.labels) ++class_count[label];
        for (std::size_t c = 0; c < class_count.size(); ++c) {
            if (class_count[c] < k) {
                if (warning)
                    *warning = "class '" + ds.class_names[c] + "' has " +
                               std::to_string(class_count[c]) +
                               " samples < k; falling back to unstratified folds";
                stratified = false;
                break;
            }
        }
    }

    FoldPlan plan;
    plan.stratified = stratified;
    plan.seed = seed;
    std::vector<std::vector<std::size_t>> test_sets(k);
    auto rng = make_rng(seed);

    if (stratified) {
        // shuffle within each class, then deal class members round-robin
        for (std::size_t c = 0; c < ds.num_classes(); ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (ds.labels[i] == static_cast<int>(c)) members.push_back(i);
            std::shuffle(members.begin(), members.end(), rng);
            for (std::size_t j = 0; j < members.size(); ++j)
                test_sets[j % k].push_back(members[j]);
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t j = 0; j < n; ++j) test_sets[j % k].push_back(order[j]);
    }

    plan.folds.resize(k);
    for (std::size_t f = 0; f < k; ++f) {
        auto& test = test_sets[f];
        std::sort(test.begin(), test.end());
        std::vector<bool> in_test(n, false);
        for (std::size_t i : test) in_test[i] = true;
        auto& fold = plan.folds[f];
        fold.test = test;
        fold.train.reserve(n - test.size());
        for (std::size_t i = 0; i < n; ++i)
            if (!in_test[i]) fold.train.push_back(i);
    }
    return plan;
}

}  // namespace somefs
