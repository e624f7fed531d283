#include "somefs/rulemine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "somefs/errors.hpp"

namespace somefs {

const char* to_string(LinguisticLabel label) {
    switch (label) {
        case LinguisticLabel::kExLow: return "ex_low";
        case LinguisticLabel::kVeryLow: return "very_low";
        case LinguisticLabel::kLow: return "low";
        case LinguisticLabel::kMed: return "med";
        case LinguisticLabel::kHigh: return "high";
        case LinguisticLabel::kVeryHigh: return "very_high";
        case LinguisticLabel::kExHigh: return "ex_high";
    }
    return "?";
}

LinguisticLabel linguistic_label_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(LinguisticLabel::kExHigh); ++i)
        if (s == to_string(static_cast<LinguisticLabel>(i)))
            return static_cast<LinguisticLabel>(i);
    throw ConfigError("unknown linguistic label: " + s);
}

LinguisticLabel LinguisticBins::classify(double z) const {
    if (z < edges[0]) return LinguisticLabel::kExLow;
    if (z < edges[1]) return LinguisticLabel::kVeryLow;
    if (z < edges[2]) return LinguisticLabel::kLow;
    if (z <= edges[3]) return LinguisticLabel::kMed;
    if (z <= edges[4]) return LinguisticLabel::kHigh;
    if (z <= edges[5]) return LinguisticLabel::kVeryHigh;
    return LinguisticLabel::kExHigh;
}

ItemSet linguistic_map(const FuzzyRule& rule, const FeatureStats& stats,
                       const LinguisticBins& bins) {
    if (rule.dims() != stats.mean.size())
        throw DataError("linguistic_map: rule/stats dimension mismatch");
    ItemSet items;
    items.reserve(rule.dims());
    for (std::size_t d = 0; d < rule.dims(); ++d)
        items.push_back({d, bins.classify(rule.antecedent[d].m)});
    return items;
}

std::vector<Transaction> build_transactions(const EnsembleModel& model,
                                            const Dataset& standardized,
                                            const LinguisticBins& bins) {
    std::vector<Transaction> out;
    // linguistic items per (learner, rule), computed once
    std::vector<std::vector<ItemSet>> rule_items(model.size());
    for (std::size_t t = 0; t < model.size(); ++t) {
        const auto& rb = model.learners[t].rulebase;
        rule_items[t].reserve(rb.size());
        for (const auto& rule : rb.rules)
            rule_items[t].push_back(linguistic_map(rule, model.feature_stats, bins));
    }

    for (std::size_t i = 0; i < standardized.n(); ++i) {
        const auto x = standardized.features.row(i);
        const int truth = standardized.labels[i];
        for (std::size_t t = 0; t < model.size(); ++t) {
            auto [label, trace] = model.learners[t].predict(x);
            if (label != truth) continue;
            const auto gate = trace.rule_gate();
            for (std::size_t k = 0; k < gate.size(); ++k) {
                if (gate[k] <= 0.0) continue;
                Transaction tx;
                tx.items = rule_items[t][k];
                tx.class_id = truth;
                tx.learner_id = t;
                tx.rule_id = k;
                tx.sample_id = i;
                out.push_back(std::move(tx));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// FP-Growth

namespace {

struct FPTree {
    struct Node {
        int item = -1;
        std::size_t count = 0;
        std::size_t parent = 0;
        std::vector<std::pair<int, std::size_t>> children; // item -> node index
    };
    std::vector<Node> nodes;                      // nodes[0] is the root
    std::unordered_map<int, std::vector<std::size_t>> header;

    FPTree() { nodes.emplace_back(); }

    void insert(const std::vector<int>& items, std::size_t count) {
        std::size_t cur = 0;
        for (int item : items) {
            auto& kids = nodes[cur].children;
            auto it = std::find_if(kids.begin(), kids.end(),
                                   [item](const auto& p) { return p.first == item; });
            if (it == kids.end()) {
                const std::size_t idx = nodes.size();
                nodes.push_back({item, 0, cur, {}});
                nodes[cur].children.emplace_back(item, idx);
                header[item].push_back(idx);
                cur = idx;
            } else {
                cur = it->second;
            }
            nodes[cur].count += count;
        }
    }
};

struct Miner {
    std::size_t min_count;
    std::size_t max_len;
    std::vector<std::pair<std::vector<int>, std::size_t>> found; // items + count

    void mine(const std::vector<std::pair<std::vector<int>, std::size_t>>& db,
              std::vector<int>& suffix) {
        // item frequencies in this conditional database
        std::map<int, std::size_t> freq;
        for (const auto& [items, count] : db)
            for (int item : items) freq[item] += count;

        std::vector<int> frequent;
        for (const auto& [item, count] : freq)
            if (count >= min_count) frequent.push_back(item);
        if (frequent.empty()) return;

        // order by ascending count (ties by id) so tree paths share prefixes
        std::vector<int> order = frequent;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (freq[a] != freq[b]) return freq[a] > freq[b];
            return a < b;
        });
        std::unordered_map<int, std::size_t> rank;
        for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

        FPTree tree;
        std::vector<int> filtered;
        for (const auto& [items, count] : db) {
            filtered.clear();
            for (int item : items)
                if (rank.count(item)) filtered.push_back(item);
            std::sort(filtered.begin(), filtered.end(),
                      [&](int a, int b) { return rank[a] < rank[b]; });
            if (!filtered.empty()) tree.insert(filtered, count);
        }

        // grow patterns from the least frequent end
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int item = *it;
            suffix.push_back(item);
            found.emplace_back(suffix, freq[item]);
            if (suffix.size() < max_len) {
                std::vector<std::pair<std::vector<int>, std::size_t>> cond;
                for (std::size_t node : tree.header[item]) {
                    std::vector<int> path;
                    std::size_t cur = tree.nodes[node].parent;
                    while (cur != 0) {
                        path.push_back(tree.nodes[cur].item);
                        cur = tree.nodes[cur].parent;
                    }
                    if (!path.empty()) {
                        std::reverse(path.begin(), path.end());
                        cond.emplace_back(std::move(path), tree.nodes[node].count);
                    }
                }
                if (!cond.empty()) mine(cond, suffix);
            }
            suffix.pop_back();
        }
    }
};

std::size_t support_threshold(double min_support, std::size_t n) {
    const double raw = min_support * static_cast<double>(n);
    auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::max<std::size_t>(count, 1);
}

}  // namespace

std::vector<FrequentItemset> fpgrowth(const std::vector<Transaction>& transactions,
                                      double min_support, std::size_t max_len) {
    if (min_support <= 0.0) throw ConfigError("fpgrowth: min_support must be positive");
    std::vector<FrequentItemset> out;
    if (max_len == 0 || min_support > 1.0) return out; // nothing can qualify above 1

    // class partition
    std::map<int, std::vector<const Transaction*>> by_class;
    for (const auto& tx : transactions) by_class[tx.class_id].push_back(&tx);

    for (const auto& [class_id, txs] : by_class) {
        // dense item ids for this class
        std::map<LinguisticItem, int> to_id;
        std::vector<LinguisticItem> to_item;
        std::vector<std::pair<std::vector<int>, std::size_t>> db;
        db.reserve(txs.size());
        for (const Transaction* tx : txs) {
            std::vector<int> encoded;
            encoded.reserve(tx->items.size());
            for (const auto& item : tx->items) {
                auto it = to_id.find(item);
                if (it == to_id.end()) {
                    it = to_id.emplace(item, static_cast<int>(to_item.size())).first;
                    to_item.push_back(item);
                }
                encoded.push_back(it->second);
            }
            std::sort(encoded.begin(), encoded.end());
            encoded.erase(std::unique(encoded.begin(), encoded.end()), encoded.end());
            db.emplace_back(std::move(encoded), 1);
        }

        Miner miner;
        miner.min_count = support_threshold(min_support, txs.size());
        miner.max_len = max_len;
        std::vector<int> suffix;
        miner.mine(db, suffix);

        for (auto& [ids, count] : miner.found) {
            FrequentItemset fs;
            fs.class_id = class_id;
            fs.count = count;
            fs.support = static_cast<double>(count) / static_cast<double>(txs.size());
            fs.items.reserve(ids.size());
            for (int id : ids) fs.items.push_back(to_item[id]);
            std::sort(fs.items.begin(), fs.items.end());
            out.push_back(std::move(fs));
        }
    }

    std::sort(out.begin(), out.end(), [](const FrequentItemset& a, const FrequentItemset& b) {
        if (a.class_id != b.class_id) return a.class_id < b.class_id;
        if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
        return a.items < b.items;
    });
    return out;
}

std::vector<FrequentItemset> select_maximal(const std::vector<FrequentItemset>& itemsets,
                                            std::size_t min_len) {
    std::vector<FrequentItemset> out;
    for (const auto& fs : itemsets) {
        if (fs.items.size() < min_len) continue;
        bool subsumed = false;
        for (const auto& other : itemsets) {
            if (other.class_id != fs.class_id) continue;
            if (other.items.size() <= fs.items.size()) continue;
            if (std::includes(other.items.begin(), other.items.end(),
                              fs.items.begin(), fs.items.end())) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) out.push_back(fs);
    }
    return out;
}

std::vector<StableRule> validate_rules(const std::vector<FrequentItemset>& itemsets,
                                       const EnsembleModel& model,
                                       const Dataset& standardized,
                                       const LinguisticBins& bins) {
    // Average (center, sigma) of every model rule per (feature, label).
    struct Accum {
        double m_sum = 0.0, s_sum = 0.0;
        std::size_t n = 0;
    };
    std::map<LinguisticItem, Accum> pooled;
    for (const auto& learner : model.learners) {
        for (const auto& rule : learner.rulebase.rules) {
            const auto items = linguistic_map(rule, model.feature_stats, bins);
            for (const auto& item : items) {
                auto& acc = pooled[item];
                acc.m_sum += rule.antecedent[item.feature].m;
                acc.s_sum += rule.antecedent[item.feature].sigma;
                ++acc.n;
            }
        }
    }

    std::vector<StableRule> out;
    out.reserve(itemsets.size());
    for (const auto& fs : itemsets) {
        StableRule sr;
        sr.items = fs.items;
        sr.class_id = fs.class_id;
        sr.support = fs.support;

        std::vector<GaussianMF> mfs;
        mfs.reserve(fs.items.size());
        for (const auto& item : fs.items) {
            auto it = pooled.find(item);
            if (it == pooled.end())
                throw DataError(std::string("validate_rules: no concrete rule maps feature ") +
                                std::to_string(item.feature) + " to '" +
                                to_string(item.label) + "'");
            const auto& acc = it->second;
            const double n = static_cast<double>(acc.n);
            mfs.push_back({acc.m_sum / n, acc.s_sum / n});
        }

        double strength_sum = 0.0;
        std::size_t class_rows = 0;
        for (std::size_t i = 0; i < standardized.n(); ++i) {
            if (standardized.labels[i] != fs.class_id) continue;
            ++class_rows;
            const auto x = standardized.features.row(i);
            double firing = 1.0;
            for (std::size_t j = 0; j < fs.items.size(); ++j)
                firing *= mfs[j].grade(x[fs.items[j].feature]);
            strength_sum += firing;
        }
        sr.firing_strength =
            class_rows == 0 ? 0.0 : strength_sum / static_cast<double>(class_rows);
        out.push_back(std::move(sr));
    }

    std::sort(out.begin(), out.end(), [](const StableRule& a, const StableRule& b) {
        if (a.firing_strength != b.firing_strength)
            return a.firing_strength > b.firing_strength;
        if (a.class_id != b.class_id) return a.class_id < b.class_id;
        return a.items < b.items;
    });
    return out;
}

std::vector<StableRule> extract_stable_rules(const EnsembleModel& model,
                                             const Dataset& standardized,
                                             const MiningOptions& options) {
    const auto transactions = build_transactions(model, standardized, options.bins);
    const auto frequent = fpgrowth(transactions, options.min_support, options.max_len);
    const auto maximal = select_maximal(frequent, options.min_len);
    return validate_rules(maximal, model, standardized, options.bins);
}

std::string render_stable_rules(const std::vector<StableRule>& rules,
                                const std::vector<std::string>& feature_names,
                                const std::vector<std::string>& class_names) {
    std::ostringstream os;
    if (rules.empty()) {
        os << "(no stable rules)\n";
        return os.str();
    }

    std::vector<std::size_t> features;
    for (const auto& r : rules)
        for (const auto& item : r.items) features.push_back(item.feature);
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());

    std::size_t name_w = std::string("firing_strength").size();
    for (std::size_t f : features) name_w = std::max(name_w, feature_names[f].size());

    auto cell = [](const std::string& s, std::size_t w) {
        std::string out = s;
        out.resize(std::max(w, s.size()), ' ');
        return out;
    };

    constexpr std::size_t col_w = 13;
    os << cell("", name_w);
    for (std::size_t i = 0; i < rules.size(); ++i)
        os << " | " << cell("Rule " + std::to_string(i + 1), col_w);
    os << '\n';
    os << std::string(name_w, '-');
    for (std::size_t i = 0; i < rules.size(); ++i) os << "-+-" << std::string(col_w, '-');
    os << '\n';

    for (std::size_t f : features) {
        os << cell(feature_names[f], name_w);
        for (const auto& r : rules) {
            std::string text;
            for (const auto& item : r.items)
                if (item.feature == f) text = to_string(item.label);
            os << " | " << cell(text, col_w);
        }
        os << '\n';
    }

    os << cell("class", name_w);
    for (const auto& r : rules)
        os << " | " << cell(class_names[static_cast<std::size_t>(r.class_id)], col_w);
    os << '\n';

    os << cell("support", name_w);
    for (const auto& r : rules) {
        std::ostringstream v;
        v.precision(3);
        v << r.support;
        os << " | " << cell(v.str(), col_w);
    }
    os << '\n';

    os << cell("firing_strength", name_w);
    for (const auto& r : rules) {
        std::ostringstream v;
        v.precision(3);
        v << r.firing_strength;
        os << " | " << cell(v.str(), col_w);
    }
    os << '\n';
    return os.str();
}

}  // namespace somefs
