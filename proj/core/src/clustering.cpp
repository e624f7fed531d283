#include "somefs/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "somefs/errors.hpp"
#include "somefs/rng.hpp"

namespace somefs {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

// k-means++ initialization
Matrix seed_centers(const Matrix& X, std::size_t p, std::mt19937_64& rng) {
    const std::size_t m = X.rows(), dims = X.cols();
    Matrix centers(p, dims);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::size_t first = pick(rng);
    std::copy(X.row(first).begin(), X.row(first).end(), centers.row(0).begin());

    std::vector<double> dist2(m, std::numeric_limits<double>::max());
    for (std::size_t c = 1; c < p; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            dist2[i] = std::min(dist2[i], sq_dist(X.row(i), centers.row(c - 1)));
            total += dist2[i];
        }
        std::size_t chosen = 0;
        if (total <= 0.0) {
            chosen = pick(rng); // all points already covered
        } else {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng), acc = 0.0;
            chosen = m - 1;
            for (std::size_t i = 0; i < m; ++i) {
                acc += dist2[i];
                if (acc >= target) { chosen = i; break; }
            }
        }
        std::copy(X.row(chosen).begin(), X.row(chosen).end(), centers.row(c).begin());
    }
    return centers;
}

PartitionResult lloyd(const Matrix& X, Matrix centers) {
    const std::size_t m = X.rows(), dims = X.cols(), p = centers.rows();
    PartitionResult res;
    res.assignments.assign(m, 0);

    for (int iter = 0; iter < 300; ++iter) {
        for (std::size_t i = 0; i < m; ++i) {
            double best = std::numeric_limits<double>::max();
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < p; ++c) {
                const double d2 = sq_dist(X.row(i), centers.row(c));
                if (d2 < best - 1e-12) { best = d2; best_c = c; }
            }
            res.assignments[i] = best_c;
        }
        Matrix next(p, dims);
        std::vector<std::size_t> count(p, 0);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t c = res.assignments[i];
            ++count[c];
            auto row = X.row(i);
            for (std::size_t d = 0; d < dims; ++d) next(c, d) += row[d];
        }
        for (std::size_t c = 0; c < p; ++c) {
            if (count[c] == 0) {
                // keep an empty cluster's previous center
                std::copy(centers.row(c).begin(), centers.row(c).end(), next.row(c).begin());
            } else {
                for (std::size_t d = 0; d < dims; ++d)
                    next(c, d) /= static_cast<double>(count[c]);
            }
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < p; ++c)
            movement = std::max(movement, std::sqrt(sq_dist(centers.row(c), next.row(c))));
        centers = std::move(next);
        if (movement < 1e-6) break;
    }

    // final assignment + inertia against the converged centers
    res.inertia = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double best = std::numeric_limits<double>::max();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < p; ++c) {
            const double d2 = sq_dist(X.row(i), centers.row(c));
            if (d2 < best - 1e-12) { best = d2; best_c = c; }
        }
        res.assignments[i] = best_c;
        res.inertia += best;
    }
    res.centers = std::move(centers);
    return res;
}

}  // namespace

PartitionResult kmeans(const Matrix& X, std::size_t p, std::uint64_t seed) {
    const std::size_t m = X.rows();
    if (p < 1) throw ConfigError("kmeans: p must be >= 1");
    if (p > m) throw ConfigError("kmeans: p exceeds point count");

    PartitionResult best;
    best.inertia = std::numeric_limits<double>::max();
    for (std::uint64_t restart = 0; restart < 3; ++restart) {
        auto rng = make_rng(derive_seed(seed, restart));
        PartitionResult r = lloyd(X, seed_centers(X, p, rng));
        if (r.inertia < best.inertia) best = std::move(r);
    }
    return best;
}

std::size_t elbow_select(const Matrix& X, std::size_t p_min, std::size_t p_max,
                         std::uint64_t seed) {
    if (p_min < 1 || p_min > p_max) throw ConfigError("elbow_select: empty range");
    if (p_max > X.rows()) throw ConfigError("elbow_select: p_max exceeds point count");
    if (p_min == p_max) return p_min;

    // inertia at [p_min-1, p_max+1] so every candidate has a second difference
    const std::size_t lo = p_min > 1 ? p_min - 1 : p_min;
    const std::size_t hi = p_max < X.rows() ? p_max + 1 : p_max;
    std::vector<double> inertia(hi - lo + 1);
    for (std::size_t p = lo; p <= hi; ++p)
        inertia[p - lo] = kmeans(X, p, derive_seed(seed, p)).inertia;

    std::size_t best_p = p_min;
    double best_curv = -std::numeric_limits<double>::max();
    for (std::size_t p = p_min; p <= p_max; ++p) {
        if (p - 1 < lo || p + 1 > hi) continue;
        const double curv = inertia[p - 1 - lo] - 2.0 * inertia[p - lo] + inertia[p + 1 - lo];
        if (curv > best_curv + 1e-12) { best_curv = curv; best_p = p; }
    }
    return best_p;
}

DensityResult dbscan(const Matrix& X, double eps, std::size_t min_pts) {
    if (eps <= 0.0) throw ConfigError("dbscan: eps must be > 0");
    const std::size_t m = X.rows(), dims = X.cols();
    const double eps2 = eps * eps;

    auto neighbors = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < m; ++j)
            if (sq_dist(X.row(i), X.row(j)) <= eps2) out.push_back(j);
        return out; // includes i itself
    };

    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(m, kUnvisited);
    int next_cluster = 0;

    for (std::size_t i = 0; i < m; ++i) {
        if (label[i] != kUnvisited) continue;
        auto nbrs = neighbors(i);
        if (nbrs.size() < min_pts) { label[i] = kNoise; continue; }
        const int cid = next_cluster++;
        label[i] = cid;
        std::vector<std::size_t> frontier(nbrs.begin(), nbrs.end());
        for (std::size_t f = 0; f < frontier.size(); ++f) {
            const std::size_t q = frontier[f];
            if (label[q] == kNoise) label[q] = cid; // border point
            if (label[q] != kUnvisited) continue;
            label[q] = cid;
            auto qn = neighbors(q);
            if (qn.size() >= min_pts)
                frontier.insert(frontier.end(), qn.begin(), qn.end());
        }
    }

    DensityResult res;
    res.cluster_labels.assign(label.begin(), label.end());
    const std::size_t nc = static_cast<std::size_t>(next_cluster);
    res.centers = Matrix(nc, dims);
    res.variances = Matrix(nc, dims);
    res.cluster_size.assign(nc, 0);

    for (std::size_t i = 0; i < m; ++i) {
        if (label[i] < 0) continue;
        const auto c = static_cast<std::size_t>(label[i]);
        ++res.cluster_size[c];
        auto row = X.row(i);
        for (std::size_t d = 0; d < dims; ++d) res.centers(c, d) += row[d];
    }
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t d = 0; d < dims; ++d)
            res.centers(c, d) /= static_cast<double>(res.cluster_size[c]);
    for (std::size_t i = 0; i < m; ++i) {
        if (label[i] < 0) continue;
        const auto c = static_cast<std::size_t>(label[i]);
        auto row = X.row(i);
        for (std::size_t d = 0; d < dims; ++d) {
            const double diff = row[d] - res.centers(c, d);
            res.variances(c, d) += diff * diff;
        }
    }
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t d = 0; d < dims; ++d)
            res.variances(c, d) /= static_cast<double>(res.cluster_size[c]);
    return res;
}

double auto_eps(const Matrix& X, std::size_t k) {
    const std::size_t m = X.rows();
    if (m <= k) throw ConfigError("auto_eps: need more than k points");
    std::vector<double> kth(m);
    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) {
        d2.clear();
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) d2.push_back(sq_dist(X.row(i), X.row(j)));
        std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
        kth[i] = std::sqrt(d2[k - 1]);
    }
    std::sort(kth.begin(), kth.end());
    const std::size_t mid = m / 2;
    return m % 2 == 1 ? kth[mid] : 0.5 * (kth[mid - 1] + kth[mid]);
}

}  // namespace somefs
