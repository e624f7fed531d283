// Shared test utilities: random rulebases, an independent re-implementation
// of the inference equations, and a finite-difference gradient oracle.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "somefs/easonfin.hpp"
#include "somefs/rng.hpp"

namespace somefs::testing {

inline RuleBase random_rulebase(std::size_t K, std::size_t D, std::size_t C,
                                std::mt19937_64& rng, double consequent_scale = 1.0) {
    std::uniform_real_distribution<double> center(-2.0, 2.0);
    std::uniform_real_distribution<double> width(0.3, 2.0);
    std::uniform_real_distribution<double> coef(-consequent_scale, consequent_scale);
    RuleBase rb;
    rb.rule_max = K;
    rb.dims = D;
    rb.num_classes = C;
    for (std::size_t k = 0; k < K; ++k) {
        FuzzyRule rule;
        rule.antecedent.resize(D);
        for (std::size_t d = 0; d < D; ++d) rule.antecedent[d] = {center(rng), width(rng)};
        rule.consequent = Matrix(C, D + 1);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t d = 0; d <= D; ++d) rule.consequent(c, d) = coef(rng);
        rb.rules.push_back(std::move(rule));
    }
    return rb;
}

inline std::vector<double> random_point(std::size_t D, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> x(D);
    for (double& v : x) v = u(rng);
    return x;
}

// Step-by-step oracle for the gated path, written independently of the
// library implementation (plain loops, no shared code).
struct OracleResult {
    std::vector<double> f, f_bar, f_prime, f_dprime, y;
    std::vector<std::vector<double>> y_k;
};

inline OracleResult oracle_gated_forward(const RuleBase& rb,
                                         const std::vector<double>& x) {
    const std::size_t K = rb.size(), D = rb.dims, C = rb.num_classes;
    OracleResult r;
    r.f.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        double prod = 1.0;
        for (std::size_t d = 0; d < D; ++d) {
            const double m = rb.rules[k].antecedent[d].m;
            const double s = rb.rules[k].antecedent[d].sigma;
            prod *= std::exp(-(x[d] - m) * (x[d] - m) / (2 * s * s));
        }
        r.f[k] = prod;
    }
    double fsum = 0;
    for (double v : r.f) fsum += v;
    r.f_bar.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        r.f_bar[k] = fsum > 0 ? r.f[k] / fsum : 1.0 / static_cast<double>(K);

    r.f_prime.resize(K);
    r.f_dprime.resize(K);
    if (K == 1) {
        r.f_dprime[0] = 1.0;
    } else {
        double mu = 0;
        for (double v : r.f_bar) mu += v;
        mu /= static_cast<double>(K);
        double var = 0;
        for (double v : r.f_bar) var += (v - mu) * (v - mu);
        var /= static_cast<double>(K);
        for (std::size_t k = 0; k < K; ++k) {
            r.f_prime[k] = (r.f_bar[k] - mu) / std::sqrt(var + 1e-5);
            r.f_dprime[k] = r.f_prime[k] > 0 ? r.f_prime[k] : 0.0;
        }
    }

    r.y_k.assign(K, std::vector<double>(C));
    for (std::size_t k = 0; k < K; ++k) {
        double mx = -1e300;
        for (std::size_t c = 0; c < C; ++c) {
            double z = rb.rules[k].consequent(c, 0);
            for (std::size_t d = 0; d < D; ++d)
                z += rb.rules[k].consequent(c, d + 1) * x[d];
            r.y_k[k][c] = z;
            mx = std::max(mx, z);
        }
        double sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            r.y_k[k][c] = std::exp(r.y_k[k][c] - mx);
            sum += r.y_k[k][c];
        }
        for (std::size_t c = 0; c < C; ++c) r.y_k[k][c] /= sum;
    }

    bool all_zero = true;
    for (double g : r.f_dprime)
        if (g > 0) all_zero = false;
    const std::vector<double>& gate = all_zero && K > 1 ? r.f_bar : r.f_dprime;
    r.y.assign(C, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t c = 0; c < C; ++c) r.y[c] += gate[k] * r.y_k[k][c];
    return r;
}

// Layer-by-layer oracle for the classic path.
inline std::vector<double> oracle_classic_forward(const RuleBase& rb,
                                                  const std::vector<double>& x) {
    const std::size_t K = rb.size(), D = rb.dims, C = rb.num_classes;
    std::vector<double> f(K);
    for (std::size_t k = 0; k < K; ++k) {
        double prod = 1.0;
        for (std::size_t d = 0; d < D; ++d) {
            const double m = rb.rules[k].antecedent[d].m;
            const double s = rb.rules[k].antecedent[d].sigma;
            prod *= std::exp(-(x[d] - m) * (x[d] - m) / (2 * s * s));
        }
        f[k] = prod;
    }
    double fsum = 0;
    for (double v : f) fsum += v;
    std::vector<double> out(C, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const double fb = fsum > 0 ? f[k] / fsum : 1.0 / static_cast<double>(K);
        for (std::size_t c = 0; c < C; ++c) {
            double lin = rb.rules[k].consequent(c, 0);
            for (std::size_t d = 0; d < D; ++d)
                lin += rb.rules[k].consequent(c, d + 1) * x[d];
            out[c] += fb * lin;
        }
    }
    double mx = -1e300;
    for (double v : out) mx = std::max(mx, v);
    double sum = 0;
    for (double& v : out) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : out) v /= sum;
    return out;
}

// Central finite differences of the training loss over every parameter.
// Returns the largest relative error against the analytic gradient.
inline double max_gradient_error(const RuleBase& rb, const std::vector<double>& x,
                                 int label, bool gated, double h = 1e-5) {
    Gradients grad;
    grad.resize_like(rb);
    grad.zero();
    loss_and_gradient(rb, x, label, gated, &grad);

    auto rel = [](double a, double n) {
        return std::fabs(a - n) / std::max({1e-6, std::fabs(a), std::fabs(n)});
    };
    double worst = 0.0;
    RuleBase probe = rb;
    auto fd = [&](double& param) {
        const double orig = param;
        param = orig + h;
        const double up = loss_and_gradient(probe, x, label, gated, nullptr);
        param = orig - h;
        const double down = loss_and_gradient(probe, x, label, gated, nullptr);
        param = orig;
        return (up - down) / (2 * h);
    };

    for (std::size_t k = 0; k < rb.size(); ++k) {
        for (std::size_t d = 0; d < rb.dims; ++d) {
            worst = std::max(worst, rel(grad.d_center(k, d),
                                        fd(probe.rules[k].antecedent[d].m)));
            worst = std::max(worst, rel(grad.d_sigma(k, d),
                                        fd(probe.rules[k].antecedent[d].sigma)));
        }
        for (std::size_t c = 0; c < rb.num_classes; ++c)
            for (std::size_t d = 0; d <= rb.dims; ++d)
                worst = std::max(worst, rel(grad.d_consequent[k](c, d),
                                            fd(probe.rules[k].consequent(c, d))));
    }
    return worst;
}

// Rejects configurations parked on a kink (ReLU boundary, probability
// clip) where finite differences are meaningless.
inline bool smooth_at(const RuleBase& rb, const std::vector<double>& x, int label,
                      bool gated) {
    if (!gated) {
        const auto y = oracle_classic_forward(rb, x);
        return y[static_cast<std::size_t>(label)] > 1e-5;
    }
    const auto r = oracle_gated_forward(rb, x);
    for (double fp : r.f_prime)
        if (std::fabs(fp) < 1e-3) return false;
    double total = 0;
    for (double v : r.y) total += v;
    if (total <= 1e-6) return false;
    const double p = r.y[static_cast<std::size_t>(label)] / (total + 1e-12);
    return p > 1e-5;
}

}  // namespace somefs::testing
