#include "somefs/easonfin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "somefs/errors.hpp"
#include "somefs/rng.hpp"

namespace somefs {

double GaussianMF::grade(double x) const {
    const double d = x - m;
    return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

void LearnerConfig::validate() const {
    if (!(phi_in > 0.0 && phi_in < 1.0))
        throw ConfigError("phi_in must lie in (0,1)");
    if (rule_max < 1) throw ConfigError("rule_max must be >= 1");
    if (sigma_init <= 0.0) throw ConfigError("sigma_init must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
    if (initial_clusters < 1) throw ConfigError("initial_clusters must be >= 1");
    if (use_elbow && (elbow_min < 1 || elbow_min > elbow_max))
        throw ConfigError("elbow range is empty");
}

void Gradients::resize_like(const RuleBase& rb) {
    d_center = Matrix(rb.size(), rb.dims);
    d_sigma = Matrix(rb.size(), rb.dims);
    d_consequent.assign(rb.size(), Matrix(rb.num_classes, rb.dims + 1));
}

void Gradients::zero() {
    std::fill(d_center.data().begin(), d_center.data().end(), 0.0);
    std::fill(d_sigma.data().begin(), d_sigma.data().end(), 0.0);
    for (auto& m : d_consequent)
        std::fill(m.data().begin(), m.data().end(), 0.0);
}

RuleBase init_structure(const Matrix& X, std::size_t p, double sigma_init,
                        std::size_t num_classes, std::size_t rule_max,
                        std::uint64_t seed) {
    if (p < 1) throw ConfigError("init_structure: p must be >= 1");
    if (p > X.rows()) throw ConfigError("init_structure: p exceeds sample count");
    PartitionResult part = kmeans(X, p, seed);

    RuleBase rb;
    rb.rule_max = rule_max;
    rb.dims = X.cols();
    rb.num_classes = num_classes;
    rb.rules.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
        FuzzyRule rule;
        rule.antecedent.resize(rb.dims);
        auto center = part.centers.row(i);
        for (std::size_t d = 0; d < rb.dims; ++d)
            rule.antecedent[d] = {center[d], sigma_init};
        rule.consequent = Matrix(num_classes, rb.dims + 1);
        rb.rules.push_back(std::move(rule));
    }
    return rb;
}

std::vector<double> membership(std::span<const double> x, const FuzzyRule& rule) {
    std::vector<double> u(rule.dims());
    for (std::size_t d = 0; d < rule.dims(); ++d)
        u[d] = rule.antecedent[d].grade(x[d]);
    return u;
}

namespace {

// log of Eq. (4)'s product; products of many small grades underflow, sums
// of logs do not.
double log_firing(std::span<const double> x, const FuzzyRule& rule) {
    double acc = 0.0;
    for (std::size_t d = 0; d < rule.dims(); ++d) {
        const auto& mf = rule.antecedent[d];
        const double diff = x[d] - mf.m;
        acc -= (diff * diff) / (2.0 * mf.sigma * mf.sigma);
    }
    return acc;
}

void softmax_inplace(std::span<double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& e : v) {
        e = std::exp(e - mx);
        sum += e;
    }
    for (double& e : v) e /= sum;
}

void rule_logits(const FuzzyRule& rule, std::span<const double> x,
                 std::span<double> out) {
    const std::size_t C = rule.num_classes(), D = rule.dims();
    for (std::size_t c = 0; c < C; ++c) {
        double z = rule.consequent(c, 0);
        for (std::size_t d = 0; d < D; ++d) z += rule.consequent(c, d + 1) * x[d];
        out[c] = z;
    }
}

void fill_strengths(std::span<const double> x, const RuleBase& rb,
                    ForwardTrace& t) {
    const std::size_t K = rb.size(), D = rb.dims;
    t.u = Matrix(K, D);
    t.f.resize(K);
    t.f_bar.resize(K);
    double fsum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& rule = rb.rules[k];
        double logf = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            const double g = rule.antecedent[d].grade(x[d]);
            t.u(k, d) = g;
            const double diff = x[d] - rule.antecedent[d].m;
            logf -= (diff * diff) / (2.0 * rule.antecedent[d].sigma * rule.antecedent[d].sigma);
        }
        t.f[k] = std::exp(logf);
        fsum += t.f[k];
    }
    if (fsum > 0.0) {
        for (std::size_t k = 0; k < K; ++k) t.f_bar[k] = t.f[k] / fsum;
    } else {
        std::fill(t.f_bar.begin(), t.f_bar.end(), 1.0 / static_cast<double>(K));
    }
}

}  // namespace

ForwardTrace forward(std::span<const double> x, const RuleBase& rb) {
    const std::size_t K = rb.size(), C = rb.num_classes;
    ForwardTrace t;
    fill_strengths(x, rb, t);

    t.f_prime.resize(K);
    t.f_dprime.resize(K);
    if (K == 1) {
        // layer norm over a single value is degenerate; gate fixed open
        t.ln_bypass = true;
        t.f_prime[0] = t.f_bar[0];
        t.f_dprime[0] = 1.0;
    } else {
        double mu = 0.0;
        for (double v : t.f_bar) mu += v;
        mu /= static_cast<double>(K);
        double var = 0.0;
        for (double v : t.f_bar) var += (v - mu) * (v - mu);
        var /= static_cast<double>(K);
        t.ln_mean = mu;
        t.ln_var = var;
        const double inv = 1.0 / std::sqrt(var + kLnEpsilon);
        for (std::size_t k = 0; k < K; ++k) {
            t.f_prime[k] = (t.f_bar[k] - mu) * inv;
            t.f_dprime[k] = std::max(0.0, t.f_prime[k]);
        }
    }

    t.y_k = Matrix(K, C);
    for (std::size_t k = 0; k < K; ++k) {
        rule_logits(rb.rules[k], x, t.y_k.row(k));
        softmax_inplace(t.y_k.row(k));
    }

    std::span<const double> gate = t.f_dprime;
    if (!t.ln_bypass) {
        // identical normalized strengths give f' that is all rounding noise;
        // the output must never be a near-zero vector
        bool all_zero = true;
        for (double g : t.f_dprime)
            if (g > kGateZeroTol) { all_zero = false; break; }
        if (all_zero) {
            t.gate_fallback = true;
            gate = t.f_bar;
        }
    }
    t.y.assign(C, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t c = 0; c < C; ++c) t.y[c] += gate[k] * t.y_k(k, c);
    return t;
}

ForwardTrace sonfin_forward_trace(std::span<const double> x, const RuleBase& rb) {
    const std::size_t K = rb.size(), C = rb.num_classes;
    ForwardTrace t;
    fill_strengths(x, rb, t);
    t.y_k = Matrix(K, C);
    t.y.assign(C, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        rule_logits(rb.rules[k], x, t.y_k.row(k));
        for (std::size_t c = 0; c < C; ++c) {
            t.y_k(k, c) *= t.f_bar[k];
            t.y[c] += t.y_k(k, c);
        }
    }
    softmax_inplace(t.y);
    return t;
}

std::vector<double> sonfin_forward(std::span<const double> x, const RuleBase& rb) {
    return sonfin_forward_trace(x, rb).y;
}

ActivationSimilarity activation_and_similarity(std::span<const double> center,
                                               std::span<const double> sigma,
                                               const RuleBase& rb,
                                               ActivationScale scale) {
    ActivationSimilarity out;
    if (rb.rules.empty()) return out;
    const std::size_t D = center.size();
    for (const auto& rule : rb.rules) {
        const double logf = log_firing(center, rule);
        const double act = scale == ActivationScale::kGeometricMean
                               ? std::exp(logf / static_cast<double>(D))
                               : std::exp(logf);
        out.max_activation = std::max(out.max_activation, act);

        double overlap = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            const auto& mf = rule.antecedent[d];
            const double diff = center[d] - mf.m;
            const double denom = mf.sigma * mf.sigma + sigma[d] * sigma[d];
            overlap += std::exp(-(diff * diff) / denom);
        }
        out.similarity = std::max(out.similarity, overlap / static_cast<double>(D));
    }
    return out;
}

std::size_t grow_rules(RuleBase& rb, const DensityResult& density,
                       const LearnerConfig& cfg) {
    std::size_t added = 0;
    std::vector<double> sigma(rb.dims);
    for (std::size_t c = 0; c < density.num_clusters(); ++c) {
        if (rb.size() >= rb.rule_max) break;
        auto center = density.centers.row(c);
        for (std::size_t d = 0; d < rb.dims; ++d)
            sigma[d] = std::sqrt(density.variances(c, d));
        const auto js = activation_and_similarity(center, sigma, rb, cfg.activation_scale);
        if (js.max_activation < cfg.phi_in && js.similarity < cfg.s_thresh) {
            FuzzyRule rule;
            rule.antecedent.resize(rb.dims);
            for (std::size_t d = 0; d < rb.dims; ++d)
                rule.antecedent[d] = {center[d], std::max(sigma[d], kSigmaMin)};
            rule.consequent = Matrix(rb.num_classes, rb.dims + 1);
            rb.rules.push_back(std::move(rule));
            ++added;
        }
    }
    return added;
}

// ---------------------------------------------------------------------------
// Loss and gradients

double loss_and_gradient(const RuleBase& rb, std::span<const double> x,
                         int label, bool gated, Gradients* grad) {
    const std::size_t K = rb.size(), C = rb.num_classes, D = rb.dims;
    const auto lbl = static_cast<std::size_t>(label);

    ForwardTrace t = gated ? forward(x, rb) : sonfin_forward_trace(x, rb);

    double loss;
    std::vector<double> dy(C, 0.0); // dL/d(final pre-normalization output)
    if (gated) {
        double total = 0.0;
        for (double v : t.y) total += v;
        const double denom = total + kRenormEps;
        const double p = t.y[lbl] / denom;
        loss = -std::log(std::clamp(p, kProbClip, 1.0));
        if (grad && p > kProbClip) {
            // L = -log(y_l / denom):  dL/dy_c = 1/denom - [c==l]/y_l
            for (std::size_t c = 0; c < C; ++c) dy[c] = 1.0 / denom;
            dy[lbl] -= 1.0 / t.y[lbl];
        } else if (grad) {
            return loss; // clipped region: flat
        }
    } else {
        const double p = t.y[lbl]; // already softmaxed
        loss = -std::log(std::clamp(p, kProbClip, 1.0));
        if (grad && p > kProbClip) {
            for (std::size_t c = 0; c < C; ++c) dy[c] = t.y[c];
            dy[lbl] -= 1.0;
        } else if (grad) {
            return loss;
        }
    }
    if (!grad) return loss;

    std::vector<double> df_bar(K, 0.0);

    if (gated) {
        std::span<const double> gate =
            t.gate_fallback ? std::span<const double>(t.f_bar)
                            : std::span<const double>(t.f_dprime);
        std::vector<double> dgate(K, 0.0);
        std::vector<double> dz(C);
        for (std::size_t k = 0; k < K; ++k) {
            double dot = 0.0; // sum_c dL/dyhat_kc * yhat_kc, for softmax jac
            for (std::size_t c = 0; c < C; ++c) {
                dgate[k] += dy[c] * t.y_k(k, c);
                dot += gate[k] * dy[c] * t.y_k(k, c);
            }
            for (std::size_t c = 0; c < C; ++c)
                dz[c] = t.y_k(k, c) * (gate[k] * dy[c]) - t.y_k(k, c) * dot;
            auto& dcons = grad->d_consequent[k];
            for (std::size_t c = 0; c < C; ++c) {
                dcons(c, 0) += dz[c];
                for (std::size_t d = 0; d < D; ++d) dcons(c, d + 1) += dz[c] * x[d];
            }
        }

        if (t.ln_bypass) {
            return loss; // gate constant, no antecedent gradient
        }
        if (t.gate_fallback) {
            df_bar = dgate; // output used f_bar directly
        } else {
            // ReLU then layer-norm backward
            std::vector<double> dfp(K);
            for (std::size_t k = 0; k < K; ++k)
                dfp[k] = t.f_prime[k] > 0.0 ? dgate[k] : 0.0;
            const double v = t.ln_var + kLnEpsilon;
            const double inv = 1.0 / std::sqrt(v);
            double mean_dp = 0.0, proj = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                mean_dp += dfp[k];
                proj += dfp[k] * (t.f_bar[k] - t.ln_mean);
            }
            mean_dp /= static_cast<double>(K);
            proj /= static_cast<double>(K);
            for (std::size_t k = 0; k < K; ++k)
                df_bar[k] = (dfp[k] - mean_dp - (t.f_bar[k] - t.ln_mean) * proj / v) * inv;
        }
    } else {
        std::vector<double> logits(C);
        std::vector<double> dz(C);
        for (std::size_t k = 0; k < K; ++k) {
            rule_logits(rb.rules[k], x, logits);
            for (std::size_t c = 0; c < C; ++c) {
                df_bar[k] += dy[c] * logits[c];
                dz[c] = dy[c] * t.f_bar[k];
            }
            auto& dcons = grad->d_consequent[k];
            for (std::size_t c = 0; c < C; ++c) {
                dcons(c, 0) += dz[c];
                for (std::size_t d = 0; d < D; ++d) dcons(c, d + 1) += dz[c] * x[d];
            }
        }
    }

    // Eq. (6) backward; a zero firing sum froze f_bar at uniform
    double fsum = 0.0;
    for (double v : t.f) fsum += v;
    if (fsum <= 0.0) return loss;
    double mix = 0.0;
    for (std::size_t k = 0; k < K; ++k) mix += df_bar[k] * t.f_bar[k];

    for (std::size_t k = 0; k < K; ++k) {
        const double df = (df_bar[k] - mix) / fsum;
        if (df == 0.0 || t.f[k] == 0.0) continue;
        const double chain = df * t.f[k];
        const auto& rule = rb.rules[k];
        for (std::size_t d = 0; d < D; ++d) {
            const auto& mf = rule.antecedent[d];
            const double diff = x[d] - mf.m;
            const double s2 = mf.sigma * mf.sigma;
            grad->d_center(k, d) += chain * diff / s2;
            grad->d_sigma(k, d) += chain * diff * diff / (s2 * mf.sigma);
        }
    }
    return loss;
}

std::pair<int, ForwardTrace> TrainedLearner::predict(std::span<const double> x) const {
    ForwardTrace t = ln_relu ? forward(x, rulebase) : sonfin_forward_trace(x, rulebase);
    std::size_t best = 0;
    for (std::size_t c = 1; c < t.y.size(); ++c)
        if (t.y[c] > t.y[best]) best = c; // strict: ties keep the lowest index
    return {static_cast<int>(best), std::move(t)};
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct AdamState {
    struct PerRule {
        std::vector<double> m_center, v_center;
        std::vector<double> m_sigma, v_sigma;
        std::vector<double> m_cons, v_cons;
    };
    std::vector<PerRule> rules;
    std::uint64_t step = 0;

    void match(const RuleBase& rb) {
        while (rules.size() < rb.size()) {
            PerRule s;
            s.m_center.assign(rb.dims, 0.0);
            s.v_center.assign(rb.dims, 0.0);
            s.m_sigma.assign(rb.dims, 0.0);
            s.v_sigma.assign(rb.dims, 0.0);
            s.m_cons.assign(rb.num_classes * (rb.dims + 1), 0.0);
            s.v_cons.assign(rb.num_classes * (rb.dims + 1), 0.0);
            rules.push_back(std::move(s));
        }
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double adam_update(double& m, double& v, double g, double lr, double bc1, double bc2) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g * g;
    const double mh = m / bc1, vh = v / bc2;
    return lr * mh / (std::sqrt(vh) + kAdamEps);
}

class Trainer {
public:
    Trainer(RuleBase& rb, const Matrix& X, const std::vector<int>& y,
            const LearnerConfig& cfg, bool gated)
        : rb_(rb), X_(X), y_(y), cfg_(cfg), gated_(gated),
          shuffle_rng_(make_rng(derive_seed(cfg.seed, 101))) {
        order_.resize(X.rows());
        std::iota(order_.begin(), order_.end(), 0);
    }

    // One epoch of mini-batch Adam; returns the mean per-sample loss seen.
    // `grow` additionally density-clusters every batch and grows rules.
    double epoch(bool grow, std::size_t* rules_added = nullptr) {
        std::shuffle(order_.begin(), order_.end(), shuffle_rng_);
        const std::size_t n = X_.rows();
        const std::size_t batch = std::min(cfg_.batch_size, n);
        double loss_sum = 0.0;
        std::size_t added = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(start + batch, n);
            loss_sum += step(start, end);
            if (grow && rb_.size() < rb_.rule_max) added += grow_on_batch(start, end);
        }
        if (rules_added) *rules_added = added;
        return loss_sum / static_cast<double>(n);
    }

private:
    double step(std::size_t start, std::size_t end) {
        grad_.resize_like(rb_);
        grad_.zero();
        adam_.match(rb_);
        double loss_sum = 0.0;
        for (std::size_t i = start; i < end; ++i) {
            const std::size_t r = order_[i];
            loss_sum += loss_and_gradient(rb_, X_.row(r), y_[r], gated_, &grad_);
        }
        const double inv = 1.0 / static_cast<double>(end - start);
        const double lr = cfg_.learning_rate;

        ++adam_.step;
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_.step));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_.step));

        const std::size_t D = rb_.dims, C = rb_.num_classes;
        for (std::size_t k = 0; k < rb_.size(); ++k) {
            auto& rule = rb_.rules[k];
            auto& st = adam_.rules[k];
            for (std::size_t d = 0; d < D; ++d) {
                rule.antecedent[d].m -= adam_update(st.m_center[d], st.v_center[d],
                                                    grad_.d_center(k, d) * inv, lr, bc1, bc2);
                rule.antecedent[d].sigma -= adam_update(st.m_sigma[d], st.v_sigma[d],
                                                        grad_.d_sigma(k, d) * inv, lr, bc1, bc2);
                rule.antecedent[d].sigma = std::max(rule.antecedent[d].sigma, kSigmaMin);
            }
            auto& dcons = grad_.d_consequent[k];
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t d = 0; d <= D; ++d) {
                    const std::size_t flat = c * (D + 1) + d;
                    rule.consequent(c, d) -= adam_update(st.m_cons[flat], st.v_cons[flat],
                                                         dcons(c, d) * inv, lr, bc1, bc2);
                }
        }
        return loss_sum;
    }

    std::size_t grow_on_batch(std::size_t start, std::size_t end) {
        const std::size_t m = end - start;
        if (m <= 4) return 0; // too small for a k-NN radius estimate
        Matrix bx(m, rb_.dims);
        for (std::size_t i = 0; i < m; ++i) {
            auto src = X_.row(order_[start + i]);
            std::copy(src.begin(), src.end(), bx.row(i).begin());
        }
        const double eps = std::max(auto_eps(bx, 4), 1e-6);
        DensityResult density = dbscan(bx, eps, cfg_.dbscan_min_pts);
        return grow_rules(rb_, density, cfg_);
    }

    RuleBase& rb_;
    const Matrix& X_;
    const std::vector<int>& y_;
    const LearnerConfig& cfg_;
    bool gated_;
    std::mt19937_64 shuffle_rng_;
    std::vector<std::size_t> order_;
    Gradients grad_;
    AdamState adam_;
};

}  // namespace

TrainedLearner train(RuleBase rb, const Matrix& X, const std::vector<int>& y,
                     const LearnerConfig& cfg, bool ln_relu,
                     bool structure_learning) {
    if (X.rows() == 0) throw DataError("train: empty in-bag data");
    if (X.rows() != y.size()) throw DataError("train: features/labels mismatch");
    cfg.validate();

    TrainedLearner out;
    out.ln_relu = ln_relu;

    Trainer trainer(rb, X, y, cfg, ln_relu);

    if (structure_learning) {
        std::size_t quiet_epochs = 0;
        while (rb.size() < rb.rule_max && quiet_epochs < cfg.structure_patience) {
            std::size_t added = 0;
            trainer.epoch(/*grow=*/true, &added);
            ++out.structure_epochs;
            quiet_epochs = added == 0 ? quiet_epochs + 1 : 0;
        }
    }

    double best = std::numeric_limits<double>::max();
    std::size_t patience = 0;
    for (std::size_t e = 0; e < cfg.param_epochs; ++e) {
        const double loss = trainer.epoch(/*grow=*/false);
        ++out.param_epochs_run;
        out.final_loss = loss;
        out.loss_history.push_back(loss);
        if (loss < best - 1e-6) {
            best = loss;
            patience = 0;
        } else if (++patience >= cfg.early_stop_patience) {
            break;
        }
    }

    out.rulebase = std::move(rb);
    return out;
}

}  // namespace somefs
