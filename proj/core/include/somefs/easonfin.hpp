#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "somefs/clustering.hpp"
#include "somefs/matrix.hpp"

namespace somefs {

// Numerical guards used across the learner.
inline constexpr double kSigmaMin = 0.01;    // lower clamp on every MF width
inline constexpr double kLnEpsilon = 1e-5;   // layer-norm variance epsilon
inline constexpr double kProbClip = 1e-7;    // lower clip on class probability
inline constexpr double kRenormEps = 1e-12;  // output renormalization epsilon
inline constexpr double kGateZeroTol = 1e-12; // gate treated as all-zero below this

/// One Gaussian membership function: exp(-(x-m)^2 / (2 sigma^2)).
struct GaussianMF {
    double m = 0.0;
    double sigma = 1.0;

    double grade(double x) const;
};

/// A fuzzy rule: D Gaussian antecedents and a C x (D+1) consequent
/// coefficient block (column 0 is the intercept).
struct FuzzyRule {
    std::vector<GaussianMF> antecedent;
    Matrix consequent;

    std::size_t dims() const { return antecedent.size(); }
    std::size_t num_classes() const { return consequent.rows(); }
};

struct RuleBase {
    std::vector<FuzzyRule> rules;
    std::size_t rule_max = 30;
    std::size_t dims = 0;
    std::size_t num_classes = 0;

    std::size_t size() const { return rules.size(); }
};

/// Every intermediate of one inference pass. Drives training, prediction
/// and rule mining.
struct ForwardTrace {
    Matrix u;                     // K x D membership grades
    std::vector<double> f;        // firing strengths
    std::vector<double> f_bar;    // normalized firing strengths
    double ln_mean = 0.0;
    double ln_var = 0.0;
    std::vector<double> f_prime;  // layer-normalized (empty on classic path)
    std::vector<double> f_dprime; // after ReLU (empty on classic path)
    Matrix y_k;                   // K x C per-rule outputs
    std::vector<double> y;        // final C-vector
    bool ln_bypass = false;       // K == 1, gate fixed to [1]
    bool gate_fallback = false;   // every f'' was zero; f_bar weights used

    /// Weights that select rules for mining: f'' on the gated path,
    /// f_bar on the classic path.
    std::span<const double> rule_gate() const {
        return f_dprime.empty() ? std::span<const double>(f_bar)
                                : std::span<const double>(f_dprime);
    }
};

enum class ActivationScale {
    kGeometricMean, // J = max_k (prod_d u_kd)^(1/D); usable threshold in high D
    kRawProduct     // J = max_k prod_d u_kd
};

struct LearnerConfig {
    double phi_in = 0.5;   // rule-creation threshold on the activation scale
    double s_thresh = 0.5; // similarity ceiling for new rules
    std::size_t rule_max = 30;
    double sigma_init = 1.0;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;
    std::size_t structure_patience = 3; // epochs without growth before exit
    std::size_t param_epochs = 100;
    std::size_t early_stop_patience = 10;
    std::uint64_t seed = 0;

    // structure-learning clustering knobs
    std::size_t initial_clusters = 5;
    bool use_elbow = false; // pick initial p by the elbow method instead
    std::size_t elbow_min = 2;
    std::size_t elbow_max = 8;
    std::size_t dbscan_min_pts = 5;

    ActivationScale activation_scale = ActivationScale::kGeometricMean;

    void validate() const; // throws ConfigError
};

struct ActivationSimilarity {
    double max_activation = 0.0; // J, the best coverage by an existing rule
    double similarity = 0.0;     // S, mean Gaussian overlap with closest rule
};

/// Gradients with the same layout as a RuleBase.
struct Gradients {
    Matrix d_center;                 // K x D
    Matrix d_sigma;                  // K x D
    std::vector<Matrix> d_consequent; // per rule, C x (D+1)

    void resize_like(const RuleBase& rb);
    void zero();
};

/// K = p rules: centers from k-means on X, widths all sigma_init,
/// consequents zero.
RuleBase init_structure(const Matrix& X, std::size_t p, double sigma_init,
                        std::size_t num_classes, std::size_t rule_max,
                        std::uint64_t seed);

/// Per-dimension membership grades of x under one rule.
std::vector<double> membership(std::span<const double> x, const FuzzyRule& rule);

/// Gated inference: firing -> normalize -> layer norm -> ReLU -> per-rule
/// softmax consequents -> gate-weighted sum. K = 1 bypasses the gate; a
/// zero firing sum gives uniform normalized strengths; an all-zero gate
/// falls back to f_bar weights for the output.
ForwardTrace forward(std::span<const double> x, const RuleBase& rb);

/// Classic inference: linear consequents weighted by normalized firing
/// strengths, summed, then one softmax over classes.
std::vector<double> sonfin_forward(std::span<const double> x, const RuleBase& rb);

/// Same as sonfin_forward but keeps the intermediates (f_prime/f_dprime
/// stay empty so rule_gate() yields f_bar).
ForwardTrace sonfin_forward_trace(std::span<const double> x, const RuleBase& rb);

/// J and S of a candidate rule against the existing rulebase; (0,0) when
/// the rulebase is empty, which always passes the creation test.
ActivationSimilarity activation_and_similarity(std::span<const double> center,
                                               std::span<const double> sigma,
                                               const RuleBase& rb,
                                               ActivationScale scale);

/// Append a rule per non-noise density cluster that is neither covered
/// (J < phi_in) nor similar to an existing rule (S < s_thresh), stopping
/// at rule_max. Returns how many rules were added.
std::size_t grow_rules(RuleBase& rb, const DensityResult& density,
                       const LearnerConfig& cfg);

/// Negative log-likelihood of the renormalized output for one sample; adds
/// d(loss)/d(params) into `grad` when given. `gated` selects the LN-ReLU
/// path (training loss of the full system) or the classic path.
double loss_and_gradient(const RuleBase& rb, std::span<const double> x,
                         int label, bool gated, Gradients* grad);

struct TrainedLearner {
    RuleBase rulebase;
    bool ln_relu = true; // false: classic forward path

    std::size_t structure_epochs = 0;
    std::size_t param_epochs_run = 0;
    double final_loss = 0.0;
    std::vector<double> loss_history; // mean in-bag loss per parameter epoch

    std::pair<int, ForwardTrace> predict(std::span<const double> x) const;
};

/// Two-phase training. Phase 1 (optional): per batch, one Adam step, then
/// density clustering of the batch feeds rule growth; exits when the rule
/// cap is hit or no rule appeared for `structure_patience` epochs. Phase 2:
/// Adam on all parameters with early stop on the in-bag loss plateau.
/// Widths are clamped to kSigmaMin after every step.
TrainedLearner train(RuleBase rb, const Matrix& X, const std::vector<int>& y,
                     const LearnerConfig& cfg, bool ln_relu = true,
                     bool structure_learning = true);

}  // namespace somefs
