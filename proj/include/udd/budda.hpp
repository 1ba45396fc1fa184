#pragma once

#include <vector>

#include "udd/empirical.hpp"
#include "udd/model.hpp"

namespace udd {

struct BuddaConfig {
    /// Estimation is refused below this magnitude of f_K or |2 s(0) - 1|.
    double epsilon = 1e-6;
    /// Conditional branch: pick the two most biased conditional systems
    /// instead of copies 1 and 2.
    bool optimized_estimator = false;
};

enum class BuddaBranch {
    /// Channels inverted against the overall source estimate (step 5).
    Direct,
    /// Channels inverted against conditional sources (step 6), for inputs
    /// whose type is too close to uniform.
    Conditional,
};

struct BuddaDiagnostics {
    /// ||p_hat - uniform||_1
    double source_uniform_distance = 0.0;
    /// min_i ||i-th marginal of q(.|y_1 = m) - uniform||_1
    double min_conditional_marginal_distance = 0.0;
};

struct BuddaEstimate {
    /// Sorted orientation: p_hat(0) >= 1/2. A global flip against the
    /// ground truth is expected and legal.
    Distribution p_hat;
    std::vector<BscParam> b_hat;
    /// Per channel: the raw inversion fell outside [0,1] and was clamped.
    std::vector<bool> b_clamped;
    BuddaBranch branch = BuddaBranch::Direct;
    /// Majority symbol of copy 1 (ties go to 0); conditioning uses it.
    int majority_symbol = 0;
    BuddaDiagnostics diagnostics;

    BuddaEstimate() : p_hat(Distribution::uniform(2)) {}
};

/// |f_k| = prod_i |1 - 2 b_i| on exact BSC outputs for every K >= 2.
/// Even K: the signed parity sum. Odd K: the (K-1)-th root of the product
/// of the even statistic over the K leave-one-out marginals, carrying the
/// product's sign. Throws DegenerateChannel when |f_k| < epsilon.
double f_k(const JointDistribution& q, double epsilon = 1e-6);

/// Source estimator: p(0) = (1 + (prod_i |1-2 q_i(0)| / |f_k(q)|)^(1/K)) / 2,
/// clamped to [1/2, 1]. Equals max(p(0), 1-p(0)) on exact BSC outputs.
double e_k(const JointDistribution& q, double epsilon = 1e-6);

struct BscFit {
    BscParam param;
    bool clamped = false;
    /// Inversion value before clamping.
    double raw = 0.0;

    BscFit() : param(0.5) {}
};

/// The BSC B with B(s) = r: b = (s(0) + r(0) - 1) / (2 s(0) - 1).
/// Throws DegenerateSource when s is too close to uniform to invert.
BscFit bsc_from_pair(const Distribution& r, const Distribution& s, double epsilon = 1e-6);

/// Full estimation branch logic on an empirical joint distribution. The
/// majority symbol is taken from the copy-1 marginal (ties go to 0).
BuddaEstimate budda_estimate_from_joint(const JointDistribution& q,
                                        const BuddaConfig& config = {});

/// Convenience wrapper: joint_empirical + budda_estimate_from_joint.
BuddaEstimate budda_estimate(const ObservationMatrix& obs, const BuddaConfig& config = {});

}  // namespace udd
