#include "udd/budda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace udd {

namespace {

double uniform_distance(const Distribution& p) {
    return l1_distance(p, Distribution::uniform(p.size()));
}

Distribution as_sorted_binary(double p0) {
    return Distribution({p0, 1.0 - p0});
}

struct ConditionalSystem {
    // Estimates derived from q(. | y_anchor = symbol). Channel estimates are
    // keyed by the original copy index; the anchor copy itself has none.
    int anchor;
    double source_mass;  // e_{K-1} of the conditional joint
    std::vector<int> members;
    std::vector<BscFit> fits;
};

ConditionalSystem estimate_conditional(const JointDistribution& q, int anchor, int symbol,
                                       const BuddaConfig& config) {
    const JointDistribution cond = condition_on(q, anchor, symbol);
    ConditionalSystem sys;
    sys.anchor = anchor;
    sys.source_mass = e_k(cond, config.epsilon);
    const Distribution source = as_sorted_binary(sys.source_mass);
    for (int c = 0; c < cond.copies(); ++c) {
        const int orig = c < anchor ? c : c + 1;
        sys.members.push_back(orig);
        sys.fits.push_back(bsc_from_pair(marginal(cond, c), source, config.epsilon));
    }
    return sys;
}

BscFit flipped(const BscFit& f) {
    BscFit g;
    g.raw = 1.0 - f.raw;
    g.clamped = f.clamped;
    g.param = BscParam(std::clamp(g.raw, 0.0, 1.0));
    return g;
}

}  // namespace

double f_k(const JointDistribution& q, double epsilon) {
    if (q.alphabet_size() != 2) throw NonBinaryAlphabet("f_k: binary alphabets only");
    const int K = q.copies();
    if (K < 2) throw InputError("f_k: needs at least two copies");
    double f;
    if (K % 2 == 0) {
        f = f_k_even(q);
    } else {
        double prod = 1.0;
        for (int i = 0; i < K; ++i) prod *= f_k_even(marginal_excluding(q, i));
        const double sign = prod < 0.0 ? -1.0 : 1.0;
        f = sign * std::pow(std::abs(prod), 1.0 / (K - 1));
    }
    if (std::abs(f) < epsilon) {
        throw DegenerateChannel("f_k: statistic magnitude " + std::to_string(std::abs(f)) +
                                " below epsilon; some channel is too close to b = 1/2");
    }
    return f;
}

double e_k(const JointDistribution& q, double epsilon) {
    const int K = q.copies();
    const double f = f_k(q, epsilon);
    double num = 1.0;
    for (int i = 0; i < K; ++i) num *= std::abs(1.0 - 2.0 * marginal(q, i)[0]);
    const double ratio = num / std::abs(f);
    return 0.5 * (1.0 + std::min(1.0, std::pow(ratio, 1.0 / K)));
}

BscFit bsc_from_pair(const Distribution& r, const Distribution& s, double epsilon) {
    if (r.size() != 2 || s.size() != 2) {
        throw NonBinaryAlphabet("bsc_from_pair: binary alphabets only");
    }
    const double denom = 2.0 * s[0] - 1.0;
    if (std::abs(denom) < epsilon) {
        throw DegenerateSource("bsc_from_pair: source too close to uniform to invert");
    }
    BscFit fit;
    fit.raw = (s[0] + r[0] - 1.0) / denom;
    fit.clamped = fit.raw < 0.0 || fit.raw > 1.0;
    fit.param = BscParam(std::clamp(fit.raw, 0.0, 1.0));
    return fit;
}

BuddaEstimate budda_estimate_from_joint(const JointDistribution& q, const BuddaConfig& config) {
    if (q.alphabet_size() != 2) throw NonBinaryAlphabet("budda: binary alphabets only");
    const int K = q.copies();
    if (K < 3) throw InputError("budda: needs at least three copies");
    if (q.is_point_mass()) {
        throw AllCopiesConstant("budda: the empirical joint is a point mass");
    }

    BuddaEstimate est;
    const double p0 = e_k(q, config.epsilon);
    est.p_hat = as_sorted_binary(p0);
    est.majority_symbol = marginal(q, 0)[0] >= 0.5 ? 0 : 1;
    const int m = est.majority_symbol;

    const JointDistribution cond1 = condition_on(q, 0, m);
    est.diagnostics.source_uniform_distance = uniform_distance(est.p_hat);
    double min_cond = std::numeric_limits<double>::infinity();
    for (int c = 0; c < cond1.copies(); ++c) {
        min_cond = std::min(min_cond, uniform_distance(marginal(cond1, c)));
    }
    est.diagnostics.min_conditional_marginal_distance = min_cond;

    std::vector<BscFit> fits(static_cast<std::size_t>(K));
    // Equality routes to the direct branch.
    if (est.diagnostics.source_uniform_distance >= min_cond) {
        est.branch = BuddaBranch::Direct;
        for (int i = 0; i < K; ++i) {
            try {
                fits[static_cast<std::size_t>(i)] =
                    bsc_from_pair(marginal(q, i), est.p_hat, config.epsilon);
            } catch (const DegenerateSource&) {
                throw DegenerateSource(
                    "budda step 5: source estimate too close to uniform to invert channels");
            }
        }
    } else {
        est.branch = BuddaBranch::Conditional;
        int first = 0;
        int second = 1;
        std::vector<int> majorities(static_cast<std::size_t>(K));
        for (int i = 0; i < K; ++i) {
            majorities[static_cast<std::size_t>(i)] = marginal(q, i)[0] >= 0.5 ? 0 : 1;
        }
        if (config.optimized_estimator) {
            // Rank anchors by the bias of their conditional source estimate.
            std::vector<std::pair<double, int>> bias;
            for (int i = 0; i < K; ++i) {
                try {
                    const JointDistribution c =
                        condition_on(q, i, majorities[static_cast<std::size_t>(i)]);
                    bias.emplace_back(std::abs(2.0 * e_k(c, config.epsilon) - 1.0), i);
                } catch (const DegenerateError&) {
                    // unusable anchor
                }
            }
            if (bias.size() >= 2) {
                std::sort(bias.begin(), bias.end(), [](const auto& a, const auto& b) {
                    if (a.first != b.first) return a.first > b.first;
                    return a.second < b.second;
                });
                first = bias[0].second;
                second = bias[1].second;
            }
        } else {
            majorities[0] = m;
            majorities[1] = m;
        }

        ConditionalSystem sysA;
        ConditionalSystem sysB;
        try {
            sysA = estimate_conditional(q, first, majorities[static_cast<std::size_t>(first)],
                                        config);
            sysB = estimate_conditional(q, second, majorities[static_cast<std::size_t>(second)],
                                        config);
        } catch (const DegenerateChannel& e) {
            throw DegenerateChannel(std::string("budda step 6: ") + e.what());
        } catch (const DegenerateSource& e) {
            throw DegenerateSource(std::string("budda step 6: ") + e.what());
        } catch (const ConditioningOnNullEvent& e) {
            throw ConditioningOnNullEvent(std::string("budda step 6: ") + e.what());
        }

        for (std::size_t k = 0; k < sysA.members.size(); ++k) {
            fits[static_cast<std::size_t>(sysA.members[k])] = sysA.fits[k];
        }
        // System B supplies the anchor's own channel. Its gauge is aligned to
        // system A on the channels both estimate; the raw printed rule leaves
        // the relative orientation of the two conditional sources open.
        double plain = 0.0;
        double flip = 0.0;
        std::optional<BscFit> anchor_fit;
        for (std::size_t k = 0; k < sysB.members.size(); ++k) {
            const int i = sysB.members[k];
            if (i == first) {
                anchor_fit = sysB.fits[k];
                continue;
            }
            const double ref = fits[static_cast<std::size_t>(i)].param.b();
            plain += std::abs(sysB.fits[k].param.b() - ref);
            flip += std::abs(flipped(sysB.fits[k]).param.b() - ref);
        }
        if (!anchor_fit.has_value()) {
            throw DegenerateError("budda step 6: second conditional system lacks the anchor channel");
        }
        fits[static_cast<std::size_t>(first)] =
            plain <= flip ? *anchor_fit : flipped(*anchor_fit);
    }

    est.b_hat.reserve(static_cast<std::size_t>(K));
    est.b_clamped.reserve(static_cast<std::size_t>(K));
    for (const BscFit& f : fits) {
        est.b_hat.push_back(f.param);
        est.b_clamped.push_back(f.clamped);
    }
    return est;
}

BuddaEstimate budda_estimate(const ObservationMatrix& obs, const BuddaConfig& config) {
    if (obs.copies() < 3) throw InputError("budda: needs at least three copies");
    return budda_estimate_from_joint(joint_empirical(obs), config);
}

}  // namespace udd
