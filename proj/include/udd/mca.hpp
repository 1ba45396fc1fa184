#pragma once

#include <cstdint>
#include <vector>

#include "udd/empirical.hpp"
#include "udd/model.hpp"

namespace udd {

/// Table decoder over output tuples: labeling[t] is the source symbol
/// assigned to the t-th tuple (mixed-radix over the per-copy output
/// alphabets, copy 1 most significant). The cells labeling^-1(x) form the
/// minimizing partition; tau is the source permutation achieving the outer
/// minimum of the expected distortion.
struct McaDecoder {
    std::vector<int> labeling;
    Permutation tau;
    double expected_distortion = 0.0;
    int source_size = 0;
    std::vector<int> output_sizes;

    std::size_t index_of(std::span<const std::uint8_t> tuple) const;
};

/// Clairvoyant decoder for a known system: for each permutation tau each
/// output tuple y gets the label x' minimizing
///   sum_x p(x) d(x, tau^-1(x')) w(y|x),
/// with w the composite channel producing all K outputs; ties go to the
/// smallest label, then the lexicographically smallest tau.
McaDecoder build_mca(const DependentComponentSystem& sys, const DistortionMeasure& d);

/// Expected distortion of the decoder without keeping the labeling.
double mca_distortion(const DependentComponentSystem& sys, const DistortionMeasure& d);

/// Row-by-row table lookup.
std::vector<std::uint8_t> decode(const McaDecoder& dec, const ObservationMatrix& obs);

/// Residual error of the best single-letter relabeling rule:
/// 1 - max_tau sum_x p(x) w(tau(x)|x).
double colour_agnostic_baseline(const Distribution& p, const Channel& w);

/// Per-row majority vote on binary observations; ties go to symbol 0.
std::vector<std::uint8_t> majority_decode(const ObservationMatrix& obs);

struct EvaluatedDistortion {
    double value = 0.0;
    Permutation tau;
};

/// Relabeling-agnostic quality of an estimate against the truth:
/// min over permutations tau of (1/n) sum_i d(estimate_i, tau(truth_i)).
EvaluatedDistortion min_permuted_distortion(std::span<const std::uint8_t> truth,
                                            std::span<const std::uint8_t> estimate,
                                            const DistortionMeasure& d);

}  // namespace udd
