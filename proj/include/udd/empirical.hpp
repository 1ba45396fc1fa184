#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "udd/model.hpp"

namespace udd {

/// n observation rows of K symbols each: row i holds the outputs of all K
/// copies at position i.
class ObservationMatrix {
public:
    ObservationMatrix(int alphabet_size, std::size_t rows, int copies,
                      std::vector<std::uint8_t> row_major);

    int alphabet_size() const { return L_; }
    std::size_t rows() const { return n_; }
    int copies() const { return K_; }

    std::uint8_t at(std::size_t i, int j) const {
        return y_[i * static_cast<std::size_t>(K_) + static_cast<std::size_t>(j)];
    }
    std::span<const std::uint8_t> row(std::size_t i) const {
        return {y_.data() + i * static_cast<std::size_t>(K_), static_cast<std::size_t>(K_)};
    }
    const std::vector<std::uint8_t>& data() const { return y_; }

    /// Binary alphabets only: every symbol complemented.
    ObservationMatrix complemented() const;

private:
    std::vector<std::uint8_t> y_;
    int L_;
    std::size_t n_;
    int K_;
};

/// Per-symbol relative frequencies of a sequence.
Distribution type_of(std::span<const std::uint8_t> seq, int alphabet_size);

/// q_hat(y_1..y_K) = (rows equal to the tuple) / n.
JointDistribution joint_empirical(const ObservationMatrix& obs);

/// Marginal on coordinate `coord` (0-based).
Distribution marginal(const JointDistribution& q, int coord);

/// Marginal on all coordinates but `coord`; needs K >= 2.
JointDistribution marginal_excluding(const JointDistribution& q, int coord);

/// q(. | y_coord = symbol); throws ConditioningOnNullEvent when the
/// conditioning event has probability zero. JointDistribution::point_mass is
/// the documented fallback for callers that want the degenerate convention
/// instead of the error.
JointDistribution condition_on(const JointDistribution& q, int coord, int symbol);

/// Signed correlation statistic for binary alphabets and even K:
/// sum_y (-1)^(y_1+...+y_K) q(y). Equals prod_i (1 - 2 b_i) on exact BSC
/// outputs, independent of the source.
double f_k_even(const JointDistribution& q);

/// Same value computed row-wise: (1/n) sum_i (-1)^(sum_j y_ij).
double f_k_even_streaming(const ObservationMatrix& obs);

}  // namespace udd
