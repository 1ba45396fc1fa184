#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "udd/errors.hpp"

namespace udd {

/// Construction tolerance for probability vectors and channel rows.
inline constexpr double kProbTol = 1e-12;
/// Tolerance for probabilities accumulated over up to 2^20 product terms.
inline constexpr double kJointTol = 1e-10;
/// Largest alphabet for which permutations are enumerated (6! = 720).
inline constexpr int kMaxEnumerableAlphabet = 6;
/// Dense joint tensors are capped at 2^20 cells.
inline constexpr std::size_t kMaxJointCells = std::size_t{1} << 20;

/// Finite alphabet; symbols are 0..size-1.
class Alphabet {
public:
    explicit Alphabet(int size);
    int size() const { return size_; }

private:
    int size_;
};

/// Probability vector over a finite alphabet. Entries must be nonnegative
/// and sum to 1 within kProbTol; the sum is renormalised away, anything
/// worse is rejected.
class Distribution {
public:
    explicit Distribution(std::vector<double> probs);

    static Distribution uniform(int size);
    static Distribution point_mass(int size, int symbol);

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int x) const { return p_[static_cast<std::size_t>(x)]; }
    const std::vector<double>& probs() const { return p_; }

    std::vector<int> support() const;
    /// Index of the largest entry; ties go to the smallest index.
    int argmax() const;

private:
    std::vector<double> p_;
};

double l1_distance(const Distribution& a, const Distribution& b);

/// Binary symmetric channel, described by b = b(0|0), the probability of
/// correct transmission. Invertible iff b != 1/2.
class BscParam {
public:
    explicit BscParam(double b);
    double b() const { return b_; }
    bool invertible() const { return b_ != 0.5; }

private:
    double b_;
};

/// Row-stochastic matrix w(y|x); rows are inputs. Square in the denoising
/// theorems, but rectangular channels are accepted where the math allows.
class Channel {
public:
    Channel(int input_size, int output_size, std::vector<double> row_major);

    static Channel identity(int size);
    static Channel from_bsc(BscParam b);

    double operator()(int x, int y) const {
        return w_[static_cast<std::size_t>(x) * out_ + y];
    }
    std::span<const double> row(int x) const {
        return {w_.data() + static_cast<std::size_t>(x) * out_, static_cast<std::size_t>(out_)};
    }

    int input_size() const { return in_; }
    int output_size() const { return out_; }
    bool is_square() const { return in_ == out_; }

    /// Determinant of a square channel (Gaussian elimination).
    double determinant() const;
    /// Queryable predicate, not an invariant: |det| > tol.
    bool is_invertible(double tol = 1e-12) const;

private:
    std::vector<double> w_;
    int in_;
    int out_;
};

/// Distortion d(x, x') >= 0 between source symbols.
class DistortionMeasure {
public:
    DistortionMeasure(int size, std::vector<double> row_major);

    /// d(x, x') = 1 - delta(x, x').
    static DistortionMeasure hamming(int size);

    double operator()(int x, int y) const {
        return d_[static_cast<std::size_t>(x) * size_ + y];
    }
    int size() const { return size_; }
    double max_value() const;

private:
    std::vector<double> d_;
    int size_;
};

/// Dense probability tensor over K copies of an alphabet of size L,
/// indexed so copy 1 is the most significant digit.
class JointDistribution {
public:
    JointDistribution(int alphabet_size, int copies, std::vector<double> probs);

    /// Point mass on one output tuple. This is the documented fallback for
    /// conditioning on a null event; see condition_on.
    static JointDistribution point_mass(int alphabet_size, int copies,
                                        std::span<const int> tuple);

    int alphabet_size() const { return L_; }
    int copies() const { return K_; }
    std::size_t cells() const { return q_.size(); }

    double operator[](std::size_t idx) const { return q_[idx]; }
    const std::vector<double>& probs() const { return q_; }

    std::size_t index_of(std::span<const int> tuple) const;
    void tuple_of(std::size_t idx, std::span<int> out) const;

    /// True when exactly one cell carries all the mass.
    bool is_point_mass() const;

private:
    JointDistribution() = default;
    std::vector<double> q_;
    int L_ = 0;
    int K_ = 0;
};

double l1_distance(const JointDistribution& a, const JointDistribution& b);

/// A source distribution together with K channels all fed the same symbol.
struct DependentComponentSystem {
    Distribution source;
    std::vector<Channel> channels;

    DependentComponentSystem(Distribution src, std::vector<Channel> chans);

    int alphabet_size() const { return source.size(); }
    int copies() const { return static_cast<int>(channels.size()); }
};

/// Permutation of 0..L-1 stored as an index array: perm[x] is the image of x.
using Permutation = std::vector<int>;

bool is_permutation(const Permutation& tau, int size);
Permutation identity_permutation(int size);
Permutation inverse_permutation(const Permutation& tau);
/// All permutations of 0..size-1 in lexicographic order. size <= 6.
std::vector<Permutation> all_permutations(int size);

/// tau(p): mass of x moves to tau(x).
Distribution permute(const Distribution& p, const Permutation& tau);

/// output(y) = sum_x w(y|x) p(x).
Distribution apply_channel(const Channel& ch, const Distribution& p);

/// q(y_1..y_K) = sum_x p(x) prod_j w_j(y_j | x). Requires all channels to
/// share one output alphabet.
JointDistribution product_output(const DependentComponentSystem& sys);

/// ||r - s||_1 + sum_j max_x sum_y |v_j(y|x) - w_j(y|x)|.
double dcs_distance(const DependentComponentSystem& a, const DependentComponentSystem& b);

/// (tau(p), W_1 o tau^-1, ..., W_K o tau^-1); same product output.
DependentComponentSystem flip_system(const DependentComponentSystem& sys, const Permutation& tau);

/// BSC equivalent to composing two BSCs: c = 2ab + 1 - a - b.
BscParam compose_bsc(BscParam a, BscParam b);

}  // namespace udd
