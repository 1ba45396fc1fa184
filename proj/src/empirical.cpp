#include "udd/empirical.hpp"

#include <bit>
#include <cmath>

namespace udd {

ObservationMatrix::ObservationMatrix(int alphabet_size, std::size_t rows, int copies,
                                     std::vector<std::uint8_t> row_major)
    : y_(std::move(row_major)), L_(alphabet_size), n_(rows), K_(copies) {
    if (L_ < 2) throw InputError("observation matrix: alphabet size must be at least 2");
    if (n_ < 1) throw InputError("observation matrix: needs at least one row");
    if (K_ < 1) throw InputError("observation matrix: needs at least one copy");
    if (y_.size() != n_ * static_cast<std::size_t>(K_)) {
        throw DimensionMismatch("observation matrix: data size != rows * copies");
    }
    for (std::uint8_t s : y_) {
        if (s >= L_) throw IndexOutOfRange("observation matrix: symbol out of range");
    }
}

ObservationMatrix ObservationMatrix::complemented() const {
    if (L_ != 2) throw NonBinaryAlphabet("complemented: binary alphabets only");
    std::vector<std::uint8_t> c(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) c[i] = static_cast<std::uint8_t>(1 - y_[i]);
    return ObservationMatrix(L_, n_, K_, std::move(c));
}

Distribution type_of(std::span<const std::uint8_t> seq, int alphabet_size) {
    if (seq.empty()) throw InputError("type_of: empty sequence");
    std::vector<double> counts(static_cast<std::size_t>(alphabet_size), 0.0);
    for (std::uint8_t s : seq) {
        if (s >= alphabet_size) throw IndexOutOfRange("type_of: symbol out of range");
        counts[s] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(seq.size());
    return Distribution(std::move(counts));
}

JointDistribution joint_empirical(const ObservationMatrix& obs) {
    const int L = obs.alphabet_size();
    const int K = obs.copies();
    std::size_t cells = 1;
    for (int j = 0; j < K; ++j) {
        cells *= static_cast<std::size_t>(L);
        if (cells > kMaxJointCells) throw InputError("joint_empirical: L^K exceeds the cap");
    }
    std::vector<std::size_t> counts(cells, 0);
    for (std::size_t i = 0; i < obs.rows(); ++i) {
        std::size_t idx = 0;
        const auto row = obs.row(i);
        for (int j = 0; j < K; ++j) {
            idx = idx * static_cast<std::size_t>(L) + row[static_cast<std::size_t>(j)];
        }
        ++counts[idx];
    }
    std::vector<double> q(cells);
    const double inv_n = 1.0 / static_cast<double>(obs.rows());
    for (std::size_t i = 0; i < cells; ++i) q[i] = static_cast<double>(counts[i]) * inv_n;
    return JointDistribution(L, K, std::move(q));
}

Distribution marginal(const JointDistribution& q, int coord) {
    const int K = q.copies();
    if (coord < 0 || coord >= K) throw IndexOutOfRange("marginal: coordinate out of range");
    const int L = q.alphabet_size();
    // stride of the coordinate in the flat index (copy 1 most significant)
    std::size_t stride = 1;
    for (int j = K - 1; j > coord; --j) stride *= static_cast<std::size_t>(L);
    std::vector<double> m(static_cast<std::size_t>(L), 0.0);
    for (std::size_t idx = 0; idx < q.cells(); ++idx) {
        m[(idx / stride) % static_cast<std::size_t>(L)] += q[idx];
    }
    return Distribution(std::move(m));
}

JointDistribution marginal_excluding(const JointDistribution& q, int coord) {
    const int K = q.copies();
    if (coord < 0 || coord >= K) {
        throw IndexOutOfRange("marginal_excluding: coordinate out of range");
    }
    if (K < 2) throw InputError("marginal_excluding: needs at least two coordinates");
    const int L = q.alphabet_size();
    std::size_t stride = 1;
    for (int j = K - 1; j > coord; --j) stride *= static_cast<std::size_t>(L);
    std::vector<double> out(q.cells() / static_cast<std::size_t>(L), 0.0);
    for (std::size_t idx = 0; idx < q.cells(); ++idx) {
        const std::size_t high = idx / (stride * static_cast<std::size_t>(L));
        const std::size_t low = idx % stride;
        out[high * stride + low] += q[idx];
    }
    return JointDistribution(L, K - 1, std::move(out));
}

JointDistribution condition_on(const JointDistribution& q, int coord, int symbol) {
    const int K = q.copies();
    if (coord < 0 || coord >= K) throw IndexOutOfRange("condition_on: coordinate out of range");
    const int L = q.alphabet_size();
    if (symbol < 0 || symbol >= L) throw IndexOutOfRange("condition_on: symbol out of range");
    if (K < 2) throw InputError("condition_on: needs at least two coordinates");
    const double mass = marginal(q, coord)[symbol];
    if (mass <= 0.0) {
        throw ConditioningOnNullEvent("condition_on: event y_" + std::to_string(coord + 1) +
                                      " = " + std::to_string(symbol) + " has probability zero");
    }
    std::size_t stride = 1;
    for (int j = K - 1; j > coord; --j) stride *= static_cast<std::size_t>(L);
    std::vector<double> out(q.cells() / static_cast<std::size_t>(L));
    for (std::size_t o = 0; o < out.size(); ++o) {
        const std::size_t high = o / stride;
        const std::size_t low = o % stride;
        const std::size_t idx =
            (high * static_cast<std::size_t>(L) + static_cast<std::size_t>(symbol)) * stride + low;
        out[o] = q[idx] / mass;
    }
    return JointDistribution(L, K - 1, std::move(out));
}

double f_k_even(const JointDistribution& q) {
    if (q.alphabet_size() != 2) throw NonBinaryAlphabet("f_k_even: binary alphabets only");
    if (q.copies() % 2 != 0) throw OddK("f_k_even: K must be even");
    // For L = 2 the flat index's bits are the tuple, so the term's sign is
    // the index's bit parity.
    double f = 0.0;
    for (std::size_t idx = 0; idx < q.cells(); ++idx) {
        f += (std::popcount(idx) & 1) ? -q[idx] : q[idx];
    }
    return f;
}

double f_k_even_streaming(const ObservationMatrix& obs) {
    if (obs.alphabet_size() != 2) {
        throw NonBinaryAlphabet("f_k_even_streaming: binary alphabets only");
    }
    if (obs.copies() % 2 != 0) throw OddK("f_k_even_streaming: K must be even");
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < obs.rows(); ++i) {
        int parity = 0;
        for (int j = 0; j < obs.copies(); ++j) parity ^= obs.at(i, j);
        acc += parity ? -1 : 1;
    }
    return static_cast<double>(acc) / static_cast<double>(obs.rows());
}

}  // namespace udd
