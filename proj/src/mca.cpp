#include "udd/mca.hpp"

#include <cmath>
#include <limits>

namespace udd {

namespace {

// Inner sums over the source alphabet use compensated accumulation once the
// alphabet grows past 4 symbols.
double sum_over_source(std::span<const double> terms) {
    if (terms.size() <= 4) {
        double s = 0.0;
        for (double t : terms) s += t;
        return s;
    }
    double s = 0.0;
    double c = 0.0;
    for (double t : terms) {
        const double y = t - c;
        const double u = s + y;
        c = (u - s) - y;
        s = u;
    }
    return s;
}

}  // namespace

std::size_t McaDecoder::index_of(std::span<const std::uint8_t> tuple) const {
    if (tuple.size() != output_sizes.size()) {
        throw DimensionMismatch("decoder: tuple length != number of copies");
    }
    std::size_t idx = 0;
    for (std::size_t j = 0; j < tuple.size(); ++j) {
        if (tuple[j] >= output_sizes[j]) {
            throw IndexOutOfRange("decoder: symbol out of range for copy " + std::to_string(j + 1));
        }
        idx = idx * static_cast<std::size_t>(output_sizes[j]) + tuple[j];
    }
    return idx;
}

McaDecoder build_mca(const DependentComponentSystem& sys, const DistortionMeasure& d) {
    const int L = sys.alphabet_size();
    if (L > kMaxEnumerableAlphabet) {
        throw AlphabetTooLarge("build_mca: alphabet size capped at 6");
    }
    if (d.size() != L) throw DimensionMismatch("build_mca: distortion size != alphabet size");
    const int K = sys.copies();

    std::vector<int> out_sizes(static_cast<std::size_t>(K));
    std::size_t cells = 1;
    for (int j = 0; j < K; ++j) {
        out_sizes[static_cast<std::size_t>(j)] = sys.channels[static_cast<std::size_t>(j)].output_size();
        cells *= static_cast<std::size_t>(out_sizes[static_cast<std::size_t>(j)]);
        if (cells > kMaxJointCells) throw InputError("build_mca: output tuple space exceeds the cap");
    }

    // p(x) * w(y|x) for the composite channel (tensor product of the copies
    // applied to the same input).
    std::vector<double> weight(static_cast<std::size_t>(L) * cells);
    std::vector<double> buf;
    std::vector<double> next;
    for (int x = 0; x < L; ++x) {
        buf.assign(1, sys.source[x]);
        for (int j = 0; j < K; ++j) {
            const Channel& ch = sys.channels[static_cast<std::size_t>(j)];
            const int out = out_sizes[static_cast<std::size_t>(j)];
            next.assign(buf.size() * static_cast<std::size_t>(out), 0.0);
            for (std::size_t i = 0; i < buf.size(); ++i) {
                for (int y = 0; y < out; ++y) {
                    next[i * static_cast<std::size_t>(out) + static_cast<std::size_t>(y)] =
                        buf[i] * ch(x, y);
                }
            }
            buf.swap(next);
        }
        std::copy(buf.begin(), buf.end(), weight.begin() + static_cast<std::size_t>(x) * cells);
    }

    McaDecoder best;
    best.expected_distortion = std::numeric_limits<double>::infinity();
    std::vector<int> labeling(cells);
    std::vector<double> terms(static_cast<std::size_t>(L));

    for (const Permutation& tau : all_permutations(L)) {
        const Permutation tinv = inverse_permutation(tau);
        double total = 0.0;
        for (std::size_t t = 0; t < cells; ++t) {
            double best_cost = std::numeric_limits<double>::infinity();
            int best_label = 0;
            for (int z = 0; z < L; ++z) {
                const int zz = tinv[static_cast<std::size_t>(z)];
                for (int x = 0; x < L; ++x) {
                    terms[static_cast<std::size_t>(x)] =
                        d(x, zz) * weight[static_cast<std::size_t>(x) * cells + t];
                }
                const double cost = sum_over_source(terms);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_label = z;
                }
            }
            labeling[t] = best_label;
            total += best_cost;
        }
        if (total < best.expected_distortion) {
            best.expected_distortion = total;
            best.labeling = labeling;
            best.tau = tau;
        }
    }
    best.source_size = L;
    best.output_sizes = std::move(out_sizes);
    return best;
}

double mca_distortion(const DependentComponentSystem& sys, const DistortionMeasure& d) {
    return build_mca(sys, d).expected_distortion;
}

std::vector<std::uint8_t> decode(const McaDecoder& dec, const ObservationMatrix& obs) {
    if (obs.copies() != static_cast<int>(dec.output_sizes.size())) {
        throw DimensionMismatch("decode: observation copies != decoder copies");
    }
    std::vector<std::uint8_t> out(obs.rows());
    for (std::size_t i = 0; i < obs.rows(); ++i) {
        out[i] = static_cast<std::uint8_t>(dec.labeling[dec.index_of(obs.row(i))]);
    }
    return out;
}

double colour_agnostic_baseline(const Distribution& p, const Channel& w) {
    if (!w.is_square() || w.input_size() != p.size()) {
        throw DimensionMismatch("colour_agnostic_baseline: square channel on the source alphabet");
    }
    if (p.size() > kMaxEnumerableAlphabet) {
        throw AlphabetTooLarge("colour_agnostic_baseline: alphabet size capped at 6");
    }
    double best = 0.0;
    for (const Permutation& tau : all_permutations(p.size())) {
        double hit = 0.0;
        for (int x = 0; x < p.size(); ++x) hit += p[x] * w(x, tau[static_cast<std::size_t>(x)]);
        best = std::max(best, hit);
    }
    return 1.0 - best;
}

EvaluatedDistortion min_permuted_distortion(std::span<const std::uint8_t> truth,
                                            std::span<const std::uint8_t> estimate,
                                            const DistortionMeasure& d) {
    if (truth.size() != estimate.size()) {
        throw DimensionMismatch("min_permuted_distortion: sequence lengths differ");
    }
    if (truth.empty()) throw InputError("min_permuted_distortion: empty sequences");
    const int L = d.size();
    if (L > kMaxEnumerableAlphabet) {
        throw AlphabetTooLarge("min_permuted_distortion: alphabet size capped at 6");
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= L || estimate[i] >= L) {
            throw IndexOutOfRange("min_permuted_distortion: symbol out of range");
        }
    }
    // Pair counts make the metric O(n + L! L^2).
    std::vector<std::size_t> counts(static_cast<std::size_t>(L) * L, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++counts[static_cast<std::size_t>(truth[i]) * L + estimate[i]];
    }
    EvaluatedDistortion best;
    best.value = std::numeric_limits<double>::infinity();
    for (const Permutation& tau : all_permutations(L)) {
        double total = 0.0;
        for (int t = 0; t < L; ++t) {
            for (int e = 0; e < L; ++e) {
                total += static_cast<double>(counts[static_cast<std::size_t>(t) * L + e]) *
                         d(e, tau[static_cast<std::size_t>(t)]);
            }
        }
        if (total < best.value) {
            best.value = total;
            best.tau = tau;
        }
    }
    best.value /= static_cast<double>(truth.size());
    return best;
}

std::vector<std::uint8_t> majority_decode(const ObservationMatrix& obs) {
    if (obs.alphabet_size() != 2) throw NonBinaryAlphabet("majority_decode: binary alphabets only");
    std::vector<std::uint8_t> out(obs.rows());
    for (std::size_t i = 0; i < obs.rows(); ++i) {
        int ones = 0;
        for (int j = 0; j < obs.copies(); ++j) ones += obs.at(i, j);
        out[i] = static_cast<std::uint8_t>(2 * ones > obs.copies() ? 1 : 0);
    }
    return out;
}

}  // namespace udd
