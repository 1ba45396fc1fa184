#include "udd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace udd {

namespace {

void check_prob_vector(std::span<const double> v, double tol, const char* what) {
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0)) {
            throw InvalidDistribution(std::string(what) + ": negative or NaN entry");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol) {
        throw InvalidDistribution(std::string(what) + ": entries sum to " +
                                  std::to_string(sum) + ", not 1");
    }
}

void renormalize(std::vector<double>& v) {
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= sum;
}

}  // namespace

Alphabet::Alphabet(int size) : size_(size) {
    if (size < 2) throw InputError("alphabet size must be at least 2");
}

Distribution::Distribution(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty()) throw InvalidDistribution("empty probability vector");
    check_prob_vector(p_, kProbTol, "distribution");
    renormalize(p_);
}

Distribution Distribution::uniform(int size) {
    if (size < 1) throw InputError("uniform: size must be positive");
    return Distribution(std::vector<double>(static_cast<std::size_t>(size), 1.0 / size));
}

Distribution Distribution::point_mass(int size, int symbol) {
    if (symbol < 0 || symbol >= size) throw IndexOutOfRange("point_mass: symbol out of range");
    std::vector<double> v(static_cast<std::size_t>(size), 0.0);
    v[static_cast<std::size_t>(symbol)] = 1.0;
    return Distribution(std::move(v));
}

std::vector<int> Distribution::support() const {
    std::vector<int> s;
    for (int x = 0; x < size(); ++x) {
        if (p_[static_cast<std::size_t>(x)] > 0.0) s.push_back(x);
    }
    return s;
}

int Distribution::argmax() const {
    return static_cast<int>(std::max_element(p_.begin(), p_.end()) - p_.begin());
}

double l1_distance(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size()) throw DimensionMismatch("l1_distance: sizes differ");
    double d = 0.0;
    for (int x = 0; x < a.size(); ++x) d += std::abs(a[x] - b[x]);
    return d;
}

BscParam::BscParam(double b) : b_(b) {
    if (!(b >= 0.0 && b <= 1.0)) throw InvalidChannel("BSC parameter outside [0,1]");
}

Channel::Channel(int input_size, int output_size, std::vector<double> row_major)
    : w_(std::move(row_major)), in_(input_size), out_(output_size) {
    if (in_ < 1 || out_ < 1) throw InvalidChannel("channel dimensions must be positive");
    if (w_.size() != static_cast<std::size_t>(in_) * static_cast<std::size_t>(out_)) {
        throw DimensionMismatch("channel data does not match dimensions");
    }
    for (int x = 0; x < in_; ++x) {
        double sum = 0.0;
        for (int y = 0; y < out_; ++y) {
            const double w = (*this)(x, y);
            if (!(w >= 0.0 && w <= 1.0)) {
                throw InvalidChannel("channel row " + std::to_string(x) +
                                     ": entry outside [0,1]");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > kProbTol) {
            throw InvalidChannel("channel row " + std::to_string(x) + " sums to " +
                                 std::to_string(sum) + ", not 1");
        }
        double* row = w_.data() + static_cast<std::size_t>(x) * out_;
        for (int y = 0; y < out_; ++y) row[y] /= sum;
    }
}

Channel Channel::identity(int size) {
    std::vector<double> w(static_cast<std::size_t>(size) * size, 0.0);
    for (int x = 0; x < size; ++x) w[static_cast<std::size_t>(x) * size + x] = 1.0;
    return Channel(size, size, std::move(w));
}

Channel Channel::from_bsc(BscParam b) {
    const double p = b.b();
    return Channel(2, 2, {p, 1.0 - p, 1.0 - p, p});
}

double Channel::determinant() const {
    if (!is_square()) throw DimensionMismatch("determinant: channel is not square");
    const int n = in_;
    std::vector<double> a = w_;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int pivot = c;
        for (int r = c + 1; r < n; ++r) {
            if (std::abs(a[static_cast<std::size_t>(r) * n + c]) >
                std::abs(a[static_cast<std::size_t>(pivot) * n + c])) {
                pivot = r;
            }
        }
        const double pv = a[static_cast<std::size_t>(pivot) * n + c];
        if (pv == 0.0) return 0.0;
        if (pivot != c) {
            for (int k = c; k < n; ++k) {
                std::swap(a[static_cast<std::size_t>(pivot) * n + k],
                          a[static_cast<std::size_t>(c) * n + k]);
            }
            det = -det;
        }
        det *= pv;
        for (int r = c + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r) * n + c] / pv;
            for (int k = c; k < n; ++k) {
                a[static_cast<std::size_t>(r) * n + k] -= f * a[static_cast<std::size_t>(c) * n + k];
            }
        }
    }
    return det;
}

bool Channel::is_invertible(double tol) const {
    return is_square() && std::abs(determinant()) > tol;
}

DistortionMeasure::DistortionMeasure(int size, std::vector<double> row_major)
    : d_(std::move(row_major)), size_(size) {
    if (size < 1) throw InputError("distortion measure: size must be positive");
    if (d_.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {
        throw DimensionMismatch("distortion data does not match size");
    }
    for (double x : d_) {
        if (!(x >= 0.0)) throw InputError("distortion entries must be nonnegative");
    }
}

DistortionMeasure DistortionMeasure::hamming(int size) {
    std::vector<double> d(static_cast<std::size_t>(size) * size, 1.0);
    for (int x = 0; x < size; ++x) d[static_cast<std::size_t>(x) * size + x] = 0.0;
    return DistortionMeasure(size, std::move(d));
}

double DistortionMeasure::max_value() const {
    return *std::max_element(d_.begin(), d_.end());
}

JointDistribution::JointDistribution(int alphabet_size, int copies, std::vector<double> probs)
    : q_(std::move(probs)), L_(alphabet_size), K_(copies) {
    if (L_ < 2) throw InputError("joint distribution: alphabet size must be at least 2");
    if (K_ < 1) throw InputError("joint distribution: needs at least one copy");
    std::size_t cells = 1;
    for (int j = 0; j < K_; ++j) {
        cells *= static_cast<std::size_t>(L_);
        if (cells > kMaxJointCells) {
            throw InputError("joint distribution: L^K exceeds the dense-storage cap");
        }
    }
    if (q_.size() != cells) throw DimensionMismatch("joint distribution: data size != L^K");
    check_prob_vector(q_, kJointTol, "joint distribution");
    renormalize(q_);
}

JointDistribution JointDistribution::point_mass(int alphabet_size, int copies,
                                                std::span<const int> tuple) {
    if (static_cast<int>(tuple.size()) != copies) {
        throw DimensionMismatch("point_mass: tuple length != copies");
    }
    JointDistribution j;
    j.L_ = alphabet_size;
    j.K_ = copies;
    std::size_t cells = 1;
    for (int k = 0; k < copies; ++k) cells *= static_cast<std::size_t>(alphabet_size);
    j.q_.assign(cells, 0.0);
    j.q_[j.index_of(tuple)] = 1.0;
    return j;
}

std::size_t JointDistribution::index_of(std::span<const int> tuple) const {
    if (static_cast<int>(tuple.size()) != K_) {
        throw DimensionMismatch("index_of: tuple length != copies");
    }
    std::size_t idx = 0;
    for (int j = 0; j < K_; ++j) {
        const int y = tuple[static_cast<std::size_t>(j)];
        if (y < 0 || y >= L_) throw IndexOutOfRange("index_of: symbol out of range");
        idx = idx * static_cast<std::size_t>(L_) + static_cast<std::size_t>(y);
    }
    return idx;
}

void JointDistribution::tuple_of(std::size_t idx, std::span<int> out) const {
    for (int j = K_ - 1; j >= 0; --j) {
        out[static_cast<std::size_t>(j)] = static_cast<int>(idx % static_cast<std::size_t>(L_));
        idx /= static_cast<std::size_t>(L_);
    }
}

bool JointDistribution::is_point_mass() const {
    int nonzero = 0;
    for (double x : q_) nonzero += (x > 0.0);
    return nonzero == 1;
}

double l1_distance(const JointDistribution& a, const JointDistribution& b) {
    if (a.alphabet_size() != b.alphabet_size() || a.copies() != b.copies()) {
        throw DimensionMismatch("l1_distance: joint shapes differ");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.cells(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

DependentComponentSystem::DependentComponentSystem(Distribution src, std::vector<Channel> chans)
    : source(std::move(src)), channels(std::move(chans)) {
    if (channels.empty()) throw InputError("system needs at least one channel");
    for (const Channel& ch : channels) {
        if (ch.input_size() != source.size()) {
            throw DimensionMismatch("system: channel input alphabet != source alphabet");
        }
    }
}

bool is_permutation(const Permutation& tau, int size) {
    if (static_cast<int>(tau.size()) != size) return false;
    std::vector<bool> seen(static_cast<std::size_t>(size), false);
    for (int t : tau) {
        if (t < 0 || t >= size || seen[static_cast<std::size_t>(t)]) return false;
        seen[static_cast<std::size_t>(t)] = true;
    }
    return true;
}

Permutation identity_permutation(int size) {
    Permutation tau(static_cast<std::size_t>(size));
    std::iota(tau.begin(), tau.end(), 0);
    return tau;
}

Permutation inverse_permutation(const Permutation& tau) {
    Permutation inv(tau.size());
    for (std::size_t x = 0; x < tau.size(); ++x) inv[static_cast<std::size_t>(tau[x])] = static_cast<int>(x);
    return inv;
}

std::vector<Permutation> all_permutations(int size) {
    if (size > kMaxEnumerableAlphabet) {
        throw AlphabetTooLarge("permutation enumeration capped at alphabet size 6");
    }
    Permutation tau = identity_permutation(size);
    std::vector<Permutation> out;
    do {
        out.push_back(tau);
    } while (std::next_permutation(tau.begin(), tau.end()));
    return out;
}

Distribution permute(const Distribution& p, const Permutation& tau) {
    if (!is_permutation(tau, p.size())) throw InvalidPermutation("permute: not a permutation");
    std::vector<double> out(static_cast<std::size_t>(p.size()));
    for (int x = 0; x < p.size(); ++x) out[static_cast<std::size_t>(tau[static_cast<std::size_t>(x)])] = p[x];
    return Distribution(std::move(out));
}

Distribution apply_channel(const Channel& ch, const Distribution& p) {
    if (ch.input_size() != p.size()) throw DimensionMismatch("apply_channel: sizes differ");
    std::vector<double> out(static_cast<std::size_t>(ch.output_size()), 0.0);
    for (int x = 0; x < ch.input_size(); ++x) {
        for (int y = 0; y < ch.output_size(); ++y) {
            out[static_cast<std::size_t>(y)] += ch(x, y) * p[x];
        }
    }
    return Distribution(std::move(out));
}

JointDistribution product_output(const DependentComponentSystem& sys) {
    const int L = sys.channels.front().output_size();
    for (const Channel& ch : sys.channels) {
        if (ch.output_size() != L) {
            throw DimensionMismatch("product_output: channels have differing output alphabets");
        }
    }
    const int K = sys.copies();
    std::size_t cells = 1;
    for (int j = 0; j < K; ++j) {
        cells *= static_cast<std::size_t>(L);
        if (cells > kMaxJointCells) throw InputError("product_output: L^K exceeds the cap");
    }
    std::vector<double> q(cells, 0.0);
    std::vector<double> buf;
    std::vector<double> next;
    for (int x = 0; x < sys.alphabet_size(); ++x) {
        buf.assign(1, sys.source[x]);
        for (int j = 0; j < K; ++j) {
            next.assign(buf.size() * static_cast<std::size_t>(L), 0.0);
            const Channel& ch = sys.channels[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < buf.size(); ++i) {
                for (int y = 0; y < L; ++y) {
                    next[i * static_cast<std::size_t>(L) + static_cast<std::size_t>(y)] =
                        buf[i] * ch(x, y);
                }
            }
            buf.swap(next);
        }
        for (std::size_t i = 0; i < cells; ++i) q[i] += buf[i];
    }
    return JointDistribution(L, K, std::move(q));
}

double dcs_distance(const DependentComponentSystem& a, const DependentComponentSystem& b) {
    if (a.copies() != b.copies() || a.alphabet_size() != b.alphabet_size()) {
        throw DimensionMismatch("dcs_distance: systems have different shape");
    }
    double d = l1_distance(a.source, b.source);
    for (int j = 0; j < a.copies(); ++j) {
        const Channel& v = a.channels[static_cast<std::size_t>(j)];
        const Channel& w = b.channels[static_cast<std::size_t>(j)];
        if (v.output_size() != w.output_size()) {
            throw DimensionMismatch("dcs_distance: channel output alphabets differ");
        }
        double fb = 0.0;
        for (int x = 0; x < v.input_size(); ++x) {
            double row = 0.0;
            for (int y = 0; y < v.output_size(); ++y) row += std::abs(v(x, y) - w(x, y));
            fb = std::max(fb, row);
        }
        d += fb;
    }
    return d;
}

DependentComponentSystem flip_system(const DependentComponentSystem& sys, const Permutation& tau) {
    const int L = sys.alphabet_size();
    if (!is_permutation(tau, L)) throw InvalidPermutation("flip_system: not a permutation");
    std::vector<Channel> flipped;
    flipped.reserve(sys.channels.size());
    for (const Channel& w : sys.channels) {
        const int out = w.output_size();
        std::vector<double> rows(static_cast<std::size_t>(L) * static_cast<std::size_t>(out));
        for (int x = 0; x < L; ++x) {
            // row tau(x) of the flipped channel is row x of the original
            const auto src = w.row(x);
            std::copy(src.begin(), src.end(),
                      rows.begin() + static_cast<std::size_t>(tau[static_cast<std::size_t>(x)]) * out);
        }
        flipped.emplace_back(L, out, std::move(rows));
    }
    return DependentComponentSystem(permute(sys.source, tau), std::move(flipped));
}

BscParam compose_bsc(BscParam a, BscParam b) {
    return BscParam(2.0 * a.b() * b.b() + 1.0 - a.b() - b.b());
}

}  // namespace udd
