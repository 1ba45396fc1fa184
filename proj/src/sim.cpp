#include "udd/sim.hpp"

#include <cmath>

namespace udd {

namespace {

// Streams 0..K-1 belong to corrupt's copies; source synthesis uses its own.
constexpr std::uint64_t kSourceStream = 0xa5a5a5a5a5a5a5a5ULL;

std::uint8_t draw_symbol(std::span<const double> row, double u) {
    double cum = 0.0;
    for (std::size_t y = 0; y + 1 < row.size(); ++y) {
        cum += row[y];
        if (u < cum) return static_cast<std::uint8_t>(y);
    }
    return static_cast<std::uint8_t>(row.size() - 1);
}

}  // namespace

std::vector<std::uint8_t> synthesize_source(const Distribution& type, std::size_t n,
                                            std::uint64_t seed, SourceMode mode) {
    if (n < 1) throw InputError("synthesize_source: n must be positive");
    const int L = type.size();
    const CounterRng rng(seed);
    std::vector<std::uint8_t> x;
    x.reserve(n);
    if (mode == SourceMode::Iid) {
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(draw_symbol(std::span<const double>(type.probs()), rng.unit(kSourceStream, i)));
        }
        return x;
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(L));
    std::size_t used = 0;
    for (int s = 0; s < L; ++s) {
        counts[static_cast<std::size_t>(s)] =
            static_cast<std::size_t>(std::floor(static_cast<double>(n) * type[s]));
        used += counts[static_cast<std::size_t>(s)];
    }
    counts[0] += n - used;
    for (int s = 0; s < L; ++s) {
        x.insert(x.end(), counts[static_cast<std::size_t>(s)], static_cast<std::uint8_t>(s));
    }
    // Fisher-Yates with the pinned generator.
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng.index(kSourceStream, i, i + 1);
        std::swap(x[i], x[j]);
    }
    return x;
}

ObservationMatrix corrupt(std::span<const std::uint8_t> x, const std::vector<Channel>& channels,
                          std::uint64_t seed) {
    if (channels.empty()) throw InputError("corrupt: needs at least one channel");
    const int in = channels.front().input_size();
    const int out = channels.front().output_size();
    for (const Channel& ch : channels) {
        if (ch.input_size() != in || ch.output_size() != out) {
            throw DimensionMismatch("corrupt: channels must share alphabets");
        }
    }
    for (std::uint8_t s : x) {
        if (s >= in) throw IndexOutOfRange("corrupt: source symbol out of range");
    }
    const int K = static_cast<int>(channels.size());
    const CounterRng rng(seed);
    std::vector<std::uint8_t> y(x.size() * static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int j = 0; j < K; ++j) {
            const double u = rng.unit(static_cast<std::uint64_t>(j) + 1, i);
            y[i * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)] =
                draw_symbol(channels[static_cast<std::size_t>(j)].row(x[i]), u);
        }
    }
    return ObservationMatrix(out, x.size(), K, std::move(y));
}

}  // namespace udd
