#pragma once

#include <cstdint>

namespace udd {

/// Name of the pinned generator, recorded in simulation manifests.
inline constexpr const char* kRngName = "splitmix64-counter";

namespace detail {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kStreamGamma = 0xd1342543de82ef95ULL;

/// SplitMix64 finalizer.
inline constexpr std::uint64_t splitmix64_fin(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: word(stream, counter) is a pure function of
/// (seed, stream, counter), so cell-level parallel generation stays
/// deterministic. Streams index independent substreams (one per copy,
/// per restart, ...), counters index draws within a stream.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

    constexpr std::uint64_t word(std::uint64_t stream, std::uint64_t counter) const {
        const std::uint64_t key =
            detail::splitmix64_fin(seed_ ^ (stream * detail::kStreamGamma + 1));
        return detail::splitmix64_fin(key + counter * detail::kGamma);
    }

    /// Uniform double in [0, 1), 53 significant bits.
    constexpr double unit(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(word(stream, counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) by 128-bit multiply-shift.
    constexpr std::uint64_t index(std::uint64_t stream, std::uint64_t counter,
                                  std::uint64_t bound) const {
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(word(stream, counter)) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    constexpr std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

/// Stateful single-stream view, for call sites that just want a sequence.
class RngStream {
public:
    CounterRng rng;
    std::uint64_t stream;
    std::uint64_t counter = 0;

    RngStream(CounterRng r, std::uint64_t s) : rng(r), stream(s) {}

    std::uint64_t next_word() { return rng.word(stream, counter++); }
    double next_unit() { return rng.unit(stream, counter++); }
    std::uint64_t next_index(std::uint64_t bound) { return rng.index(stream, counter++, bound); }
};

}  // namespace udd
