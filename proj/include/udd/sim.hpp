#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "udd/empirical.hpp"
#include "udd/model.hpp"
#include "udd/rng.hpp"

namespace udd {

enum class SourceMode {
    /// Type matches floor(n * p) per symbol, remainder on symbol 0,
    /// then a seeded shuffle.
    ExactType,
    /// Independent draws from p.
    Iid,
};

/// Sequence of length n with (approximately) the requested type.
std::vector<std::uint8_t> synthesize_source(const Distribution& type, std::size_t n,
                                            std::uint64_t seed,
                                            SourceMode mode = SourceMode::ExactType);

/// Each y_ij drawn independently from w_j(. | x_i). Cell (i, j) consumes
/// word (stream j, counter i) of the pinned generator, so the output is
/// reproducible across platforms and row-level parallelism.
ObservationMatrix corrupt(std::span<const std::uint8_t> x, const std::vector<Channel>& channels,
                          std::uint64_t seed);

}  // namespace udd
