#pragma once

#include <cstdint>
#include <vector>

#include "udd/model.hpp"

namespace udd {

struct DcaConfig {
    int restarts = 16;
    int max_sweeps = 500;
    /// A restart has converged when the squared-L2 objective decreases by
    /// less than this between sweeps.
    double tolerance = 1e-12;
    std::uint64_t seed = 0;
    /// Fitted channels with |det| below this raise the identifiability flag.
    double identifiability_det_threshold = 0.1;
};

struct DcaFit {
    /// Fitted system in canonical orientation (source nonincreasing).
    DependentComponentSystem system;
    /// ||theta_forward(system) - q||_1 and _2.
    double residual_l1 = 0.0;
    double residual_l2 = 0.0;
    int restarts_used = 0;
    /// The winning restart stalled before exhausting its sweep budget.
    bool converged = false;
    /// K < 3 or some fitted channel is close to singular; the minimizer is
    /// then not unique up to relabeling and the fit may be arbitrary.
    bool identifiability_warning = false;
    /// Some fitted source mass is below 1e-3; the inverse map is not
    /// well-behaved at the simplex boundary.
    bool low_source_mass_warning = false;
    /// Objective value after each sweep of the winning restart.
    std::vector<double> objective_history;
};

/// Fit (r, V_1..V_K) minimizing ||product_output(r, V) - q||. Block
/// alternating minimization over the source and every channel row, each
/// block solved exactly over its probability simplex; multi-start from
/// symmetric Dirichlet draws; winner by (residual_l1, restart index).
/// Deterministic given (q, config).
DcaFit dca_fit(const JointDistribution& q, const DcaConfig& config = {});

/// The model map the fit minimizes against; alias of product_output with
/// the sorted-source orientation convention documented on DcaFit.
JointDistribution theta_forward(const DependentComponentSystem& sys);

/// Relabel so the source is nonincreasing; among qualifying permutations
/// the lexicographically smallest wins (identity when already sorted).
DependentComponentSystem canonical_orientation(const DependentComponentSystem& sys);

namespace detail {
/// min (1/2) v'Gv - h'v over the probability simplex, by enumeration of
/// support sets (exact for PSD G up to degenerate ties). `current` is kept
/// when no candidate beats it, so block updates never increase the
/// objective. Exposed for tests.
std::vector<double> simplex_qp_min(const std::vector<double>& gram,
                                   const std::vector<double>& linear,
                                   const std::vector<double>& current);

/// Euclidean projection onto the probability simplex (sort-based, exact).
std::vector<double> project_to_simplex(std::vector<double> v);
}  // namespace detail

}  // namespace udd
