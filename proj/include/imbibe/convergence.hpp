#pragma once

#include "imbibe/solver.hpp"

#include <optional>
#include <vector>

namespace imbibe {

struct StepPair {
    double dz;
    double dt;
};

/// Test grids dt = 2^-e, dz = 2 dt for e = first..last.
std::vector<StepPair> halving_levels(int first_exponent, int last_exponent);

struct ConvergenceConfig {
    MaterialParams params;
    double height;
    double horizon;
    double ambient;
    Boundary bc = Boundary::dirichlet;
    /// Reference solution is always computed with MOL on this grid.
    StepPair reference{0x1p-9, 0x1p-12};
    std::vector<StepPair> levels;
    std::vector<Scheme> schemes{Scheme::mol, Scheme::ftcs};
};

struct ConvergenceRow {
    Scheme scheme;
    double dz;
    double dt;
    /// Mean space-time error against the reference.
    double error;
    /// log2(E_prev / E) against the previous level of the same scheme.
    std::optional<double> order;
};

/**
 * Runs every (scheme, level) pair against one MOL reference solution.
 * Test nodes must coincide with reference nodes (integer step ratios);
 * errors are accumulated while the reference is advanced, so no field is
 * stored. Throws ConfigError if a level is not nested in the reference.
 */
std::vector<ConvergenceRow> convergence_study(const ConvergenceConfig& config);

/// Mean space-time error of a single run against the reference.
double mean_space_time_error(const ConvergenceConfig& config, Scheme scheme, StepPair level);

} // namespace imbibe
