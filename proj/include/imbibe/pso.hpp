/**
 * @file pso.hpp
 * @brief Global-best particle swarm minimizer over a box.
 *
 * Velocities are updated as v = w v + c1 u1 (p_best - x) + c2 u2 (g_best - x)
 * with an adaptive inertia w in [inertia_min, inertia_max]: it doubles while
 * the swarm keeps improving and halves after repeated stalls. Positions are
 * clamped to the box (the clamped velocity component is zeroed).
 *
 * Each particle owns an RNG stream derived from (seed, particle index), and
 * objective values are reduced in particle order, so results do not depend
 * on the number of worker threads.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace imbibe {

struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dimension() const noexcept { return lower.size(); }
    bool contains(std::span<const double> x) const noexcept;
    /// Throws ConfigError unless lower <= upper component-wise and finite.
    void validate() const;
};

struct PsoSettings {
    std::size_t swarm_size = 1000;
    std::size_t max_iterations = 500;
    std::size_t max_stall = 50;
    double function_tolerance = 1e-7;
    double self_weight = 1.49;
    double social_weight = 1.49;
    double inertia_min = 0.1;
    double inertia_max = 1.1;
    std::uint64_t seed = 0;
    /// 0 = hardware concurrency.
    std::size_t threads = 0;
};

using Objective = std::function<double(std::span<const double>)>;
/// Maps a clamped position to an admissible one, in place.
using Repair = std::function<void(std::span<double>)>;

struct PsoResult {
    std::vector<double> best_point;
    double best_value;
    /// Best value after initialization (entry 0) and after every iteration.
    std::vector<double> history;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool stalled = false;
};

/**
 * Minimizes `objective` over `box`. The objective may return +infinity for
 * rejected points and must be safe to call concurrently. `initial_points`
 * replace the random start of the first particles (clamped to the box).
 */
PsoResult pso_minimize(const Objective& objective, const Box& box, const PsoSettings& settings,
                       std::span<const std::vector<double>> initial_points = {}, const Repair& repair = {});

} // namespace imbibe
