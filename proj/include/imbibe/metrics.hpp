/**
 * @file metrics.hpp
 * @brief Discrepancy measures between observed and simulated imbibition curves.
 */
#pragma once

#include "imbibe/series.hpp"

#include <span>

namespace imbibe {

/// Weights of the calibration loss. `sre` and `dtw` scale the two curve
/// terms; the end-state penalty adds `final_magnitude` whenever the squared
/// end mismatch strictly exceeds `final_threshold`.
struct LossWeights {
    double sre = 1.0;
    double dtw = 1.0;
    double final_magnitude = 10.0;
    double final_threshold = 1e-4;
};

/**
 * Squared relative Euclidean error
 *
 *   (1/N) sum_{i=0}^{N} (d_i - s_i)^2 / d_i^2,   N = size - 1.
 *
 * Entries with d_i == 0 are skipped and the divisor becomes
 * min(N, retained); throws DataError when nothing is retained.
 */
double sre(std::span<const double> data, std::span<const double> sim);

/// Dynamic time warping with squared local cost and steps (1,0),(0,1),(1,1);
/// returns the square root of the optimal accumulated cost.
double dtw(std::span<const double> a, std::span<const double> b);

/// final_magnitude if |q_data_end - q_sim_end|^2 > final_threshold, else 0.
double final_cost(double q_data_end, double q_sim_end, const LossWeights& weights = {});

struct LossBreakdown {
    double sre = 0.0;   // unweighted
    double dtw = 0.0;   // unweighted
    double final = 0.0; // already includes final_magnitude
    double total = 0.0;
};

/**
 * weights.sre * sre + weights.dtw * dtw + final_cost, with the simulated
 * series sampled at the data instants. Every data time must coincide with a
 * simulation time (relative tolerance 1e-9), otherwise AlignmentError.
 */
LossBreakdown calibration_loss(const ImbibitionSeries& data, const ImbibitionSeries& sim,
                               const LossWeights& weights);

} // namespace imbibe
