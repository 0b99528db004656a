/**
 * @file reconstruct.hpp
 * @brief Monotone reconstruction of imbibition curves.
 *
 * A curve f is represented through its log-derivative w = f''/f', expanded
 * in shifted Legendre polynomials on [0, T]. Integrating
 *
 *     F1' = F2,   F2' = w(t) F2,   F(0) = (f0, f0_slope)
 *
 * gives F2(t) = f0_slope exp(int_0^t w), so f = F1 is strictly increasing for
 * any coefficients as long as f0_slope > 0. Coefficients are fitted by
 * penalized least squares with the closed-form L2 penalty of w.
 */
#pragma once

#include "imbibe/ode.hpp"
#include "imbibe/series.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imbibe {

/// Shifted Legendre polynomial on [0, T] with P_1(t) = 1 - 2t/T.
double legendre_shifted(int n, double t, double horizon);

/// P_0 .. P_{out.size()-1} at t.
void legendre_shifted_all(double t, double horizon, std::span<double> out);

/// Affine maps between original and unit-scaled time and value axes.
struct UnitTransform {
    double time_offset = 0.0;
    double time_scale = 1.0;
    double value_offset = 0.0;
    double value_scale = 1.0;

    double to_unit_time(double t) const noexcept { return (t - time_offset) / time_scale; }
    double from_unit_time(double u) const noexcept { return time_offset + time_scale * u; }
    double to_unit_value(double v) const noexcept { return (v - value_offset) / value_scale; }
    double from_unit_value(double u) const noexcept { return value_offset + value_scale * u; }
    /// d(original value)/d(original time) per unit-scaled slope.
    double slope_factor() const noexcept { return value_scale / time_scale; }
};

struct ScaledSeries {
    ImbibitionSeries series;
    UnitTransform transform;
};

/// Maps times and values affinely onto [0, 1]. Throws DataError when either
/// range is degenerate.
ScaledSeries rescale_to_unit(const ImbibitionSeries& data);

/// Inverse of rescale_to_unit.
ImbibitionSeries unscale(const ImbibitionSeries& scaled, const UnitTransform& transform);

struct ReconstructionModel {
    int degree = 0;
    double horizon = 1.0;
    std::vector<double> coefficients = {0.0};
    double f0 = 0.0;
    double f0_slope = 1.0;
    double lambda = 0.0;
    /// Maps the model axes (unit-scaled) back to the data axes.
    UnitTransform transform;

    /// Throws ConfigError when the invariants do not hold.
    void validate() const;
};

/// w(t) = sum_n c_n P_n(t).
double eval_w(const ReconstructionModel& model, double t);

/// lambda T sum_n c_n^2 / (2n + 1), i.e. lambda times the squared L2 norm of w.
double regularization_penalty(const ReconstructionModel& model);

struct MonotoneSample {
    std::vector<double> values;
    std::vector<double> slopes;
};

/// Values F1 and slopes F2 at increasing `times` within [0, T], in model
/// units. Throws IntegrationError when the step size underflows.
MonotoneSample integrate_monotone_model(const ReconstructionModel& model, std::span<const double> times,
                                        const OdeOptions& options = {});

/// Squared misfit plus penalty, in model units. +infinity if integration fails.
double reconstruction_objective(const ReconstructionModel& model, const ImbibitionSeries& data,
                                const OdeOptions& options = {});

struct FitOptions {
    /// Local searches: one from c = 0 plus (starts - 1) perturbed points.
    std::size_t starts = 8;
    /// Standard deviation of the perturbation of c_n is start_spread / (n + 1).
    double start_spread = 1.0;
    std::size_t max_iterations = 400;
    /// Relative tolerance on step length and objective decrease.
    double tolerance = 1e-14;
    std::uint64_t seed = 0;
    /// 0 = hardware concurrency.
    std::size_t threads = 0;
    OdeOptions ode;
};

struct FitResult {
    ReconstructionModel model;
    double objective = 0.0;
    /// Sum of squared residuals in unit-scaled values.
    double misfit = 0.0;
    std::size_t iterations = 0;
    std::size_t best_start = 0;
    bool converged = false;
    /// Initial slope was replaced by the first positive forward difference.
    bool slope_substituted = false;
};

/**
 * Fits a degree-`degree` model to `data` (original units; rescaled to the
 * unit square internally) by Levenberg-Marquardt with exact sensitivities,
 * multi-started as described in FitOptions. `converged` is false when the
 * best start hit the iteration limit.
 */
FitResult fit_monotone(const ImbibitionSeries& data, int degree, double lambda, const FitOptions& options = {});

/// Reconstructed curve at `times` in the original data units.
ImbibitionSeries evaluate_curve(const ReconstructionModel& model, std::span<const double> times,
                                double density = 1.0, const OdeOptions& options = {});

/// JSON document {M, T, lambda, c, f0, f0_slope, transform}.
std::string model_to_json(const ReconstructionModel& model);
/// Throws DataError on malformed input, ConfigError on invalid models.
ReconstructionModel model_from_json(std::string_view text);

} // namespace imbibe
