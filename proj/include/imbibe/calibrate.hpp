/**
 * @file calibrate.hpp
 * @brief Two-level (coarse/fine) particle swarm calibration of
 *        p = [n0, s_R, s_S, D, K_w] against an imbibition series.
 *
 * Coarse phase: two PSO runs on the coarse grid, one minimizing the SRE term
 * alone and one the DTW term alone, give eps_2 and eps_DTW and the weights
 * lambda_2 = 1/eps_2, lambda_DTW = 1/eps_DTW. A third PSO run over the full
 * weighted loss yields p0.
 *
 * Fine phase: nu PSO runs on the fine grid over boxes shrunk around the
 * previous optimum, [p_i (1 - sigma_n), p_i (1 + sigma_n)] with
 * sigma_n = 1/(2n) by default. Each run seeds one particle at the previous
 * optimum, so the fine phase never regresses on the fine grid.
 */
#pragma once

#include "imbibe/metrics.hpp"
#include "imbibe/pso.hpp"
#include "imbibe/series.hpp"
#include "imbibe/solver.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace imbibe {

/// Indices into a parameter point.
enum ParamIndex : std::size_t { kPorosity = 0, kResidual = 1, kMaxSat = 2, kDiffusion = 3, kExchange = 4 };
inline constexpr std::size_t kParamCount = 5;
using ParamPoint = std::array<double, kParamCount>;

const char* param_name(std::size_t index) noexcept;

/// Builds MaterialParams from a point; throws ConfigError if inadmissible.
MaterialParams to_material(std::span<const double> point);

/// Coarse search box with the residual/maximum saturation and D, K_w
/// defaults of the reference calibration and a material porosity range.
Box default_parameter_box(double porosity_min, double porosity_max);

/// Orders (s_R, s_S), separates them by at least 1e-6 and keeps them inside
/// `box` when the box allows it.
void repair_saturations(std::span<double> point, const Box& box);

/// Shrunk box around `previous` for fine step n >= 1 with radius sigma,
/// intersected with `coarse`. Zero components widen to [0, sigma * coarse
/// width]; empty intersections fall back to the coarse interval.
Box refine_box(std::span<const double> previous, int n, double sigma, const Box& coarse);

/// Default fine-phase radius 1/(2n).
double default_radius(int n);

/// Largest dt <= bound that divides every data time (times quantized to 1e-6 min).
double aligned_time_step(std::span<const double> times, double bound);

struct CalibrationProblem {
    ImbibitionSeries data;
    /// Specimen height (cm).
    double height = 5.0;
    double ambient = 2.33e-5;
    Boundary bc = Boundary::robin;
};

struct GridSpec {
    double dz;
    /// Chosen from the stability bound and the data times when absent.
    std::optional<double> dt;
};

struct MultigridSettings {
    int nu = 2;
    GridSpec coarse{0.25, std::nullopt};
    GridSpec fine{0.125, std::nullopt};
    /// Fraction of the stability bound used when choosing dt.
    double cfl_safety = 0.5;
    /// Per fine step radii; default_radius(n) when empty.
    std::vector<double> radii;
};

struct CalibrationSettings {
    PsoSettings pso;
    MultigridSettings multigrid;
    /// Only final_magnitude/final_threshold are used when weights come from the coarse phase.
    LossWeights weights;
    bool weights_from_coarse = true;
    /// Substitute for 1/eps when eps is zero or 1/eps exceeds it.
    double weight_cap = 1e6;
};

/// Loss of a parameter point on a fixed grid; +infinity for inadmissible
/// points or diverging simulations. Safe for concurrent calls.
class CalibrationObjective {
public:
    CalibrationObjective(const CalibrationProblem& problem, const SimGrid& grid, const LossWeights& weights);

    double operator()(std::span<const double> point) const;
    LossBreakdown breakdown(std::span<const double> point) const;
    /// Simulated Q at the data instants.
    std::vector<double> simulate_at_data(std::span<const double> point) const;

    const SimGrid& grid() const noexcept { return grid_; }

private:
    CalibrationProblem problem_;
    SimGrid grid_;
    LossWeights weights_;
    std::vector<std::size_t> steps_;
};

/// Simulation time step indices k_i with tau_i = k_i dt; AlignmentError otherwise.
std::vector<std::size_t> data_steps(const ImbibitionSeries& data, const SimGrid& grid);

struct LevelHistory {
    std::string name;
    std::vector<double> best;
    std::size_t evaluations = 0;
    ParamPoint best_point{};
    double best_value = 0.0;
    Box box;
    double dt = 0.0;
    double dz = 0.0;
};

struct CoarsePhaseResult {
    LossWeights weights;
    double eps_sre = 0.0;
    double eps_dtw = 0.0;
    bool capped_sre = false;
    bool capped_dtw = false;
    ParamPoint p0{};
    double objective = 0.0;
    std::vector<LevelHistory> history;
};

/// 1/eps, or `cap` when eps <= 0 or 1/eps > cap (flagged through `capped`).
double reciprocal_weight(double eps, double cap, bool* capped = nullptr);

/// Coarse grid for `box`: dt from the worst case (min n0, max D) of the box.
SimGrid coarse_grid(const CalibrationProblem& problem, const Box& box, const MultigridSettings& mg);

CoarsePhaseResult coarse_phase(const CalibrationProblem& problem, const Box& box,
                               const CalibrationSettings& settings);

struct CalibrationResult {
    ParamPoint p_star{};
    LossWeights weights_used;
    LossBreakdown loss;
    /// Stage-2 coarse objective value.
    double coarse_objective = 0.0;
    double eps_sre = 0.0;
    double eps_dtw = 0.0;
    std::vector<LevelHistory> history;
    std::uint64_t seed = 0;
    double wall_time = 0.0;
};

CalibrationResult calibrate(const CalibrationProblem& problem, const Box& box, const CalibrationSettings& settings);

/// Derived seed for a named sub-run of a calibration.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

} // namespace imbibe
