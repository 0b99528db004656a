#include "imbibe/calibrate.hpp"

#include "imbibe/errors.hpp"
#include "imbibe/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <spdlog/spdlog.h>
#include <thread>

namespace imbibe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSaturationGap = 1e-6;

ParamPoint to_point(std::span<const double> x)
{
    ParamPoint p{};
    std::copy_n(x.begin(), kParamCount, p.begin());
    return p;
}

} // namespace

const char* param_name(std::size_t index) noexcept
{
    static constexpr const char* names[] = {"n0", "s_R", "s_S", "D", "K_w"};
    return index < kParamCount ? names[index] : "?";
}

MaterialParams to_material(std::span<const double> point)
{
    if (point.size() != kParamCount)
        throw ConfigError("parameter point must have 5 components");
    return MaterialParams(point[kPorosity], AbsorptionLaw(point[kResidual], point[kMaxSat], point[kDiffusion]),
                          point[kExchange]);
}

Box default_parameter_box(double porosity_min, double porosity_max)
{
    return Box{{porosity_min, 0.1, 0.5, 0.0, 0.0}, {porosity_max, 0.75, 0.98, 0.1, 100.0}};
}

void repair_saturations(std::span<double> point, const Box& box)
{
    double& sr = point[kResidual];
    double& ss = point[kMaxSat];
    if (sr > ss)
        std::swap(sr, ss);
    sr = std::clamp(sr, box.lower[kResidual], box.upper[kResidual]);
    ss = std::clamp(ss, box.lower[kMaxSat], box.upper[kMaxSat]);
    if (ss - sr < kSaturationGap) {
        ss = std::min(sr + kSaturationGap, box.upper[kMaxSat]);
        if (ss - sr < kSaturationGap)
            sr = std::max(ss - kSaturationGap, box.lower[kResidual]);
    }
}

double default_radius(int n)
{
    return 1.0 / (2.0 * n);
}

Box refine_box(std::span<const double> previous, int n, double sigma, const Box& coarse)
{
    if (n < 1)
        throw ConfigError("refinement step index must be >= 1");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw ConfigError(fmt::format("refinement radius must lie in (0,1) (got {})", sigma));
    coarse.validate();
    Box box = coarse;
    for (std::size_t i = 0; i < coarse.dimension(); ++i) {
        const double p = previous[i];
        if (!std::isfinite(p))
            throw ConfigError("refinement centre must be finite");
        double lo = std::min(p * (1.0 - sigma), p * (1.0 + sigma));
        double hi = std::max(p * (1.0 - sigma), p * (1.0 + sigma));
        if (p == 0.0) {
            hi = sigma * (coarse.upper[i] - coarse.lower[i]);
            spdlog::info("refine_box: {} = 0 collapses the multiplicative box; using [0, {:.6g}]", param_name(i), hi);
        }
        lo = std::max(lo, coarse.lower[i]);
        hi = std::min(hi, coarse.upper[i]);
        if (lo > hi) {
            spdlog::warn("refine_box: empty interval for {} around {}; falling back to the coarse interval",
                         param_name(i), p);
            lo = coarse.lower[i];
            hi = coarse.upper[i];
        }
        box.lower[i] = lo;
        box.upper[i] = hi;
    }
    if (box.dimension() == kParamCount && box.lower[kResidual] >= box.upper[kMaxSat]) {
        spdlog::warn("refine_box: saturation intervals leave no s_R < s_S; restoring coarse saturation bounds");
        box.lower[kResidual] = coarse.lower[kResidual];
        box.upper[kResidual] = coarse.upper[kResidual];
        box.lower[kMaxSat] = coarse.lower[kMaxSat];
        box.upper[kMaxSat] = coarse.upper[kMaxSat];
    }
    return box;
}

double aligned_time_step(std::span<const double> times, double bound)
{
    if (!(bound > 0.0))
        throw ConfigError("time step bound must be positive");
    long long g = 0;
    for (double t : times) {
        const long long q = std::llround(t * 1e6);
        g = std::gcd(g, q);
    }
    if (g == 0)
        throw ConfigError("data times must contain a positive instant");
    const double base = static_cast<double>(g) * 1e-6;
    if (std::isinf(bound))
        return base;
    const double m = std::ceil(base / bound * (1.0 - 1e-12));
    return base / std::max(1.0, m);
}

std::vector<std::size_t> data_steps(const ImbibitionSeries& data, const SimGrid& grid)
{
    std::vector<std::size_t> steps;
    steps.reserve(data.size());
    for (double tau : data.times()) {
        const double k = std::round(tau / grid.dt());
        if (k < 0.0 || std::abs(k * grid.dt() - tau) > 1e-9 * std::max(1.0, tau) ||
            k > static_cast<double>(grid.nt()))
            throw AlignmentError(fmt::format("data time {} is not on the simulation grid (dt = {})", tau, grid.dt()));
        steps.push_back(static_cast<std::size_t>(k));
    }
    return steps;
}

CalibrationObjective::CalibrationObjective(const CalibrationProblem& problem, const SimGrid& grid,
                                           const LossWeights& weights)
    : problem_(problem), grid_(grid), weights_(weights), steps_(data_steps(problem.data, grid))
{
}

std::vector<double> CalibrationObjective::simulate_at_data(std::span<const double> point) const
{
    const MaterialParams params = to_material(point);
    check_cfl(grid_, params);
    Stepper stepper(params, problem_.bc, problem_.ambient, grid_.dz(), grid_.dt());
    std::vector<double> row = initial_profile(grid_.nz(), params, problem_.ambient);
    const double density = problem_.data.density();
    std::vector<double> out;
    out.reserve(steps_.size());
    std::size_t k = 0;
    for (std::size_t target : steps_) {
        for (; k < target; )
            stepper.advance(row, ++k);
        out.push_back(observable_q(row, grid_.dz(), density));
    }
    return out;
}

LossBreakdown CalibrationObjective::breakdown(std::span<const double> point) const
{
    ImbibitionSeries sim(problem_.data.times(), simulate_at_data(point), problem_.data.density());
    return calibration_loss(problem_.data, sim, weights_);
}

double CalibrationObjective::operator()(std::span<const double> point) const
{
    try {
        return breakdown(point).total;
    } catch (const NumericalError&) {
        return kInf;
    } catch (const ConfigError&) {
        return kInf;
    }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept
{
    // splitmix64 finalizer
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

SimGrid grid_for(const CalibrationProblem& problem, const GridSpec& spec, double porosity_min, double diffusion_max,
                 double safety)
{
    const double horizon = problem.data.times().back();
    double dt;
    if (spec.dt) {
        dt = *spec.dt;
    } else {
        const double bound = diffusion_max > 0.0 ? porosity_min * spec.dz * spec.dz / diffusion_max : kInf;
        dt = aligned_time_step(problem.data.times(), safety * bound);
    }
    SimGrid grid(problem.height, horizon, spec.dz, dt);
    if (diffusion_max > 0.0) {
        const double bound = porosity_min * grid.dz() * grid.dz() / diffusion_max;
        if (grid.dt() > bound * (1.0 + 1e-12))
            throw CflError(grid.dt(), bound);
    }
    data_steps(problem.data, grid);
    return grid;
}

LevelHistory run_level(const std::string& name, const CalibrationObjective& objective, const Box& box,
                       PsoSettings pso, std::uint64_t seed, std::span<const std::vector<double>> initial)
{
    pso.seed = seed;
    const Repair repair = [&box](std::span<double> x) { repair_saturations(x, box); };
    const PsoResult r = pso_minimize(std::cref(objective), box, pso, initial, repair);
    LevelHistory h;
    h.name = name;
    h.best = r.history;
    h.evaluations = r.evaluations;
    h.best_point = to_point(r.best_point);
    h.best_value = r.best_value;
    h.box = box;
    h.dt = objective.grid().dt();
    h.dz = objective.grid().dz();
    spdlog::info("{}: best {:.6g} after {} iterations ({} evaluations)", name, r.best_value, r.iterations,
                 r.evaluations);
    return h;
}

} // namespace

double reciprocal_weight(double eps, double cap, bool* capped)
{
    const bool hit = !(eps > 0.0) || 1.0 / eps > cap;
    if (capped)
        *capped = hit;
    return hit ? cap : 1.0 / eps;
}

SimGrid coarse_grid(const CalibrationProblem& problem, const Box& box, const MultigridSettings& mg)
{
    return grid_for(problem, mg.coarse, box.lower[kPorosity], box.upper[kDiffusion], mg.cfl_safety);
}

CoarsePhaseResult coarse_phase(const CalibrationProblem& problem, const Box& box, const CalibrationSettings& settings)
{
    box.validate();
    if (box.dimension() != kParamCount)
        throw ConfigError("calibration box must have 5 dimensions");
    if (!(box.lower[kPorosity] > 0.0))
        throw ConfigError("porosity lower bound must be positive");
    const SimGrid grid = coarse_grid(problem, box, settings.multigrid);
    spdlog::info("coarse grid: dz = {:.6g} cm, dt = {:.6g} min ({} x {} steps)", grid.dz(), grid.dt(), grid.nz(),
                 grid.nt());

    CoarsePhaseResult out;
    out.weights = settings.weights;
    const std::uint64_t master = settings.pso.seed;

    if (settings.weights_from_coarse) {
        LossWeights sre_only{1.0, 0.0, 0.0, settings.weights.final_threshold};
        LossWeights dtw_only{0.0, 1.0, 0.0, settings.weights.final_threshold};
        const CalibrationObjective sre_obj(problem, grid, sre_only);
        const CalibrationObjective dtw_obj(problem, grid, dtw_only);

        PsoSettings half = settings.pso;
        const std::size_t workers = resolve_threads(settings.pso.threads);
        half.threads = std::max<std::size_t>(1, workers / 2);
        LevelHistory sre_level, dtw_level;
        if (workers > 1) {
            std::jthread other(
                [&] { dtw_level = run_level("coarse_dtw", dtw_obj, box, half, derive_seed(master, 2), {}); });
            sre_level = run_level("coarse_sre", sre_obj, box, half, derive_seed(master, 1), {});
        } else {
            sre_level = run_level("coarse_sre", sre_obj, box, half, derive_seed(master, 1), {});
            dtw_level = run_level("coarse_dtw", dtw_obj, box, half, derive_seed(master, 2), {});
        }
        out.eps_sre = sre_level.best_value;
        out.eps_dtw = dtw_level.best_value;
        out.weights.sre = reciprocal_weight(out.eps_sre, settings.weight_cap, &out.capped_sre);
        out.weights.dtw = reciprocal_weight(out.eps_dtw, settings.weight_cap, &out.capped_dtw);
        if (out.capped_sre)
            spdlog::warn("coarse phase: eps_2 = {:.3g}; lambda_2 capped at {:.3g}", out.eps_sre, settings.weight_cap);
        if (out.capped_dtw)
            spdlog::warn("coarse phase: eps_DTW = {:.3g}; lambda_DTW capped at {:.3g}", out.eps_dtw,
                         settings.weight_cap);
        out.history.push_back(std::move(sre_level));
        out.history.push_back(std::move(dtw_level));
    }
    spdlog::info("loss weights: lambda_2 = {:.6g}, lambda_DTW = {:.6g}", out.weights.sre, out.weights.dtw);

    const CalibrationObjective full(problem, grid, out.weights);
    LevelHistory stage2 = run_level("coarse_full", full, box, settings.pso, derive_seed(master, 3), {});
    out.p0 = stage2.best_point;
    out.objective = stage2.best_value;
    out.history.push_back(std::move(stage2));
    return out;
}

CalibrationResult calibrate(const CalibrationProblem& problem, const Box& box, const CalibrationSettings& settings)
{
    const auto start = std::chrono::steady_clock::now();
    const MultigridSettings& mg = settings.multigrid;
    if (mg.nu < 0)
        throw ConfigError("number of fine steps must be >= 0");
    if (!mg.radii.empty() && mg.radii.size() < static_cast<std::size_t>(mg.nu))
        throw ConfigError("radius schedule shorter than the number of fine steps");

    CoarsePhaseResult coarse = coarse_phase(problem, box, settings);

    CalibrationResult result;
    result.seed = settings.pso.seed;
    result.weights_used = coarse.weights;
    result.coarse_objective = coarse.objective;
    result.eps_sre = coarse.eps_sre;
    result.eps_dtw = coarse.eps_dtw;
    result.history = std::move(coarse.history);
    result.p_star = coarse.p0;

    auto radius = [&](int n) { return mg.radii.empty() ? default_radius(n) : mg.radii[static_cast<std::size_t>(n - 1)]; };

    if (mg.nu == 0) {
        const CalibrationObjective objective(problem, coarse_grid(problem, box, mg), result.weights_used);
        result.loss = objective.breakdown(result.p_star);
    } else {
        // Every fine box lies within p0 * prod(1 +/- sigma_n), so a dt stable for that
        // envelope is stable on all refinement levels.
        // A zero centre (only possible at n = 1) widens to [0, sigma_1 * coarse width].
        double centre = coarse.p0[kDiffusion];
        double growth = 1.0;
        if (centre == 0.0)
            centre = radius(1) * (box.upper[kDiffusion] - box.lower[kDiffusion]);
        else
            growth = 1.0 + radius(1);
        for (int n = 2; n <= mg.nu; ++n)
            growth *= 1.0 + radius(n);
        const double d_max = std::min(box.upper[kDiffusion], centre * growth);
        const SimGrid fine = grid_for(problem, mg.fine, box.lower[kPorosity], d_max > 0.0 ? d_max : 0.0,
                                      mg.cfl_safety);
        spdlog::info("fine grid: dz = {:.6g} cm, dt = {:.6g} min ({} x {} steps)", fine.dz(), fine.dt(), fine.nz(),
                     fine.nt());
        const CalibrationObjective objective(problem, fine, result.weights_used);
        ParamPoint previous = coarse.p0;
        for (int n = 1; n <= mg.nu; ++n) {
            Box level_box = refine_box(previous, n, radius(n), box);
            const std::vector<std::vector<double>> seeded{{previous.begin(), previous.end()}};
            LevelHistory level = run_level(fmt::format("fine_{}", n), objective, level_box, settings.pso,
                                           derive_seed(settings.pso.seed, 3 + static_cast<std::uint64_t>(n)), seeded);
            previous = level.best_point;
            result.history.push_back(std::move(level));
        }
        result.p_star = previous;
        result.loss = objective.breakdown(result.p_star);
    }
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace imbibe
