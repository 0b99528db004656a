#include "imbibe/solver.hpp"

#include "imbibe/errors.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace imbibe {

const char* to_string(Boundary bc) noexcept
{
    return bc == Boundary::dirichlet ? "dirichlet" : "robin";
}

const char* to_string(Scheme scheme) noexcept
{
    return scheme == Scheme::mol ? "MOL" : "FTCS";
}

MaterialParams::MaterialParams(double porosity, AbsorptionLaw law, double exchange_rate)
    : n0_(porosity), law_(law), kw_(exchange_rate)
{
    if (!(n0_ > 0.0 && n0_ < 1.0))
        throw ConfigError(fmt::format("porosity must lie in (0,1) (got {})", n0_));
    if (!(kw_ >= 0.0) || !std::isfinite(kw_))
        throw ConfigError(fmt::format("water exchange rate must be finite and >= 0 (got {})", kw_));
}

SimGrid::SimGrid(double height, double horizon, double dz, double dt)
    : height_(height), horizon_(horizon)
{
    if (!(height > 0.0 && horizon > 0.0 && dz > 0.0 && dt > 0.0))
        throw ConfigError("grid extents and steps must be positive");
    // round the counts up so the snapped steps never exceed the requested ones
    const double nz = std::ceil(height / dz * (1.0 - 1e-12));
    const double nt = std::ceil(horizon / dt * (1.0 - 1e-12));
    if (nz < 2.0)
        throw ConfigError(fmt::format("grid needs at least 2 spatial intervals (H/dz = {})", height / dz));
    if (nt < 1.0)
        throw ConfigError(fmt::format("grid needs at least 1 time step (T/dt = {})", horizon / dt));
    nz_ = static_cast<std::size_t>(nz);
    nt_ = static_cast<std::size_t>(nt);
    dz_ = height / nz;
    dt_ = horizon / nt;
}

double cfl_max_dt(const MaterialParams& params, double dz)
{
    const double d = params.law().diffusion_rate();
    if (d == 0.0)
        return std::numeric_limits<double>::infinity();
    return params.porosity() * dz * dz / d;
}

void check_cfl(const SimGrid& grid, const MaterialParams& params)
{
    const double bound = cfl_max_dt(params, grid.dz());
    // snapping H/nz can perturb dt by a few ulps
    if (grid.dt() > bound * (1.0 + 1e-12))
        throw CflError(grid.dt(), bound);
}

std::vector<double> initial_profile(std::size_t nz, const MaterialParams& params, double ambient)
{
    std::vector<double> row(nz + 1, ambient);
    row[0] = params.porosity();
    return row;
}

void apply_boundary(std::span<double> row, const MaterialParams& params, Boundary bc, double ambient, double dz)
{
    const std::size_t n = row.size() - 1;
    if (row.size() < 3)
        throw ConfigError("boundary treatment needs at least 3 nodes");
    row[0] = params.porosity();
    if (bc == Boundary::dirichlet) {
        row[n] = ambient;
    } else {
        const double k = params.exchange_rate();
        row[n] = (4.0 * row[n - 1] - row[n - 2] + 2.0 * k * ambient * dz) / (3.0 + 2.0 * k * dz);
    }
}

double observable_q(std::span<const double> row, double dz, double density)
{
    if (row.size() < 2)
        throw ConfigError("quadrature needs at least 2 nodes");
    double interior = 0.0;
    for (std::size_t j = 1; j + 1 < row.size(); ++j)
        interior += row[j];
    return density * 0.5 * dz * (row.front() + 2.0 * interior + row.back());
}

Stepper::Stepper(const MaterialParams& params, Boundary bc, double ambient, double dz, double dt, Scheme scheme)
    : params_(params), bc_(bc), ambient_(ambient), dz_(dz), dt_(dt), scheme_(scheme),
      inv_n0_(1.0 / params.porosity()), inv_dz2_(1.0 / (dz * dz))
{
    if (!(ambient >= 0.0 && ambient <= params.porosity()))
        throw ConfigError(fmt::format("ambient moisture {} must lie in [0, n0 = {}]", ambient, params.porosity()));
}

void Stepper::apply_boundary(std::span<double> row) const
{
    imbibe::apply_boundary(row, params_, bc_, ambient_, dz_);
}

void Stepper::second_difference(std::span<const double> row, std::vector<double>& out)
{
    const std::size_t n = row.size();
    b_.resize(n);
    out.resize(n);
    const AbsorptionLaw& law = params_.law();
    for (std::size_t j = 0; j < n; ++j) {
        double s = row[j] * inv_n0_;
        s = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
        b_[j] = law.value_unchecked(s);
    }
    out.front() = 0.0;
    out.back() = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j)
        out[j] = (b_[j + 1] - 2.0 * b_[j] + b_[j - 1]) * inv_dz2_;
}

void Stepper::check_row(std::span<const double> row, std::size_t step) const
{
    // Interior values come from the update and must stay physical. The Robin
    // top node is a one-sided extrapolation that may undershoot transiently
    // while a sharp front reaches it, so boundary nodes only need to be finite.
    const double lo = -kSaturationSlack * params_.porosity();
    const double hi = (1.0 + kSaturationSlack) * params_.porosity();
    for (std::size_t j = 1; j + 1 < row.size(); ++j) {
        if (!(row[j] >= lo && row[j] <= hi))
            throw DivergenceError(step);
    }
    if (!std::isfinite(row.front()) || !std::isfinite(row.back()))
        throw DivergenceError(step);
}

void Stepper::advance(std::span<double> row, std::size_t step)
{
    const std::size_t n = row.size();
    second_difference(row, alpha_);
    if (scheme_ == Scheme::ftcs) {
        for (std::size_t j = 1; j + 1 < n; ++j)
            row[j] += dt_ * alpha_[j];
        apply_boundary(row);
        check_row(row, step);
        return;
    }
    predictor_.assign(row.begin(), row.end());
    for (std::size_t j = 1; j + 1 < n; ++j)
        predictor_[j] += dt_ * alpha_[j];
    apply_boundary(predictor_);
    check_row(predictor_, step);
    second_difference(predictor_, beta_);
    const double half_dt = 0.5 * dt_;
    for (std::size_t j = 1; j + 1 < n; ++j)
        row[j] += half_dt * (alpha_[j] + beta_[j]);
    apply_boundary(row);
    check_row(row, step);
}

namespace {

std::vector<double> single_step(std::span<const double> row, const MaterialParams& params, Boundary bc,
                                const SimGrid& grid, double ambient, Scheme scheme)
{
    Stepper stepper(params, bc, ambient, grid.dz(), grid.dt(), scheme);
    std::vector<double> next(row.begin(), row.end());
    stepper.advance(next, 1);
    return next;
}

} // namespace

std::vector<double> step_mol(std::span<const double> row, const MaterialParams& params, Boundary bc,
                             const SimGrid& grid, double ambient)
{
    return single_step(row, params, bc, grid, ambient, Scheme::mol);
}

std::vector<double> step_ftcs(std::span<const double> row, const MaterialParams& params, Boundary bc,
                              const SimGrid& grid, double ambient)
{
    return single_step(row, params, bc, grid, ambient, Scheme::ftcs);
}

MoistureField::MoistureField(std::size_t nz, std::size_t nt, double ambient)
    : nz_(nz), nt_(nt), ambient_(ambient), data_((nz + 1) * (nt + 1), 0.0)
{
}

SimulationResult simulate(const MaterialParams& params, const SimGrid& grid, Boundary bc, double ambient,
                          const SimulationOptions& options)
{
    if (!options.allow_unstable)
        check_cfl(grid, params);

    Stepper stepper(params, bc, ambient, grid.dz(), grid.dt(), options.scheme);
    std::vector<double> row = initial_profile(grid.nz(), params, ambient);

    SimulationResult result;
    if (options.keep_field) {
        result.field.emplace(grid.nz(), grid.nt(), ambient);
        std::copy(row.begin(), row.end(), result.field->row(0).begin());
    }

    std::vector<double> times(grid.nt() + 1);
    std::vector<double> q(grid.nt() + 1);
    times[0] = 0.0;
    q[0] = observable_q(row, grid.dz(), options.density);
    for (std::size_t k = 1; k <= grid.nt(); ++k) {
        stepper.advance(row, k);
        times[k] = static_cast<double>(k) * grid.dt();
        q[k] = observable_q(row, grid.dz(), options.density);
        if (result.field)
            std::copy(row.begin(), row.end(), result.field->row(k).begin());
    }
    result.q = ImbibitionSeries(std::move(times), std::move(q), options.density);
    result.final_row = std::move(row);
    return result;
}

} // namespace imbibe
