/**
 * @file solver.hpp
 * @brief Explicit finite-difference integration of the 1D imbibition equation
 *
 *   d(theta)/dt = d^2 B(theta/n0) / dz^2,   z in [0,H], t in [0,T]
 *
 * with theta = n0 at the wetted face z = 0 and either a Dirichlet
 * (theta = theta_bar) or Robin (d theta/dz = K_w (theta_bar - theta)) top.
 * Space is discretized with central differences; time with Heun's two-stage
 * method (MOL) or forward Euler (FTCS, kept for comparison studies).
 */
#pragma once

#include "imbibe/absorption.hpp"
#include "imbibe/series.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace imbibe {

enum class Boundary { dirichlet, robin };
enum class Scheme { mol, ftcs };

const char* to_string(Boundary bc) noexcept;
const char* to_string(Scheme scheme) noexcept;

/// Porosity n0, absorption law and top-face water exchange rate K_w (1/cm).
class MaterialParams {
public:
    MaterialParams(double porosity, AbsorptionLaw law, double exchange_rate = 0.0);

    double porosity() const noexcept { return n0_; }
    const AbsorptionLaw& law() const noexcept { return law_; }
    double exchange_rate() const noexcept { return kw_; }

private:
    double n0_;
    AbsorptionLaw law_;
    double kw_;
};

/// Uniform space-time grid with H = nz*dz and T = nt*dt exactly.
/// The requested steps are snapped so that they divide H and T.
class SimGrid {
public:
    SimGrid(double height, double horizon, double dz, double dt);

    double height() const noexcept { return height_; }
    double horizon() const noexcept { return horizon_; }
    double dz() const noexcept { return dz_; }
    double dt() const noexcept { return dt_; }
    std::size_t nz() const noexcept { return nz_; }
    std::size_t nt() const noexcept { return nt_; }

private:
    double height_;
    double horizon_;
    double dz_;
    double dt_;
    std::size_t nz_;
    std::size_t nt_;
};

/// n0 dz^2 / max|B'| = n0 dz^2 / D; +infinity for D = 0.
double cfl_max_dt(const MaterialParams& params, double dz);

/// Throws CflError when grid.dt() exceeds cfl_max_dt(params, grid.dz()).
void check_cfl(const SimGrid& grid, const MaterialParams& params);

/// theta_j^0: n0 at the wetted node, ambient moisture elsewhere.
std::vector<double> initial_profile(std::size_t nz, const MaterialParams& params, double ambient);

/// Imposes the discrete boundary values on a full row (nz+1 >= 3 nodes).
void apply_boundary(std::span<double> row, const MaterialParams& params, Boundary bc, double ambient, double dz);

/// Composite trapezoid rho_l * integral of theta over the nodes 0..nz.
double observable_q(std::span<const double> row, double dz, double density = 1.0);

/**
 * Reusable single-row integrator. Holds the scratch buffers, so one instance
 * must not be shared between threads; separate instances are independent.
 */
class Stepper {
public:
    Stepper(const MaterialParams& params, Boundary bc, double ambient, double dz, double dt,
            Scheme scheme = Scheme::mol);

    /// Advances `row` in place by one time step. `step` is the index k of the
    /// row being produced and is reported if the update diverges.
    void advance(std::span<double> row, std::size_t step);

    void apply_boundary(std::span<double> row) const;

private:
    // out_j = (B(s_{j+1}) - 2B(s_j) + B(s_{j-1}))/dz^2 at interior nodes.
    void second_difference(std::span<const double> row, std::vector<double>& out);
    void check_row(std::span<const double> row, std::size_t step) const;

    MaterialParams params_;
    Boundary bc_;
    double ambient_;
    double dz_;
    double dt_;
    Scheme scheme_;
    double inv_n0_;
    double inv_dz2_;
    std::vector<double> b_;
    std::vector<double> alpha_;
    std::vector<double> beta_;
    std::vector<double> predictor_;
};

std::vector<double> step_mol(std::span<const double> row, const MaterialParams& params, Boundary bc,
                             const SimGrid& grid, double ambient);
std::vector<double> step_ftcs(std::span<const double> row, const MaterialParams& params, Boundary bc,
                              const SimGrid& grid, double ambient);

/// theta_j^k for k = 0..nt (rows) and j = 0..nz (columns).
class MoistureField {
public:
    MoistureField(std::size_t nz, std::size_t nt, double ambient);

    std::size_t nz() const noexcept { return nz_; }
    std::size_t nt() const noexcept { return nt_; }
    double ambient() const noexcept { return ambient_; }

    std::span<double> row(std::size_t k) { return {data_.data() + k * (nz_ + 1), nz_ + 1}; }
    std::span<const double> row(std::size_t k) const { return {data_.data() + k * (nz_ + 1), nz_ + 1}; }
    double operator()(std::size_t k, std::size_t j) const { return data_[k * (nz_ + 1) + j]; }

private:
    std::size_t nz_;
    std::size_t nt_;
    double ambient_;
    std::vector<double> data_;
};

struct SimulationOptions {
    Scheme scheme = Scheme::mol;
    bool keep_field = false;
    double density = 1.0;
    /// Skip the CFL check (instability demonstrations only).
    bool allow_unstable = false;
};

struct SimulationResult {
    ImbibitionSeries q;
    std::vector<double> final_row;
    std::optional<MoistureField> field;
};

SimulationResult simulate(const MaterialParams& params, const SimGrid& grid, Boundary bc, double ambient,
                          const SimulationOptions& options = {});

} // namespace imbibe
