#include "imbibe/convergence.hpp"

#include "imbibe/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace imbibe {

std::vector<StepPair> halving_levels(int first_exponent, int last_exponent)
{
    std::vector<StepPair> out;
    for (int e = first_exponent; e <= last_exponent; ++e) {
        const double dt = std::ldexp(1.0, -e);
        out.push_back({2.0 * dt, dt});
    }
    return out;
}

namespace {

std::size_t integer_ratio(double coarse, double fine, const char* what)
{
    const double r = coarse / fine;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded)
        throw ConfigError(fmt::format("{} step {} is not an integer multiple of the reference step {}", what,
                                      coarse, fine));
    return static_cast<std::size_t>(rounded);
}

struct TestRun {
    Scheme scheme;
    StepPair level;
    SimGrid grid;
    std::size_t time_ratio;
    std::size_t space_ratio;
    Stepper stepper;
    std::vector<double> row;
    std::size_t step = 0;
    double sum = 0.0;
};

} // namespace

std::vector<ConvergenceRow> convergence_study(const ConvergenceConfig& config)
{
    const SimGrid ref_grid(config.height, config.horizon, config.reference.dz, config.reference.dt);
    check_cfl(ref_grid, config.params);

    std::vector<TestRun> runs;
    for (Scheme scheme : config.schemes) {
        for (const StepPair& level : config.levels) {
            SimGrid grid(config.height, config.horizon, level.dz, level.dt);
            if (std::abs(grid.dz() - level.dz) > 1e-12 * level.dz || std::abs(grid.dt() - level.dt) > 1e-12 * level.dt)
                throw ConfigError(fmt::format("level (dz={}, dt={}) does not divide H={} and T={}", level.dz,
                                              level.dt, config.height, config.horizon));
            check_cfl(grid, config.params);
            const std::size_t rt = integer_ratio(grid.dt(), ref_grid.dt(), "time");
            const std::size_t rz = integer_ratio(grid.dz(), ref_grid.dz(), "space");
            Stepper stepper(config.params, config.bc, config.ambient, grid.dz(), grid.dt(), scheme);
            auto row = initial_profile(grid.nz(), config.params, config.ambient);
            runs.push_back(TestRun{scheme, level, grid, rt, rz, std::move(stepper), std::move(row)});
        }
    }

    Stepper reference(config.params, config.bc, config.ambient, ref_grid.dz(), ref_grid.dt(), Scheme::mol);
    std::vector<double> ref_row = initial_profile(ref_grid.nz(), config.params, config.ambient);

    auto accumulate = [&](TestRun& run) {
        double s = 0.0;
        for (std::size_t j = 0; j < run.row.size(); ++j)
            s += std::abs(run.row[j] - ref_row[j * run.space_ratio]);
        run.sum += s;
    };

    for (std::size_t k = 0; k <= ref_grid.nt(); ++k) {
        if (k > 0)
            reference.advance(ref_row, k);
        for (TestRun& run : runs) {
            if (k % run.time_ratio != 0)
                continue;
            if (k > 0)
                run.stepper.advance(run.row, ++run.step);
            accumulate(run);
        }
    }

    std::vector<ConvergenceRow> table;
    for (Scheme scheme : config.schemes) {
        std::optional<double> previous;
        for (const TestRun& run : runs) {
            if (run.scheme != scheme)
                continue;
            const double e = run.sum / static_cast<double>(run.grid.nz() * run.grid.nt());
            ConvergenceRow row{scheme, run.grid.dz(), run.grid.dt(), e, std::nullopt};
            if (previous)
                row.order = std::log2(*previous / e);
            previous = e;
            table.push_back(row);
        }
    }
    return table;
}

double mean_space_time_error(const ConvergenceConfig& config, Scheme scheme, StepPair level)
{
    ConvergenceConfig single = config;
    single.schemes = {scheme};
    single.levels = {level};
    return convergence_study(single).front().error;
}

} // namespace imbibe
