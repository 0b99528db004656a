#include "imbibe/pso.hpp"

#include "imbibe/errors.hpp"
#include "imbibe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <random>

namespace imbibe {

bool Box::contains(std::span<const double> x) const noexcept
{
    if (x.size() != lower.size())
        return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= lower[i] && x[i] <= upper[i]))
            return false;
    return true;
}

void Box::validate() const
{
    if (lower.size() != upper.size() || lower.empty())
        throw ConfigError("box bounds must be nonempty and of equal dimension");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i])
            throw ConfigError(fmt::format("invalid box interval [{}, {}] in dimension {}", lower[i], upper[i], i));
}

namespace {

struct Particle {
    std::mt19937_64 rng;
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> best_x;
    double value = std::numeric_limits<double>::infinity();
    double best_value = std::numeric_limits<double>::infinity();

    double uniform() { return static_cast<double>(rng() >> 11) * 0x1p-53; }
};

std::mt19937_64 particle_stream(std::uint64_t seed, std::size_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

double sanitize(double f)
{
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
}

} // namespace

PsoResult pso_minimize(const Objective& objective, const Box& box, const PsoSettings& settings,
                       std::span<const std::vector<double>> initial_points, const Repair& repair)
{
    box.validate();
    if (settings.swarm_size == 0 || settings.max_iterations == 0 || settings.max_stall == 0)
        throw ConfigError("swarm size, iteration and stall limits must be positive");
    if (!(settings.self_weight > 0.0 && settings.social_weight > 0.0))
        throw ConfigError("PSO self and social weights must be positive");
    if (!(settings.inertia_min > 0.0 && settings.inertia_min <= settings.inertia_max))
        throw ConfigError("invalid PSO inertia range");

    const std::size_t dim = box.dimension();
    const std::size_t n = settings.swarm_size;
    std::vector<Particle> swarm(n);

    for (std::size_t p = 0; p < n; ++p) {
        Particle& part = swarm[p];
        part.rng = particle_stream(settings.seed, p);
        part.x.resize(dim);
        part.v.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const double width = box.upper[d] - box.lower[d];
            part.x[d] = box.lower[d] + width * part.uniform();
            part.v[d] = width * (2.0 * part.uniform() - 1.0);
        }
        if (p < initial_points.size()) {
            if (initial_points[p].size() != dim)
                throw ConfigError("initial point dimension does not match the box");
            for (std::size_t d = 0; d < dim; ++d)
                part.x[d] = std::clamp(initial_points[p][d], box.lower[d], box.upper[d]);
        }
        if (repair)
            repair(part.x);
    }

    auto evaluate_all = [&] {
        parallel_for(
            n, [&](std::size_t p) { swarm[p].value = sanitize(objective(swarm[p].x)); }, settings.threads);
    };

    PsoResult result;
    result.best_value = std::numeric_limits<double>::infinity();
    result.best_point = swarm.front().x;

    evaluate_all();
    result.evaluations += n;
    for (Particle& part : swarm) {
        part.best_x = part.x;
        part.best_value = part.value;
        if (part.value < result.best_value) {
            result.best_value = part.value;
            result.best_point = part.x;
        }
    }
    result.history.push_back(result.best_value);

    double inertia = settings.inertia_max;
    int stall_counter = 0;
    for (std::size_t it = 1; it <= settings.max_iterations; ++it) {
        const std::vector<double> global = result.best_point;
        for (Particle& part : swarm) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double u1 = part.uniform();
                const double u2 = part.uniform();
                part.v[d] = inertia * part.v[d] + settings.self_weight * u1 * (part.best_x[d] - part.x[d]) +
                            settings.social_weight * u2 * (global[d] - part.x[d]);
                double next = part.x[d] + part.v[d];
                if (next < box.lower[d] || next > box.upper[d]) {
                    next = std::clamp(next, box.lower[d], box.upper[d]);
                    part.v[d] = 0.0;
                }
                part.x[d] = next;
            }
            if (repair)
                repair(part.x);
        }

        evaluate_all();
        result.evaluations += n;

        bool improved = false;
        for (Particle& part : swarm) {
            if (part.value < part.best_value) {
                part.best_value = part.value;
                part.best_x = part.x;
            }
            if (part.value < result.best_value) {
                result.best_value = part.value;
                result.best_point = part.x;
                improved = true;
            }
        }
        result.history.push_back(result.best_value);
        result.iterations = it;

        if (improved) {
            stall_counter = std::max(0, stall_counter - 1);
        } else {
            ++stall_counter;
        }
        if (stall_counter < 2)
            inertia *= 2.0;
        else if (stall_counter > 5)
            inertia *= 0.5;
        inertia = std::clamp(inertia, settings.inertia_min, settings.inertia_max);

        if (it >= settings.max_stall) {
            const double old = result.history[it - settings.max_stall];
            const double gain = old == result.best_value ? 0.0 : old - result.best_value;
            if (gain <= settings.function_tolerance * std::max(1.0, std::abs(result.best_value))) {
                result.stalled = true;
                break;
            }
        }
    }
    return result;
}

} // namespace imbibe
