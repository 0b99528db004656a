#include "imbibe/reconstruct.hpp"

#include "imbibe/errors.hpp"
#include "imbibe/parallel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <limits>
#include <random>
#include <spdlog/spdlog.h>

namespace imbibe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_instant(double t, double horizon)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError(fmt::format("Legendre horizon must be positive, got {}", horizon));
    const double slack = 1e-12 * horizon;
    if (!(t >= -slack && t <= horizon + slack))
        throw DomainError(fmt::format("instant {} outside [0, {}]", t, horizon));
}

// Three-term recurrence in x = 1 - 2t/T; no argument checks.
void basis_unchecked(double t, double horizon, std::span<double> out)
{
    if (out.empty())
        return;
    const double x = 1.0 - 2.0 * t / horizon;
    out[0] = 1.0;
    if (out.size() > 1)
        out[1] = x;
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const double k = static_cast<double>(n);
        out[n + 1] = ((2.0 * k + 1.0) * x * out[n] - k * out[n - 1]) / (k + 1.0);
    }
}

double clamp_to(double t, double horizon) { return std::clamp(t, 0.0, horizon); }

void check_times(std::span<const double> times, double horizon)
{
    for (std::size_t i = 0; i < times.size(); ++i) {
        check_instant(times[i], horizon);
        if (i > 0 && !(times[i] > times[i - 1]))
            throw DomainError("sample times must be strictly increasing");
    }
}

std::vector<double> clamped_times(std::span<const double> times, double horizon)
{
    std::vector<double> out(times.begin(), times.end());
    for (double& t : out)
        t = clamp_to(t, horizon);
    return out;
}

struct Residuals {
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    double half_sq = kInf;
    bool ok = false;
};

// r = (f(tau_i) - Q_i ; sqrt(lambda T/(2n+1)) c_n) with Jacobian from the
// sensitivity system S' = A S + (0, P_n F2).
Residuals residuals_with_jacobian(const ReconstructionModel& model, const ImbibitionSeries& data,
                                  const OdeOptions& options)
{
    const auto m = static_cast<std::size_t>(model.degree) + 1;
    const std::size_t nd = data.size();
    Residuals out;
    out.r.resize(static_cast<Eigen::Index>(nd + m));
    out.jac.setZero(static_cast<Eigen::Index>(nd + m), static_cast<Eigen::Index>(m));

    std::vector<double> y(2 + 2 * m, 0.0);
    y[0] = model.f0;
    y[1] = model.f0_slope;
    std::vector<double> basis(m);
    const double horizon = model.horizon;
    const auto& c = model.coefficients;
    auto rhs = [&](double t, std::span<const double> s, std::span<double> d) {
        basis_unchecked(clamp_to(t, horizon), horizon, basis);
        double w = 0.0;
        for (std::size_t n = 0; n < m; ++n)
            w += c[n] * basis[n];
        d[0] = s[1];
        d[1] = w * s[1];
        for (std::size_t n = 0; n < m; ++n) {
            d[2 + n] = s[2 + m + n];
            d[2 + m + n] = w * s[2 + m + n] + basis[n] * s[1];
        }
    };
    const auto times = clamped_times(data.times(), horizon);
    OdeOptions opts = options;
    opts.controlled = 2;
    const auto& q = data.values();
    try {
        integrate_dopri5(rhs, y, 0.0, times,
                         [&](std::size_t i, std::span<const double> s) {
                             const auto row = static_cast<Eigen::Index>(i);
                             out.r[row] = s[0] - q[i];
                             for (std::size_t n = 0; n < m; ++n)
                                 out.jac(row, static_cast<Eigen::Index>(n)) = s[2 + n];
                         },
                         opts);
    } catch (const IntegrationError&) {
        return out;
    }
    for (std::size_t n = 0; n < m; ++n) {
        const double weight = std::sqrt(model.lambda * horizon / (2.0 * static_cast<double>(n) + 1.0));
        const auto row = static_cast<Eigen::Index>(nd + n);
        out.r[row] = weight * c[n];
        out.jac(row, static_cast<Eigen::Index>(n)) = weight;
    }
    out.half_sq = 0.5 * out.r.squaredNorm();
    out.ok = std::isfinite(out.half_sq) && out.jac.allFinite();
    if (!out.ok)
        out.half_sq = kInf;
    return out;
}

struct LocalResult {
    std::vector<double> c;
    double objective = kInf;
    std::size_t iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt with the damping update of Nielsen (1999).
LocalResult levenberg_marquardt(ReconstructionModel model, const ImbibitionSeries& data, const FitOptions& options)
{
    LocalResult out;
    const double tol = options.tolerance;
    auto current = residuals_with_jacobian(model, data, options.ode);
    out.c = model.coefficients;
    if (!current.ok)
        return out;

    Eigen::MatrixXd a = current.jac.transpose() * current.jac;
    Eigen::VectorXd g = current.jac.transpose() * current.r;
    double mu = 1e-3 * std::max(a.diagonal().maxCoeff(), 1e-300);
    double nu = 2.0;
    const auto m = a.rows();
    Eigen::Map<Eigen::VectorXd> c(model.coefficients.data(), m);

    for (; out.iterations < options.max_iterations; ++out.iterations) {
        if (g.lpNorm<Eigen::Infinity>() == 0.0) {
            out.converged = true;
            break;
        }
        Eigen::MatrixXd damped = a;
        damped.diagonal().array() += mu;
        const Eigen::VectorXd delta = damped.ldlt().solve(-g);
        if (!delta.allFinite()) {
            mu *= nu;
            nu *= 2.0;
            continue;
        }
        if (delta.norm() <= tol * (c.norm() + tol)) {
            out.converged = true;
            break;
        }
        const Eigen::VectorXd previous = c;
        c += delta;
        auto candidate = residuals_with_jacobian(model, data, options.ode);
        const double predicted = 0.5 * delta.dot(mu * delta - g);
        const double gain = candidate.ok && predicted > 0.0 ? (current.half_sq - candidate.half_sq) / predicted : -1.0;
        if (gain > 0.0) {
            const double decrease = current.half_sq - candidate.half_sq;
            const double before = current.half_sq;
            current = std::move(candidate);
            a.noalias() = current.jac.transpose() * current.jac;
            g.noalias() = current.jac.transpose() * current.r;
            mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
            nu = 2.0;
            if (decrease <= tol * before) {
                ++out.iterations;
                out.converged = true;
                break;
            }
        } else {
            c = previous;
            mu *= nu;
            nu *= 2.0;
            if (!std::isfinite(mu)) {
                // Damping overflow: no descent direction is resolvable at this precision.
                out.converged = true;
                break;
            }
        }
    }
    out.c = model.coefficients;
    out.objective = 2.0 * current.half_sq;
    return out;
}

double initial_slope(const ImbibitionSeries& scaled, bool& substituted)
{
    const auto& t = scaled.times();
    const auto& v = scaled.values();
    substituted = false;
    for (std::size_t i = 0; i + 1 < scaled.size(); ++i) {
        const double slope = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
        if (slope > 0.0) {
            if (i > 0) {
                substituted = true;
                spdlog::info("reconstruct: first two data values are not increasing; initial slope taken from "
                             "points {} and {} ({:.6g} in unit scale)",
                             i, i + 1, slope);
            }
            return slope;
        }
    }
    throw DataError("reconstruct: data have no increasing pair of consecutive values");
}

} // namespace

double legendre_shifted(int n, double t, double horizon)
{
    if (n < 0)
        throw DomainError(fmt::format("Legendre degree must be nonnegative, got {}", n));
    check_instant(t, horizon);
    std::vector<double> values(static_cast<std::size_t>(n) + 1);
    basis_unchecked(clamp_to(t, horizon), horizon, values);
    return values.back();
}

void legendre_shifted_all(double t, double horizon, std::span<double> out)
{
    check_instant(t, horizon);
    basis_unchecked(clamp_to(t, horizon), horizon, out);
}

ScaledSeries rescale_to_unit(const ImbibitionSeries& data)
{
    if (data.size() < 2)
        throw DataError("rescale needs at least two points");
    const auto& t = data.times();
    const auto [vmin, vmax] = std::minmax_element(data.values().begin(), data.values().end());
    const double duration = t.back() - t.front();
    if (!(duration > 0.0))
        throw DataError("rescale: degenerate time range");
    if (!(*vmax > *vmin))
        throw DataError(fmt::format("rescale: degenerate value range (all values {})", *vmin));
    UnitTransform tr{t.front(), duration, *vmin, *vmax - *vmin};
    std::vector<double> ts(data.size()), vs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        ts[i] = tr.to_unit_time(t[i]);
        vs[i] = tr.to_unit_value(data.values()[i]);
    }
    // Pin the endpoints against rounding so the unit interval is exact.
    ts.front() = 0.0;
    ts.back() = 1.0;
    return {ImbibitionSeries(std::move(ts), std::move(vs), data.density()), tr};
}

ImbibitionSeries unscale(const ImbibitionSeries& scaled, const UnitTransform& transform)
{
    std::vector<double> ts(scaled.size()), vs(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        ts[i] = transform.from_unit_time(scaled.times()[i]);
        vs[i] = transform.from_unit_value(scaled.values()[i]);
    }
    return {std::move(ts), std::move(vs), scaled.density()};
}

void ReconstructionModel::validate() const
{
    if (degree < 0)
        throw ConfigError(fmt::format("model degree must be nonnegative, got {}", degree));
    if (coefficients.size() != static_cast<std::size_t>(degree) + 1)
        throw ConfigError(fmt::format("model of degree {} needs {} coefficients, got {}", degree, degree + 1,
                                      coefficients.size()));
    if (!std::all_of(coefficients.begin(), coefficients.end(), [](double v) { return std::isfinite(v); }))
        throw ConfigError("model coefficients must be finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError(fmt::format("model horizon must be positive, got {}", horizon));
    if (!std::isfinite(f0))
        throw ConfigError("model initial value must be finite");
    if (!(f0_slope > 0.0) || !std::isfinite(f0_slope))
        throw ConfigError(fmt::format("model initial slope must be positive, got {}", f0_slope));
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ConfigError(fmt::format("regularization weight must be nonnegative, got {}", lambda));
    if (!(transform.time_scale > 0.0) || !(transform.value_scale > 0.0))
        throw ConfigError("model transform scales must be positive");
}

double eval_w(const ReconstructionModel& model, double t)
{
    check_instant(t, model.horizon);
    std::vector<double> basis(model.coefficients.size());
    basis_unchecked(clamp_to(t, model.horizon), model.horizon, basis);
    double w = 0.0;
    for (std::size_t n = 0; n < basis.size(); ++n)
        w += model.coefficients[n] * basis[n];
    return w;
}

double regularization_penalty(const ReconstructionModel& model)
{
    double s = 0.0;
    for (std::size_t n = 0; n < model.coefficients.size(); ++n)
        s += model.coefficients[n] * model.coefficients[n] / (2.0 * static_cast<double>(n) + 1.0);
    return model.lambda * model.horizon * s;
}

MonotoneSample integrate_monotone_model(const ReconstructionModel& model, std::span<const double> times,
                                        const OdeOptions& options)
{
    model.validate();
    check_times(times, model.horizon);
    MonotoneSample out;
    out.values.resize(times.size());
    out.slopes.resize(times.size());
    std::vector<double> basis(model.coefficients.size());
    const double horizon = model.horizon;
    auto rhs = [&](double t, std::span<const double> s, std::span<double> d) {
        basis_unchecked(clamp_to(t, horizon), horizon, basis);
        double w = 0.0;
        for (std::size_t n = 0; n < basis.size(); ++n)
            w += model.coefficients[n] * basis[n];
        d[0] = s[1];
        d[1] = w * s[1];
    };
    std::vector<double> y{model.f0, model.f0_slope};
    const auto clamped = clamped_times(times, horizon);
    integrate_dopri5(rhs, y, 0.0, clamped,
                     [&](std::size_t i, std::span<const double> s) {
                         out.values[i] = s[0];
                         out.slopes[i] = s[1];
                     },
                     options);
    return out;
}

double reconstruction_objective(const ReconstructionModel& model, const ImbibitionSeries& data,
                                const OdeOptions& options)
{
    if (data.size() < 2)
        throw DataError("reconstruction objective needs at least two data points");
    if (data.times().back() > model.horizon * (1.0 + 1e-12))
        throw DomainError(fmt::format("last datum at {} lies beyond the model horizon {}", data.times().back(),
                                      model.horizon));
    MonotoneSample f;
    try {
        f = integrate_monotone_model(model, data.times(), options);
    } catch (const IntegrationError& e) {
        spdlog::debug("reconstruction objective: {}", e.what());
        return kInf;
    }
    double misfit = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = data.values()[i] - f.values[i];
        misfit += r * r;
    }
    const double total = misfit + regularization_penalty(model);
    return std::isfinite(total) ? total : kInf;
}

FitResult fit_monotone(const ImbibitionSeries& data, int degree, double lambda, const FitOptions& options)
{
    if (degree < 0)
        throw ConfigError(fmt::format("degree must be nonnegative, got {}", degree));
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ConfigError(fmt::format("lambda must be nonnegative, got {}", lambda));
    if (options.starts == 0)
        throw ConfigError("at least one start is required");
    if (data.size() < 2)
        throw DataError("reconstruction needs at least two data points");

    const auto scaled = rescale_to_unit(data);
    ReconstructionModel base;
    base.degree = degree;
    base.horizon = 1.0;
    base.coefficients.assign(static_cast<std::size_t>(degree) + 1, 0.0);
    base.f0 = scaled.series.values().front();
    base.lambda = lambda;
    base.transform = scaled.transform;
    bool substituted = false;
    base.f0_slope = initial_slope(scaled.series, substituted);

    std::vector<std::vector<double>> starts(options.starts, base.coefficients);
    for (std::size_t k = 1; k < starts.size(); ++k) {
        std::seed_seq seq{options.seed, static_cast<std::uint64_t>(k)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t n = 0; n < starts[k].size(); ++n)
            starts[k][n] = normal(rng) * options.start_spread / static_cast<double>(n + 1);
    }

    std::vector<LocalResult> local(starts.size());
    parallel_for(
        starts.size(),
        [&](std::size_t k) {
            ReconstructionModel m = base;
            m.coefficients = starts[k];
            local[k] = levenberg_marquardt(std::move(m), scaled.series, options);
        },
        options.threads);

    std::size_t best = 0;
    for (std::size_t k = 1; k < local.size(); ++k)
        if (local[k].objective < local[best].objective)
            best = k;
    for (std::size_t k = 0; k < local.size(); ++k)
        spdlog::debug("reconstruct: start {} objective {:.6e} after {} iterations{}", k, local[k].objective,
                      local[k].iterations, local[k].converged ? "" : " (iteration limit)");

    FitResult out;
    out.model = base;
    out.slope_substituted = substituted;
    out.best_start = best;
    if (!std::isfinite(local[best].objective))
        throw NumericalError("reconstruct: integration failed from every start");
    out.model.coefficients = local[best].c;
    out.objective = local[best].objective;
    out.misfit = out.objective - regularization_penalty(out.model);
    out.iterations = local[best].iterations;
    out.converged = local[best].converged;
    if (!out.converged)
        spdlog::warn("reconstruct: best start stopped at the iteration limit ({}); objective {:.6e}",
                     options.max_iterations, out.objective);
    return out;
}

ImbibitionSeries evaluate_curve(const ReconstructionModel& model, std::span<const double> times, double density,
                                const OdeOptions& options)
{
    std::vector<double> unit(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        unit[i] = model.transform.to_unit_time(times[i]);
    const auto f = integrate_monotone_model(model, unit, options);
    std::vector<double> values(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        values[i] = model.transform.from_unit_value(f.values[i]);
    return {std::vector<double>(times.begin(), times.end()), std::move(values), density};
}

std::string model_to_json(const ReconstructionModel& model)
{
    nlohmann::json j;
    j["M"] = model.degree;
    j["T"] = model.horizon;
    j["lambda"] = model.lambda;
    j["c"] = model.coefficients;
    j["f0"] = model.f0;
    j["f0_slope"] = model.f0_slope;
    j["transform"] = {{"time_offset", model.transform.time_offset},
                      {"time_scale", model.transform.time_scale},
                      {"value_offset", model.transform.value_offset},
                      {"value_scale", model.transform.value_scale}};
    return j.dump(2);
}

ReconstructionModel model_from_json(std::string_view text)
{
    ReconstructionModel m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.degree = j.at("M").get<int>();
        m.horizon = j.at("T").get<double>();
        m.lambda = j.at("lambda").get<double>();
        m.coefficients = j.at("c").get<std::vector<double>>();
        m.f0 = j.at("f0").get<double>();
        m.f0_slope = j.at("f0_slope").get<double>();
        if (j.contains("transform")) {
            const auto& t = j.at("transform");
            m.transform.time_offset = t.at("time_offset").get<double>();
            m.transform.time_scale = t.at("time_scale").get<double>();
            m.transform.value_offset = t.at("value_offset").get<double>();
            m.transform.value_scale = t.at("value_scale").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("malformed reconstruction model: {}", e.what()));
    }
    m.validate();
    return m;
}

} // namespace imbibe
