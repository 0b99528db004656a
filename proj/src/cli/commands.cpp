#include "imbibe/cli/commands.hpp"

#include "imbibe/calibrate.hpp"
#include "imbibe/cli/config.hpp"
#include "imbibe/convergence.hpp"
#include "imbibe/data.hpp"
#include "imbibe/errors.hpp"
#include "imbibe/reconstruct.hpp"
#include "imbibe/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <spdlog/spdlog.h>

namespace imbibe::cli {

namespace fs = std::filesystem;

namespace {

// Constants of the manufactured convergence test, used as simulate/converge defaults.
constexpr double kTestPorosity = 0.285;
constexpr double kTestAmbient = 6.254e-2;
constexpr double kTestHeight = 8.0;
constexpr double kTestHorizon = 60.0;
constexpr double kTestResidual = 0.219;
constexpr double kTestMaxSat = 1.0;
constexpr double kTestDiffusion = 9.807e-4;
constexpr const char* kTestSource = "default (convergence test constants)";

struct RunContext {
    ConfigReader config;
    fs::path out;
    std::vector<fs::path> files;
};

RunContext open_run(const CommandOptions& options)
{
    RunContext ctx;
    ctx.config = options.config.empty() ? ConfigReader(nlohmann::json::object(), fs::current_path())
                                        : ConfigReader::from_file(options.config);
    ctx.out = options.out;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec)
        throw ConfigError(fmt::format("cannot create output directory '{}': {}", ctx.out.string(), ec.message()));
    if (!options.config.empty()) {
        const fs::path echo = ctx.out / "config.json";
        if (!fs::equivalent(options.config, echo, ec)) {
            fs::copy_file(options.config, echo, fs::copy_options::overwrite_existing, ec);
            if (ec)
                throw ConfigError(fmt::format("cannot copy config to '{}': {}", echo.string(), ec.message()));
        }
        ctx.files.push_back(echo);
    }
    return ctx;
}

std::ofstream create(RunContext& ctx, const fs::path& name)
{
    const fs::path path = ctx.out / name;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw DataError(fmt::format("cannot write '{}'", path.string()));
    ctx.files.push_back(path);
    return out;
}

void write_json(RunContext& ctx, const fs::path& name, const nlohmann::json& j)
{
    create(ctx, name) << j.dump(2) << '\n';
}

void finish_run(RunContext& ctx)
{
    write_json(ctx, "config.resolved.json", ctx.config.resolved());
}

std::string num(double v)
{
    return fmt::format("{}", v);
}

Boundary parse_boundary(const std::string& s)
{
    if (s == "dirichlet")
        return Boundary::dirichlet;
    if (s == "robin")
        return Boundary::robin;
    throw ConfigError(fmt::format("unknown boundary '{}' (dirichlet | robin)", s));
}

Scheme parse_scheme(const std::string& s)
{
    if (s == "mol")
        return Scheme::mol;
    if (s == "ftcs")
        return Scheme::ftcs;
    throw ConfigError(fmt::format("unknown scheme '{}' (mol | ftcs)", s));
}

std::uint64_t resolve_seed(ConfigReader& config, const CommandOptions& options)
{
    if (options.seed)
        return config.override_with("seed", *options.seed);
    return config.get<std::uint64_t>("seed", 0);
}

MaterialParams read_params(ConfigReader& config, const std::string& prefix, const char* source)
{
    const double n0 = config.get(prefix + ".n0", kTestPorosity, source);
    const double sr = config.get(prefix + ".s_R", kTestResidual, source);
    const double ss = config.get(prefix + ".s_S", kTestMaxSat, source);
    const double d = config.get(prefix + ".D", kTestDiffusion, source);
    const double kw = config.get(prefix + ".K_w", 0.0, source);
    return MaterialParams(n0, AbsorptionLaw(sr, ss, d), kw);
}

std::optional<std::string> material_key(ConfigReader& config)
{
    return config.maybe<std::string>("material");
}

double material_value(const MaterialsTable& table, const std::optional<std::string>& key, const char* field)
{
    if (!key)
        return std::nan("");
    const auto& m = table.material(*key);
    return m.contains(field) ? m.at(field).get<double>() : std::nan("");
}

struct LoadedData {
    ImbibitionSeries series;
    Environment environment;
    std::string description;
};

LoadedData load_data(ConfigReader& config)
{
    const double density = config.get("specimen.density_g_cm3", 1.0);
    LoadedData d;
    if (auto manifest = config.maybe<std::string>("data.manifest")) {
        const Dataset ds = load_dataset(config.resolve_path(*manifest));
        if (ds.groups.empty())
            throw DataError("dataset has no groups");
        const std::string group = config.get("data.group", ds.groups.front().name, "first group of the manifest");
        d.series = ds.group(group).average;
        d.environment = ds.environment;
        d.description = fmt::format("{} ({}, group '{}'{})", ds.material, *manifest, group,
                                    ds.synthetic ? ", synthetic" : "");
        if (density != ds.density)
            d.series = ImbibitionSeries(d.series.times(), d.series.values(), density);
    } else if (auto csv = config.maybe<std::string>("data.csv")) {
        d.series = read_series_csv(config.resolve_path(*csv), density);
        d.description = *csv;
    } else if (auto specimen = config.maybe<std::string>("data.specimen")) {
        d.series = compute_q_data(read_specimen_log(config.resolve_path(*specimen)), density);
        d.description = *specimen;
    } else {
        throw UsageError("no data configured: set data.manifest, data.csv or data.specimen");
    }
    if (d.series.empty())
        throw UsageError(fmt::format("dataset '{}' is empty", d.description));
    spdlog::info("data: {} with {} points over [{}, {}] min", d.description, d.series.size(),
                 d.series.times().front(), d.series.times().back());
    return d;
}

double resolve_ambient(ConfigReader& config, Environment env, const std::string& key, double fallback,
                       const char* fallback_source)
{
    if (auto override_value = config.maybe<double>(key))
        return *override_value;
    if (config.contains("environment")) {
        env.temperature = config.get("environment.temperature_c", env.temperature);
        env.humidity = config.get("environment.relative_humidity", env.humidity);
        if (auto tb = config.maybe<double>("environment.theta_bar"))
            env.theta_bar_override = tb;
        env.use_formula = config.get("environment.use_formula", env.use_formula);
        const double v = theta_bar(env);
        config.override_with(key, v);
        return v;
    }
    if (env.theta_bar_override || env.use_formula) {
        const double v = theta_bar(env);
        return config.get(key, v, "dataset environment");
    }
    return config.get(key, fallback, fallback_source);
}

struct ReconstructSetup {
    int degree;
    double lambda;
    FitOptions fit;
};

ReconstructSetup read_reconstruct_setup(ConfigReader& config, const MaterialsTable& table,
                                        const std::optional<std::string>& material, std::uint64_t seed)
{
    ReconstructSetup s;
    const auto* entry = material && table.material(*material).contains("reconstruction")
                            ? &table.material(*material).at("reconstruction")
                            : nullptr;
    s.degree = entry ? config.get("reconstruct.M", entry->at("M").get<int>(), "materials table")
                     : config.get("reconstruct.M", 25);
    if (entry) {
        s.lambda = config.get("reconstruct.lambda", entry->at("lambda").get<double>(), "materials table");
    } else if (auto l = config.maybe<double>("reconstruct.lambda")) {
        s.lambda = *l;
    } else {
        throw ConfigError("reconstruct.lambda is required when the material has no tabulated value");
    }
    s.fit.starts = config.get<std::size_t>("reconstruct.starts", s.fit.starts);
    s.fit.start_spread = config.get("reconstruct.start_spread", s.fit.start_spread);
    s.fit.max_iterations = config.get<std::size_t>("reconstruct.max_iterations", s.fit.max_iterations);
    s.fit.tolerance = config.get("reconstruct.tolerance", s.fit.tolerance);
    s.fit.threads = config.get<std::size_t>("threads", 0);
    s.fit.seed = seed;
    return s;
}

bool strictly_increasing(const std::vector<double>& v)
{
    return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(b > a); }) == v.end();
}

nlohmann::json point_json(const ParamPoint& p)
{
    return {{"n0", p[kPorosity]}, {"s_R", p[kResidual]}, {"s_S", p[kMaxSat]}, {"D", p[kDiffusion]},
            {"K_w", p[kExchange]}};
}

nlohmann::json box_json(const Box& b)
{
    nlohmann::json j;
    for (std::size_t i = 0; i < b.dimension(); ++i)
        j[param_name(i)] = {b.lower[i], b.upper[i]};
    return j;
}

std::pair<double, double> read_interval(ConfigReader& config, const std::string& path, std::pair<double, double> fallback,
                                        const char* source)
{
    const auto v = config.get(path, std::vector<double>{fallback.first, fallback.second}, source);
    if (v.size() != 2)
        throw ConfigError(fmt::format("{} must be a [lower, upper] pair", path));
    return {v[0], v[1]};
}

} // namespace

int exit_code_for(const std::exception& e) noexcept
{
    if (dynamic_cast<const UsageError*>(&e))
        return kExitUsage;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e))
        return kExitConfig;
    if (dynamic_cast<const NumericalError*>(&e))
        return kExitNumerical;
    if (dynamic_cast<const DataError*>(&e))
        return kExitData;
    return kExitUsage;
}

CommandResult cmd_simulate(const CommandOptions& options)
{
    RunContext ctx = open_run(options);
    auto& config = ctx.config;
    const MaterialParams params = read_params(config, "simulate.params", kTestSource);
    const double height = config.get("simulate.height_cm", kTestHeight, kTestSource);
    const double horizon = config.get("simulate.horizon_min", kTestHorizon, kTestSource);
    const double ambient = resolve_ambient(config, Environment{}, "simulate.theta_bar", kTestAmbient, kTestSource);
    const Boundary bc = parse_boundary(config.get<std::string>("simulate.boundary", "dirichlet"));
    const Scheme scheme = parse_scheme(config.get<std::string>("simulate.scheme", "mol"));
    const double dz = config.get("simulate.dz", 0.125);
    const double bound = cfl_max_dt(params, dz);
    const double dt = config.get("simulate.dt", std::min(0.5 * dz, 0.5 * bound), "default (min(dz/2, half the stability bound))");
    const double density = config.get("specimen.density_g_cm3", 1.0);
    const auto snapshots = config.get("simulate.snapshot_times", std::vector<double>{});

    const SimGrid grid(height, horizon, dz, dt);
    fmt::print("stability bound dt <= {:.6g} min; chosen dt = {:.6g} min ({} steps, dz = {:.6g} cm)\n", bound,
               grid.dt(), grid.nt(), grid.dz());
    SimulationOptions so;
    so.scheme = scheme;
    so.density = density;
    so.keep_field = !snapshots.empty();
    if (grid.dt() > bound * (1.0 + 1e-12)) {
        if (!options.force)
            throw CflError(grid.dt(), bound);
        spdlog::warn("dt = {} exceeds the stability bound {}; running anyway (--force)", grid.dt(), bound);
        so.allow_unstable = true;
    }
    const SimulationResult r = simulate(params, grid, bc, ambient, so);

    {
        auto out = create(ctx, "q_curve.csv");
        out << "time_min,q_g_per_cm2\n";
        for (std::size_t k = 0; k < r.q.size(); ++k)
            out << num(r.q.times()[k]) << ',' << num(r.q.values()[k]) << '\n';
    }
    for (double t : snapshots) {
        const double kf = t / grid.dt();
        const auto k = static_cast<std::size_t>(std::llround(kf));
        if (t < 0.0 || k > grid.nt() || std::abs(kf - static_cast<double>(k)) > 1e-9 * std::max(1.0, kf))
            throw ConfigError(fmt::format("snapshot time {} is not a time level of the grid (dt = {})", t, grid.dt()));
        auto out = create(ctx, fs::path("snapshots") / fmt::format("theta_t{}.csv", num(t)));
        out << "z_cm,theta\n";
        const auto row = r.field->row(k);
        for (std::size_t j = 0; j < row.size(); ++j)
            out << num(static_cast<double>(j) * grid.dz()) << ',' << num(row[j]) << '\n';
    }
    CommandResult result;
    result.summary = {{"cfl_bound", bound}, {"dt", grid.dt()}, {"dz", grid.dz()}, {"steps", grid.nt()},
                      {"final_q", r.q.values().back()}};
    write_json(ctx, "summary.json", result.summary);
    finish_run(ctx);
    result.files = ctx.files;
    return result;
}

CommandResult cmd_reconstruct(const CommandOptions& options)
{
    RunContext ctx = open_run(options);
    auto& config = ctx.config;
    const auto table = MaterialsTable::load(options.materials);
    const auto material = material_key(config);
    const std::uint64_t seed = resolve_seed(config, options);
    const LoadedData data = load_data(config);
    if (data.series.size() < 2)
        throw DataError("reconstruction needs at least two data points");
    const ReconstructSetup setup = read_reconstruct_setup(config, table, material, seed);
    const auto points = config.get<std::size_t>("reconstruct.curve_points", 201);
    if (points < 2)
        throw ConfigError("reconstruct.curve_points must be at least 2");

    const FitResult fit = fit_monotone(data.series, setup.degree, setup.lambda, setup.fit);
    const auto& t = data.series.times();
    const ImbibitionSeries at_data = evaluate_curve(fit.model, t, data.series.density());
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = t.front() + (t.back() - t.front()) * static_cast<double>(i) / static_cast<double>(points - 1);
    grid.back() = t.back();
    const ImbibitionSeries curve = evaluate_curve(fit.model, grid, data.series.density());

    double sq = 0.0, worst = 0.0;
    {
        auto out = create(ctx, "fit.csv");
        out << "time_min,q_data,q_fit\n";
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double r = at_data.values()[i] - data.series.values()[i];
            sq += r * r;
            worst = std::max(worst, std::abs(r));
            out << num(t[i]) << ',' << num(data.series.values()[i]) << ',' << num(at_data.values()[i]) << '\n';
        }
    }
    {
        auto out = create(ctx, "curve.csv");
        out << "time_min,q_g_per_cm2\n";
        for (std::size_t i = 0; i < curve.size(); ++i)
            out << num(curve.times()[i]) << ',' << num(curve.values()[i]) << '\n';
    }
    create(ctx, "model.json") << model_to_json(fit.model) << '\n';

    CommandResult result;
    result.summary = {{"data", data.description},
                      {"M", setup.degree},
                      {"lambda", setup.lambda},
                      {"objective_unit", fit.objective},
                      {"misfit_unit", fit.misfit},
                      {"rms_misfit", std::sqrt(sq / static_cast<double>(t.size()))},
                      {"max_abs_residual", worst},
                      {"converged", fit.converged},
                      {"iterations", fit.iterations},
                      {"best_start", fit.best_start},
                      {"slope_substituted", fit.slope_substituted},
                      {"strictly_increasing", strictly_increasing(curve.values())}};
    write_json(ctx, "report.json", result.summary);
    finish_run(ctx);
    result.files = ctx.files;
    return result;
}

CommandResult cmd_calibrate(const CommandOptions& options)
{
    RunContext ctx = open_run(options);
    auto& config = ctx.config;
    const auto table = MaterialsTable::load(options.materials);
    const auto material = material_key(config);
    const std::uint64_t seed = resolve_seed(config, options);
    LoadedData data = load_data(config);

    const bool use_reconstructed = options.use_reconstructed
                                       ? config.override_with("calibrate.use_reconstructed", *options.use_reconstructed)
                                       : config.get("calibrate.use_reconstructed", false);
    if (use_reconstructed) {
        const ReconstructSetup setup = read_reconstruct_setup(config, table, material, seed);
        const FitResult fit = fit_monotone(data.series, setup.degree, setup.lambda, setup.fit);
        data.series = evaluate_curve(fit.model, data.series.times(), data.series.density());
        data.description += " (reconstructed)";
        spdlog::info("calibrating against the reconstructed curve (objective {:.3e})", fit.objective);
    }

    CalibrationProblem problem{data.series};
    const double table_height = material_value(table, material, "specimen_height_cm");
    problem.height = std::isnan(table_height) ? config.get("specimen.height_cm", 5.0)
                                              : config.get("specimen.height_cm", table_height, "materials table");
    problem.bc = parse_boundary(config.get<std::string>("calibrate.boundary", "robin"));
    problem.ambient = resolve_ambient(config, data.environment, "calibrate.theta_bar", kDefaultThetaBar,
                                      "default (T = 27 C, UR = 0.8)");

    // Search box: porosity from the material, the rest from the shared defaults.
    const auto& tbox = table.raw().at("parameter_box");
    std::pair<double, double> n0_range{std::nan(""), std::nan("")};
    if (material) {
        const auto& m = table.material(*material);
        if (m.contains("fixed_porosity")) {
            const double v = m.at("fixed_porosity").get<double>();
            n0_range = {v, v};
        } else {
            const auto r = m.at("porosity").get<std::vector<double>>();
            n0_range = {r.at(0), r.at(1)};
        }
    }
    Box box;
    const char* tsrc = "materials table";
    const auto n0 = std::isnan(n0_range.first) ? [&] {
        const auto v = config.maybe<std::vector<double>>("calibrate.box.n0");
        if (!v || v->size() != 2)
            throw ConfigError("calibrate.box.n0 is required when no material is given");
        return std::pair<double, double>{(*v)[0], (*v)[1]};
    }()
                                               : read_interval(config, "calibrate.box.n0", n0_range, tsrc);
    const auto sr = read_interval(config, "calibrate.box.s_R", {tbox.at("s_R")[0], tbox.at("s_R")[1]}, tsrc);
    const auto ss = read_interval(config, "calibrate.box.s_S", {tbox.at("s_S")[0], tbox.at("s_S")[1]}, tsrc);
    const auto dd = read_interval(config, "calibrate.box.D", {tbox.at("D")[0], tbox.at("D")[1]}, tsrc);
    const auto kw = read_interval(config, "calibrate.box.K_w", {tbox.at("K_w")[0], tbox.at("K_w")[1]}, tsrc);
    box.lower = {n0.first, sr.first, ss.first, dd.first, kw.first};
    box.upper = {n0.second, sr.second, ss.second, dd.second, kw.second};
    box.validate();

    CalibrationSettings settings;
    const auto& tpso = table.raw().at("pso");
    auto& pso = settings.pso;
    pso.swarm_size = config.get("calibrate.pso.swarm_size", tpso.at("swarm_size").get<std::size_t>(), tsrc);
    pso.max_iterations = config.get("calibrate.pso.max_iterations", tpso.at("max_iterations").get<std::size_t>(), tsrc);
    pso.max_stall = config.get("calibrate.pso.max_stall", tpso.at("max_stall").get<std::size_t>(), tsrc);
    pso.function_tolerance =
        config.get("calibrate.pso.function_tolerance", tpso.at("function_tolerance").get<double>(), tsrc);
    pso.self_weight = config.get("calibrate.pso.self_weight", tpso.at("self_weight").get<double>(), tsrc);
    pso.social_weight = config.get("calibrate.pso.social_weight", tpso.at("social_weight").get<double>(), tsrc);
    pso.inertia_min = config.get("calibrate.pso.inertia_min", tpso.at("inertia_range")[0].get<double>(), tsrc);
    pso.inertia_max = config.get("calibrate.pso.inertia_max", tpso.at("inertia_range")[1].get<double>(), tsrc);
    pso.seed = seed;
    pso.threads = config.get<std::size_t>("threads", 0);

    auto& mg = settings.multigrid;
    mg.nu = config.get("calibrate.multigrid.nu", mg.nu);
    mg.coarse.dz = config.get("calibrate.multigrid.coarse_dz", mg.coarse.dz);
    mg.coarse.dt = config.maybe<double>("calibrate.multigrid.coarse_dt");
    mg.fine.dz = config.get("calibrate.multigrid.fine_dz", mg.fine.dz);
    mg.fine.dt = config.maybe<double>("calibrate.multigrid.fine_dt");
    mg.cfl_safety = config.get("calibrate.multigrid.cfl_safety", mg.cfl_safety);
    mg.radii = config.get("calibrate.multigrid.radii", std::vector<double>{}, "default (1/(2n))");

    const auto& tfinal = table.raw().at("final_cost");
    settings.weights.final_magnitude =
        config.get("calibrate.weights.final_magnitude", tfinal.at("magnitude").get<double>(), tsrc);
    settings.weights.final_threshold =
        config.get("calibrate.weights.final_threshold", tfinal.at("threshold").get<double>(), tsrc);
    settings.weights_from_coarse =
        options.weights_from_coarse
            ? config.override_with("calibrate.weights_from_coarse", *options.weights_from_coarse)
            : config.get("calibrate.weights_from_coarse", true);
    if (!settings.weights_from_coarse) {
        const auto l2 = config.maybe<double>("calibrate.weights.lambda2");
        const auto ld = config.maybe<double>("calibrate.weights.lambdaDTW");
        if (!l2 || !ld)
            throw ConfigError("calibrate.weights.lambda2 and lambdaDTW are required without coarse weights");
        settings.weights.sre = *l2;
        settings.weights.dtw = *ld;
    }
    settings.weight_cap = config.get("calibrate.weight_cap", settings.weight_cap);

    const CalibrationResult r = calibrate(problem, box, settings);

    const LevelHistory& last = r.history.back();
    const CalibrationObjective final_objective(problem, SimGrid(problem.height, problem.data.times().back(), last.dz, last.dt),
                                               r.weights_used);
    const auto q_sim = final_objective.simulate_at_data(r.p_star);
    {
        auto out = create(ctx, "comparison.csv");
        out << "time_min,q_data,q_sim\n";
        for (std::size_t i = 0; i < q_sim.size(); ++i)
            out << num(problem.data.times()[i]) << ',' << num(problem.data.values()[i]) << ',' << num(q_sim[i]) << '\n';
    }
    {
        auto out = create(ctx, "history.csv");
        out << "level,iteration,best_value\n";
        for (const auto& h : r.history)
            for (std::size_t i = 0; i < h.best.size(); ++i)
                out << h.name << ',' << i << ',' << num(h.best[i]) << '\n';
    }

    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : r.history)
        history.push_back({{"name", h.name},
                           {"dz", h.dz},
                           {"dt", h.dt},
                           {"evaluations", h.evaluations},
                           {"best_value", h.best_value},
                           {"best_point", point_json(h.best_point)},
                           {"box", box_json(h.box)},
                           {"best", h.best}});
    nlohmann::json report;
    report["material"] = material.value_or("unspecified");
    report["data"] = {{"source", data.description}, {"points", problem.data.size()}, {"reconstructed", use_reconstructed}};
    report["p_star"] = point_json(r.p_star);
    report["weights"] = {{"lambda2", r.weights_used.sre},
                         {"lambdaDTW", r.weights_used.dtw},
                         {"lambda_phi", r.weights_used.final_magnitude},
                         {"eps_phi", r.weights_used.final_threshold}};
    report["eps"] = {{"sre", r.eps_sre}, {"dtw", r.eps_dtw}};
    report["losses"] = {{"sre", r.loss.sre}, {"dtw", r.loss.dtw}, {"final", r.loss.final}, {"total", r.loss.total}};
    report["coarse_objective"] = r.coarse_objective;
    report["settings"] = {{"height_cm", problem.height},
                          {"boundary", to_string(problem.bc)},
                          {"theta_bar", problem.ambient},
                          {"box", box_json(box)},
                          {"pso",
                           {{"swarm_size", pso.swarm_size},
                            {"max_iterations", pso.max_iterations},
                            {"max_stall", pso.max_stall},
                            {"function_tolerance", pso.function_tolerance},
                            {"self_weight", pso.self_weight},
                            {"social_weight", pso.social_weight},
                            {"inertia_range", {pso.inertia_min, pso.inertia_max}}}},
                          {"multigrid",
                           {{"nu", mg.nu},
                            {"coarse_dz", mg.coarse.dz},
                            {"fine_dz", mg.fine.dz},
                            {"cfl_safety", mg.cfl_safety},
                            {"radii", mg.radii}}},
                          {"weights_from_coarse", settings.weights_from_coarse},
                          {"weight_cap", settings.weight_cap}};
    report["seed"] = r.seed;
    report["history"] = std::move(history);
    report["wall_time"] = r.wall_time;
    write_json(ctx, "report.json", report);
    finish_run(ctx);

    CommandResult result;
    result.summary = report;
    result.files = ctx.files;
    return result;
}

CommandResult cmd_converge(const CommandOptions& options)
{
    RunContext ctx = open_run(options);
    auto& config = ctx.config;
    ConvergenceConfig cc{read_params(config, "converge.params", kTestSource),
                         config.get("converge.height_cm", kTestHeight, kTestSource),
                         config.get("converge.horizon_min", kTestHorizon, kTestSource),
                         resolve_ambient(config, Environment{}, "converge.theta_bar", kTestAmbient, kTestSource)};
    cc.bc = parse_boundary(config.get<std::string>("converge.boundary", "dirichlet"));
    cc.reference.dz = config.get("converge.reference.dz", cc.reference.dz);
    cc.reference.dt = config.get("converge.reference.dt", cc.reference.dt);
    const int first = config.get("converge.levels.first", 2);
    const int last = config.get("converge.levels.last", 8);
    if (first > last)
        throw ConfigError("converge.levels.first must not exceed converge.levels.last");
    cc.levels = halving_levels(first, last);
    cc.schemes.clear();
    for (const auto& s : config.get("converge.schemes", std::vector<std::string>{"mol", "ftcs"}))
        cc.schemes.push_back(parse_scheme(s));
    const auto repeats = config.get<std::size_t>("converge.work_precision_repeats", 3);

    const auto rows = convergence_study(cc);
    {
        auto out = create(ctx, "convergence.csv");
        out << "scheme,dz,dt,E,rho\n";
        for (const auto& r : rows)
            out << to_string(r.scheme) << ',' << num(r.dz) << ',' << num(r.dt) << ',' << num(r.error) << ','
                << (r.order ? num(*r.order) : "") << '\n';
    }
    if (repeats > 0) {
        auto out = create(ctx, "work_precision.csv");
        out << "scheme,dz,dt,E,wall_time_s\n";
        for (const auto& r : rows) {
            const SimGrid grid(cc.height, cc.horizon, r.dz, r.dt);
            SimulationOptions so;
            so.scheme = r.scheme;
            std::vector<double> times;
            for (std::size_t i = 0; i < repeats; ++i) {
                const auto start = std::chrono::steady_clock::now();
                (void)simulate(cc.params, grid, cc.bc, cc.ambient, so);
                times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            }
            std::sort(times.begin(), times.end());
            out << to_string(r.scheme) << ',' << num(r.dz) << ',' << num(r.dt) << ',' << num(r.error) << ','
                << num(times[times.size() / 2]) << '\n';
        }
    }
    CommandResult result;
    result.summary = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row = {{"scheme", to_string(r.scheme)}, {"dz", r.dz}, {"dt", r.dt}, {"E", r.error}};
        row["rho"] = r.order ? nlohmann::json(*r.order) : nlohmann::json(nullptr);
        result.summary.push_back(std::move(row));
    }
    finish_run(ctx);
    result.files = ctx.files;
    return result;
}

} // namespace imbibe::cli
