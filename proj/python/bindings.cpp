// Python bindings: the forward model, metrics, reconstruction basis and the CLI commands.
#include "imbibe/absorption.hpp"
#include "imbibe/cli/commands.hpp"
#include "imbibe/errors.hpp"
#include "imbibe/metrics.hpp"
#include "imbibe/reconstruct.hpp"
#include "imbibe/solver.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace imbibe;

namespace {

cli::CommandOptions make_options(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
                                 bool force, std::optional<bool> use_reconstructed,
                                 std::optional<bool> weights_from_coarse, const std::string& materials)
{
    cli::CommandOptions o;
    o.config = config;
    o.out = out;
    o.seed = seed;
    o.force = force;
    o.use_reconstructed = use_reconstructed;
    o.weights_from_coarse = weights_from_coarse;
    o.materials = materials;
    return o;
}

py::dict run(cli::CommandResult (*command)(const cli::CommandOptions&), const cli::CommandOptions& options)
{
    const cli::CommandResult r = command(options);
    py::list files;
    for (const auto& f : r.files)
        files.append(f.string());
    py::dict d;
    d["files"] = files;
    d["summary"] = py::module_::import("json").attr("loads")(r.summary.dump());
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Moisture imbibition model core";

    auto base = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<CflError>(m, "CflError", base.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
    py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    py::class_<AbsorptionLaw>(m, "AbsorptionLaw")
        .def(py::init<double, double, double>(), py::arg("s_R"), py::arg("s_S"), py::arg("D"))
        .def("rate", &AbsorptionLaw::rate)
        .def("value", &AbsorptionLaw::value)
        .def_property_readonly("plateau", &AbsorptionLaw::plateau);

    py::enum_<Boundary>(m, "Boundary").value("dirichlet", Boundary::dirichlet).value("robin", Boundary::robin);
    py::enum_<Scheme>(m, "Scheme").value("mol", Scheme::mol).value("ftcs", Scheme::ftcs);

    m.def("cfl_max_dt",
          [](double n0, double s_R, double s_S, double D, double dz) {
              return cfl_max_dt(MaterialParams(n0, AbsorptionLaw(s_R, s_S, D)), dz);
          },
          py::arg("n0"), py::arg("s_R"), py::arg("s_S"), py::arg("D"), py::arg("dz"));

    m.def("simulate",
          [](double n0, double s_R, double s_S, double D, double K_w, double height, double horizon, double dz,
             double dt, Boundary bc, double theta_bar, Scheme scheme) {
              SimulationOptions so;
              so.scheme = scheme;
              const auto r = simulate(MaterialParams(n0, AbsorptionLaw(s_R, s_S, D), K_w),
                                      SimGrid(height, horizon, dz, dt), bc, theta_bar, so);
              return py::make_tuple(r.q.times(), r.q.values(), r.final_row);
          },
          py::arg("n0"), py::arg("s_R"), py::arg("s_S"), py::arg("D"), py::kw_only(), py::arg("K_w") = 0.0, py::arg("height"),
          py::arg("horizon"), py::arg("dz"), py::arg("dt"), py::arg("boundary") = Boundary::dirichlet,
          py::arg("theta_bar"), py::arg("scheme") = Scheme::mol,
          "Returns (times, Q, final moisture profile).");

    m.def("sre", [](const std::vector<double>& d, const std::vector<double>& s) { return sre(d, s); });
    m.def("dtw", [](const std::vector<double>& a, const std::vector<double>& b) { return dtw(a, b); });
    m.def("legendre_shifted", &legendre_shifted, py::arg("n"), py::arg("t"), py::arg("horizon"));

    m.def("fit_monotone",
          [](const std::vector<double>& times, const std::vector<double>& values, int degree, double lambda,
             std::uint64_t seed) {
              FitOptions fo;
              fo.seed = seed;
              const auto r = fit_monotone(ImbibitionSeries(times, values), degree, lambda, fo);
              const auto curve = evaluate_curve(r.model, times, 1.0);
              py::dict d;
              d["model"] = py::module_::import("json").attr("loads")(model_to_json(r.model));
              d["objective"] = r.objective;
              d["converged"] = r.converged;
              d["fitted"] = curve.values();
              return d;
          },
          py::arg("times"), py::arg("values"), py::arg("degree"), py::arg("lambda_"), py::arg("seed") = 0);

    const auto bind_command = [&m](const char* name, cli::CommandResult (*command)(const cli::CommandOptions&)) {
        m.def(
            name,
            [command](const std::string& config, const std::string& out, std::optional<std::uint64_t> seed, bool force,
                      std::optional<bool> use_reconstructed, std::optional<bool> weights_from_coarse,
                      const std::string& materials) {
                return run(command,
                           make_options(config, out, seed, force, use_reconstructed, weights_from_coarse, materials));
            },
            py::arg("config") = "", py::arg("out") = "out", py::arg("seed") = py::none(), py::arg("force") = false,
            py::arg("use_reconstructed") = py::none(), py::arg("weights_from_coarse") = py::none(),
            py::arg("materials") = "");
    };
    bind_command("cmd_simulate", &cli::cmd_simulate);
    bind_command("cmd_reconstruct", &cli::cmd_reconstruct);
    bind_command("cmd_calibrate", &cli::cmd_calibrate);
    bind_command("cmd_converge", &cli::cmd_converge);
}
