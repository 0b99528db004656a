// Command-line front end: imbibe {simulate|reconstruct|calibrate|converge}.
#include "imbibe/cli/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <functional>
#include <map>

int main(int argc, char** argv)
{
    using namespace imbibe::cli;

    CLI::App app{"Moisture imbibition in porous materials: simulate, reconstruct, calibrate, converge"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

    CommandOptions options;
    std::uint64_t seed = 0;
    bool reconstructed = false;
    bool weights_from_coarse = true;

    const std::map<std::string, std::function<CommandResult(const CommandOptions&)>> commands{
        {"simulate", cmd_simulate},
        {"reconstruct", cmd_reconstruct},
        {"calibrate", cmd_calibrate},
        {"converge", cmd_converge},
    };
    const std::map<std::string, std::string> help{
        {"simulate", "Run the forward moisture model and write Q(t)"},
        {"reconstruct", "Fit a monotone Legendre reconstruction to an absorption dataset"},
        {"calibrate", "Estimate (n0, s_R, s_S, D, K_w) from a dataset with two-level PSO"},
        {"converge", "Grid-halving convergence study of the MOL and FTCS schemes"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, _] : commands) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", options.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", options.out, "Output directory")->capture_default_str();
        sub->add_option("--materials", options.materials, "Materials table (default: installed copy)")
            ->check(CLI::ExistingFile);
        if (name == "reconstruct" || name == "calibrate")
            sub->add_option("--seed", seed, "Master random seed (overrides the config)");
        if (name == "simulate")
            sub->add_flag("--force", options.force, "Run even when dt exceeds the stability bound");
        if (name == "calibrate") {
            sub->add_flag("--use-reconstructed", reconstructed, "Calibrate against the reconstructed curve");
            sub->add_flag("--weights-from-coarse,!--no-weights-from-coarse", weights_from_coarse,
                          "Derive lambda2 and lambdaDTW from the coarse stage-1 optima");
        }
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const auto level = spdlog::level::from_str(log_level);
    if (level == spdlog::level::off && log_level != "off") {
        fmt::print(stderr, "unknown log level '{}'\n", log_level);
        return kExitUsage;
    }
    spdlog::set_level(level);

    for (const auto& [name, sub] : subs) {
        if (!sub->parsed())
            continue;
        if (name == "reconstruct" || name == "calibrate") {
            if (sub->count("--seed") > 0)
                options.seed = seed;
        }
        if (name == "calibrate") {
            if (sub->count("--use-reconstructed") > 0)
                options.use_reconstructed = reconstructed;
            if (sub->count("--weights-from-coarse") > 0)
                options.weights_from_coarse = weights_from_coarse;
        }
        try {
            const CommandResult result = commands.at(name)(options);
            for (const auto& f : result.files)
                fmt::print("wrote {}\n", f.string());
            return kExitOk;
        } catch (const std::exception& e) {
            spdlog::error("{}", e.what());
            return exit_code_for(e);
        }
    }
    return kExitUsage;
}
