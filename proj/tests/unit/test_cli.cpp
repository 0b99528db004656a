#include "imbibe/cli/commands.hpp"
#include "imbibe/cli/config.hpp"
#include "imbibe/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace imbibe;
using namespace imbibe::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("imbibe_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const auto path = dir / "config.json";
    std::ofstream(path) << text;
    return path;
}

std::vector<std::string> lines(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

const std::string kFixture = (fs::path(IMBIBE_TEST_DATA_DIR) / "synthetic_gs" / "manifest.json").string();

} // namespace

TEST(ConfigReader, ValuesAndProvenance)
{
    ConfigReader c(nlohmann::json::parse(R"({"a": {"b": 3}, "s": "x"})"), "/tmp");
    EXPECT_EQ(c.get("a.b", 1), 3);
    EXPECT_EQ(c.get("a.c", 7.5, "materials table"), 7.5);
    EXPECT_FALSE(c.maybe<int>("z").has_value());
    EXPECT_EQ(c.override_with("seed", 9), 9);
    const auto& r = c.resolved();
    EXPECT_EQ(r["a"]["b"]["source"], "config");
    EXPECT_EQ(r["a"]["c"]["source"], "materials table");
    EXPECT_EQ(r["seed"]["source"], "command line");
    EXPECT_EQ(c.resolve_path("d.csv"), fs::path("/tmp/d.csv"));
    EXPECT_THROW(c.get<int>("s", 0), ConfigError);
}

TEST(ConfigReader, SchemaVersionChecked)
{
    EXPECT_THROW(ConfigReader(nlohmann::json::parse(R"({"schema_version": 2})"), ""), ConfigError);
    EXPECT_THROW(ConfigReader(nlohmann::json::array(), ""), ConfigError);
    const auto dir = scratch("comments");
    const auto path = write_config(dir, "{\n  // comment\n  \"schema_version\": 1\n}\n");
    EXPECT_NO_THROW(ConfigReader::from_file(path));
    std::ofstream(dir / "bad.json") << "{ nope";
    EXPECT_THROW(ConfigReader::from_file(dir / "bad.json"), ConfigError);
}

TEST(Materials, TableHasReconstructionSettings)
{
    const auto t = MaterialsTable::load();
    EXPECT_EQ(t.material("carrara_marble").at("reconstruction").at("lambda").get<double>(), 3.0e-6);
    EXPECT_EQ(t.material("GS").at("reconstruction").at("lambda").get<double>(), 2.245e-3);
    EXPECT_EQ(t.material("tivoli_travertine").at("reconstruction").at("M").get<int>(), 25);
    EXPECT_EQ(t.material("OT4").at("fixed_porosity").get<double>(), 0.335);
    EXPECT_EQ(t.raw().at("pso").at("swarm_size").get<int>(), 1000);
    EXPECT_THROW(t.material("granite"), ConfigError);
}

TEST(ExitCodes, Mapping)
{
    EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(CflError(2.0, 1.0)), kExitNumerical);
    EXPECT_EQ(exit_code_for(DivergenceError(3)), kExitNumerical);
    EXPECT_EQ(exit_code_for(DataError("x")), kExitData);
    EXPECT_EQ(exit_code_for(UsageError("x")), kExitUsage);
}

TEST(CmdSimulate, TestConstantsGiveOneRowPerLevel)
{
    const auto dir = scratch("sim");
    CommandOptions o;
    o.config = write_config(dir, R"({"simulate": {"dz": 0.25, "dt": 0.125, "snapshot_times": [60]}})");
    o.out = dir / "out";
    const auto r = cmd_simulate(o);
    const auto q = lines(dir / "out" / "q_curve.csv");
    EXPECT_EQ(q.front(), "time_min,q_g_per_cm2");
    EXPECT_EQ(q.size(), 1u + 481u);
    EXPECT_TRUE(fs::exists(dir / "out" / "snapshots" / "theta_t60.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "config.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "config.resolved.json"));
    EXPECT_EQ(r.summary["steps"], 480);
}

TEST(CmdSimulate, ZeroDiffusionGivesConstantQ)
{
    const auto dir = scratch("sim0");
    CommandOptions o;
    o.config = write_config(dir, R"({"simulate": {"params": {"D": 0.0}, "dz": 0.5, "dt": 1.0}})");
    o.out = dir / "out";
    cmd_simulate(o);
    const auto q = lines(dir / "out" / "q_curve.csv");
    const auto value = q[1].substr(q[1].find(','));
    for (std::size_t i = 2; i < q.size(); ++i)
        EXPECT_EQ(q[i].substr(q[i].find(',')), value);
}

TEST(CmdSimulate, UnstableStepNeedsForce)
{
    const auto dir = scratch("simcfl");
    CommandOptions o;
    o.config = write_config(dir, R"({"simulate": {"dz": 0.125, "dt": 8.0, "horizon_min": 2000}})");
    o.out = dir / "out";
    try {
        cmd_simulate(o);
        FAIL() << "expected a CFL error";
    } catch (const std::exception& e) {
        EXPECT_EQ(exit_code_for(e), kExitNumerical);
        EXPECT_NE(dynamic_cast<const CflError*>(&e), nullptr);
    }
    o.force = true;
    EXPECT_THROW(cmd_simulate(o), DivergenceError);
}

TEST(CmdReconstruct, MaterialLookupAndIncreasingCurve)
{
    const auto dir = scratch("rec");
    CommandOptions o;
    o.config = write_config(dir, R"({"material": "GS", "data": {"manifest": ")" + kFixture + R"("}})");
    o.out = dir / "out";
    const auto r = cmd_reconstruct(o);
    EXPECT_EQ(r.summary["M"], 25);
    EXPECT_EQ(r.summary["lambda"], 2.245e-3);
    EXPECT_TRUE(r.summary["strictly_increasing"].get<bool>());
    EXPECT_TRUE(fs::exists(dir / "out" / "model.json"));
    EXPECT_EQ(lines(dir / "out" / "curve.csv").size(), 202u);
    EXPECT_EQ(lines(dir / "out" / "fit.csv").front(), "time_min,q_data,q_fit");
}

TEST(CmdReconstruct, EmptyDatasetIsUsageError)
{
    const auto dir = scratch("recempty");
    std::ofstream(dir / "empty.csv") << "time_min,q_g_per_cm2\n";
    CommandOptions o;
    o.config = write_config(dir, R"({"data": {"csv": "empty.csv"}, "reconstruct": {"lambda": 1e-3}})");
    o.out = dir / "out";
    try {
        cmd_reconstruct(o);
        FAIL() << "expected a usage error";
    } catch (const std::exception& e) {
        EXPECT_EQ(exit_code_for(e), kExitUsage);
    }
}

TEST(CmdReconstruct, MissingLambdaWithoutMaterialIsConfigError)
{
    const auto dir = scratch("recnolambda");
    CommandOptions o;
    o.config = write_config(dir, R"({"data": {"manifest": ")" + kFixture + R"("}})");
    o.out = dir / "out";
    EXPECT_THROW(cmd_reconstruct(o), ConfigError);
}

TEST(CmdCalibrate, ExplicitWeightsSkipStageOne)
{
    const auto dir = scratch("calw");
    CommandOptions o;
    o.config = write_config(dir, R"({"material": "GS", "data": {"manifest": ")" + kFixture + R"("},
        "calibrate": {"box": {"n0": [0.2, 0.4]}, "weights_from_coarse": false,
                      "weights": {"lambda2": 100.0, "lambdaDTW": 10.0},
                      "pso": {"swarm_size": 8, "max_iterations": 3},
                      "multigrid": {"nu": 1, "coarse_dz": 0.25, "fine_dz": 0.125}}})");
    o.out = dir / "out";
    o.seed = 5;
    const auto r = cmd_calibrate(o);
    ASSERT_EQ(r.summary["history"].size(), 2u);
    EXPECT_EQ(r.summary["history"][0]["name"], "coarse_full");
    EXPECT_EQ(r.summary["weights"]["lambda2"], 100.0);
    EXPECT_EQ(r.summary["seed"], 5);
    EXPECT_EQ(lines(dir / "out" / "comparison.csv").size(), 14u);
    EXPECT_EQ(r.summary["settings"]["height_cm"], 2.0);
}

TEST(CmdCalibrate, FixedPorosityFromMaterial)
{
    const auto dir = scratch("calot");
    CommandOptions o;
    o.config = write_config(dir, R"({"material": "OT4", "data": {"manifest": ")" + kFixture + R"("},
        "calibrate": {"pso": {"swarm_size": 6, "max_iterations": 2}, "multigrid": {"nu": 0, "coarse_dz": 0.25}}})");
    o.out = dir / "out";
    const auto r = cmd_calibrate(o);
    EXPECT_EQ(r.summary["p_star"]["n0"], 0.335);
    EXPECT_EQ(r.summary["settings"]["height_cm"], 4.0);
}

TEST(CmdConverge, SingleLevelLeavesOrderBlank)
{
    const auto dir = scratch("conv");
    CommandOptions o;
    o.config = write_config(dir, R"({"converge": {"levels": {"first": 2, "last": 2}, "schemes": ["mol"],
        "reference": {"dz": 0.0625, "dt": 0.03125}, "work_precision_repeats": 1}})");
    o.out = dir / "out";
    cmd_converge(o);
    const auto rows = lines(dir / "out" / "convergence.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "scheme,dz,dt,E,rho");
    EXPECT_EQ(rows[1].back(), ',');
    EXPECT_EQ(lines(dir / "out" / "work_precision.csv").size(), 2u);
}
