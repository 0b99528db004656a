#include "imbibe/calibrate.hpp"
#include "imbibe/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace imbibe;

namespace {

constexpr ParamPoint kTruth{0.30, 0.25, 0.90, 5e-3, 0.0};

// Q sampled from a simulation on `grid` at the given instants.
ImbibitionSeries sample(const ParamPoint& p, const SimGrid& grid, Boundary bc, const std::vector<double>& times)
{
    const auto r = simulate(to_material(p), grid, bc, 2.33e-5);
    std::vector<double> q;
    for (double t : times)
        q.push_back(r.q.values()[static_cast<std::size_t>(std::llround(t / grid.dt()))]);
    return ImbibitionSeries(times, q);
}

CalibrationSettings quick_settings(std::uint64_t seed)
{
    CalibrationSettings s;
    s.pso.swarm_size = 12;
    s.pso.max_iterations = 6;
    s.pso.seed = seed;
    s.multigrid.nu = 1;
    s.multigrid.coarse.dz = 0.25;
    s.multigrid.fine.dz = 0.125;
    return s;
}

const std::vector<double> kTimes{5, 10, 20, 40, 60, 90, 120};

} // namespace

TEST(RefineBox, Examples)
{
    const Box coarse{{0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}};
    const std::vector<double> p{0.5, 0.5, 0.5, 0.5, 0.5};
    const auto b1 = refine_box(p, 1, default_radius(1), coarse);
    const auto b2 = refine_box(p, 2, default_radius(2), coarse);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(b1.lower[i], 0.25);
        EXPECT_EQ(b1.upper[i], 0.75);
        EXPECT_EQ(b2.lower[i], 0.375);
        EXPECT_EQ(b2.upper[i], 0.625);
    }
}

TEST(RefineBox, ZeroComponentWidens)
{
    const Box coarse{{0.1, 0.1, 0.5, 0.0, 0.0}, {0.4, 0.75, 0.98, 0.1, 100.0}};
    const std::vector<double> p{0.3, 0.25, 0.9, 5e-3, 0.0};
    const auto b = refine_box(p, 1, 0.5, coarse);
    EXPECT_EQ(b.lower[kExchange], 0.0);
    EXPECT_EQ(b.upper[kExchange], 50.0);
}

TEST(RefineBox, IntersectsWithCoarseBox)
{
    const Box coarse{{0.1, 0.1, 0.5, 0.0, 0.0}, {0.4, 0.75, 0.98, 0.1, 100.0}};
    const std::vector<double> p{0.38, 0.7, 0.95, 0.09, 90.0};
    const auto b = refine_box(p, 1, 0.5, coarse);
    EXPECT_EQ(b.upper[kPorosity], 0.4);
    EXPECT_EQ(b.upper[kResidual], 0.75);
    EXPECT_EQ(b.upper[kMaxSat], 0.98);
    EXPECT_EQ(b.upper[kDiffusion], 0.1);
    EXPECT_EQ(b.upper[kExchange], 100.0);
    EXPECT_DOUBLE_EQ(b.lower[kPorosity], 0.19);
    EXPECT_THROW(refine_box(p, 0, 0.5, coarse), ConfigError);
    EXPECT_THROW(refine_box(p, 1, 1.5, coarse), ConfigError);
}

TEST(Weights, ReciprocalRule)
{
    EXPECT_EQ(reciprocal_weight(0.5, 1e6), 2.0);
    EXPECT_EQ(reciprocal_weight(0.25, 1e6), 4.0);
    bool capped = false;
    EXPECT_EQ(reciprocal_weight(0.0, 1e6, &capped), 1e6);
    EXPECT_TRUE(capped);
    EXPECT_EQ(reciprocal_weight(1e-9, 1e6, &capped), 1e6);
    EXPECT_TRUE(capped);
    EXPECT_EQ(reciprocal_weight(1e-3, 1e6, &capped), 1e3);
    EXPECT_FALSE(capped);
}

TEST(DeriveSeed, DistinctAndStable)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 8; ++s)
        seen.insert(derive_seed(42, s));
    EXPECT_EQ(seen.size(), 8u);
    EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
    EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

TEST(DefaultBox, Bounds)
{
    const Box b = default_parameter_box(0.13, 0.45);
    EXPECT_EQ(b.lower, (std::vector<double>{0.13, 0.1, 0.5, 0.0, 0.0}));
    EXPECT_EQ(b.upper, (std::vector<double>{0.45, 0.75, 0.98, 0.1, 100.0}));
}

TEST(RepairSaturations, OrdersAndSeparates)
{
    const Box b = default_parameter_box(0.1, 0.5);
    std::vector<double> p{0.3, 0.7, 0.6, 1e-3, 0.0};
    repair_saturations(p, b);
    EXPECT_LT(p[kResidual], p[kMaxSat]);
    EXPECT_TRUE(b.contains(p));
    std::vector<double> q{0.3, 0.6, 0.6, 1e-3, 0.0};
    repair_saturations(q, b);
    EXPECT_GE(q[kMaxSat] - q[kResidual], 1e-6);
}

TEST(AlignedStep, DividesEveryTime)
{
    const std::vector<double> t{5, 10, 15, 30, 45};
    const double dt = aligned_time_step(t, 0.7);
    EXPECT_LE(dt, 0.7);
    for (double x : t) {
        const double k = x / dt;
        EXPECT_NEAR(k, std::round(k), 1e-9);
    }
    EXPECT_EQ(aligned_time_step(std::vector<double>{1.0, 2.0}, 5.0), 1.0);
}

TEST(DataSteps, MisalignedDataIsError)
{
    const ImbibitionSeries d({0.3, 1.0}, {0.1, 0.2});
    EXPECT_THROW(data_steps(d, SimGrid(1.0, 1.0, 0.25, 0.25)), AlignmentError);
    const auto k = data_steps(ImbibitionSeries({0.5, 1.0}, {0.1, 0.2}), SimGrid(1.0, 1.0, 0.25, 0.25));
    EXPECT_EQ(k, (std::vector<std::size_t>{2, 4}));
}

TEST(Objective, ZeroAtTruthOnItsOwnGrid)
{
    const SimGrid grid(2.0, 120.0, 0.125, 0.25);
    CalibrationProblem problem{sample(kTruth, grid, Boundary::robin, kTimes), 2.0};
    const CalibrationObjective obj(problem, grid, LossWeights{});
    EXPECT_EQ(obj(kTruth), 0.0);
    const auto b = obj.breakdown(kTruth);
    EXPECT_EQ(b.sre, 0.0);
    EXPECT_EQ(b.dtw, 0.0);
    EXPECT_EQ(obj.simulate_at_data(kTruth), problem.data.values());
}

TEST(Objective, InadmissiblePointIsInfinite)
{
    const SimGrid grid(2.0, 120.0, 0.125, 0.25);
    CalibrationProblem problem{sample(kTruth, grid, Boundary::robin, kTimes), 2.0};
    const CalibrationObjective obj(problem, grid, LossWeights{});
    EXPECT_TRUE(std::isinf(obj(ParamPoint{0.3, 0.9, 0.5, 5e-3, 0.0})));
    EXPECT_TRUE(std::isinf(obj(ParamPoint{0.3, 0.25, 0.9, 10.0, 0.0})));
}

TEST(CoarsePhase, WeightsAreReciprocalStageOneOptima)
{
    const SimGrid grid(2.0, 120.0, 1.0 / 32, 1.0 / 32);
    CalibrationProblem problem{sample(kTruth, grid, Boundary::robin, kTimes), 2.0};
    const Box box = default_parameter_box(0.2, 0.4);
    const auto r = coarse_phase(problem, box, quick_settings(5));
    ASSERT_EQ(r.history.size(), 3u);
    EXPECT_EQ(r.history[0].name, "coarse_sre");
    EXPECT_EQ(r.history[1].name, "coarse_dtw");
    EXPECT_EQ(r.eps_sre, r.history[0].best_value);
    EXPECT_EQ(r.eps_dtw, r.history[1].best_value);
    EXPECT_EQ(r.weights.sre, 1.0 / r.eps_sre);
    EXPECT_EQ(r.weights.dtw, 1.0 / r.eps_dtw);
    EXPECT_EQ(r.objective, r.history[2].best_value);
}

TEST(CoarsePhase, ExactFitCapsWeights)
{
    // A box pinned to the truth on the data grid: stage-1 optima are exactly 0.
    const Box box{{kTruth.begin(), kTruth.end()}, {kTruth.begin(), kTruth.end()}};
    auto settings = quick_settings(9);
    settings.multigrid.coarse.dz = 0.125;
    settings.multigrid.coarse.dt = 0.25;
    const SimGrid grid(2.0, 120.0, 0.125, 0.25);
    CalibrationProblem problem{sample(kTruth, grid, Boundary::robin, kTimes), 2.0};
    const auto r = coarse_phase(problem, box, settings);
    EXPECT_EQ(r.eps_sre, 0.0);
    EXPECT_EQ(r.eps_dtw, 0.0);
    EXPECT_TRUE(r.capped_sre);
    EXPECT_TRUE(r.capped_dtw);
    EXPECT_EQ(r.weights.sre, settings.weight_cap);
    EXPECT_EQ(r.weights.dtw, settings.weight_cap);
}

TEST(CoarsePhase, ExplicitWeightsSkipStageOne)
{
    const SimGrid grid(2.0, 120.0, 0.125, 0.25);
    CalibrationProblem problem{sample(kTruth, grid, Boundary::robin, kTimes), 2.0};
    auto settings = quick_settings(3);
    settings.weights_from_coarse = false;
    settings.weights.sre = 7.0;
    settings.weights.dtw = 0.5;
    const auto r = coarse_phase(problem, default_parameter_box(0.2, 0.4), settings);
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.history[0].name, "coarse_full");
    EXPECT_EQ(r.weights.sre, 7.0);
    EXPECT_EQ(r.weights.dtw, 0.5);
}

TEST(Calibrate, FinalCostOnlyObjectiveReachesZero)
{
    const SimGrid grid(2.0, 120.0, 0.125, 0.25);
    CalibrationProblem problem{sample(kTruth, grid, Boundary::robin, kTimes), 2.0};
    auto settings = quick_settings(4);
    settings.pso.swarm_size = 30;
    settings.pso.max_iterations = 20;
    settings.weights_from_coarse = false;
    settings.weights.sre = 0.0;
    settings.weights.dtw = 0.0;
    const auto r = calibrate(problem, default_parameter_box(0.2, 0.4), settings);
    EXPECT_EQ(r.loss.total, 0.0);
    const CalibrationObjective fine(problem, SimGrid(2.0, 120.0, r.history.back().dz, r.history.back().dt),
                                    r.weights_used);
    const double end = fine.simulate_at_data(r.p_star).back();
    EXPECT_LE(std::pow(end - problem.data.values().back(), 2), 1e-4);
}

TEST(Calibrate, DeterministicAndStructured)
{
    const SimGrid grid(2.0, 120.0, 0.125, 0.25);
    CalibrationProblem problem{sample(kTruth, grid, Boundary::robin, kTimes), 2.0};
    const Box box = default_parameter_box(0.2, 0.4);
    const auto a = calibrate(problem, box, quick_settings(21));
    const auto b = calibrate(problem, box, quick_settings(21));
    EXPECT_EQ(a.p_star, b.p_star);
    EXPECT_EQ(a.loss.total, b.loss.total);
    ASSERT_EQ(a.history.size(), 4u);
    EXPECT_EQ(a.history[3].name, "fine_1");
    for (std::size_t i = 0; i < kParamCount; ++i) {
        EXPECT_GE(a.p_star[i], box.lower[i]);
        EXPECT_LE(a.p_star[i], box.upper[i]);
        EXPECT_GE(a.p_star[i], a.history[3].box.lower[i]);
        EXPECT_LE(a.p_star[i], a.history[3].box.upper[i]);
    }
    // The fine level is seeded with p0, so its best is no worse than p0 there.
    const CalibrationObjective fine(problem, SimGrid(2.0, 120.0, a.history[3].dz, a.history[3].dt), a.weights_used);
    EXPECT_LE(a.loss.total, fine(a.history[2].best_point));
}
