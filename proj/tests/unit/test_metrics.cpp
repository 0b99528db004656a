#include "imbibe/errors.hpp"
#include "imbibe/metrics.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace imbibe;

TEST(Sre, Examples)
{
    const std::vector<double> d{1.0, 2.0, 3.0};
    EXPECT_EQ(sre(d, d), 0.0);
    EXPECT_DOUBLE_EQ(sre(std::vector<double>{1, 2}, std::vector<double>{1, 1}), 0.25);
    EXPECT_DOUBLE_EQ(sre(std::vector<double>{2, 2, 2}, std::vector<double>{2, 2, 3}), 0.125);
}

TEST(Sre, ZeroDataEntriesAreSkipped)
{
    // Retained entries: (2 vs 3) only; divisor min(N=2, retained=1) = 1.
    EXPECT_DOUBLE_EQ(sre(std::vector<double>{0, 0, 2}, std::vector<double>{5, 1, 3}), 0.25);
    EXPECT_THROW(sre(std::vector<double>{0, 0}, std::vector<double>{1, 1}), DataError);
}

TEST(Sre, LengthMismatchIsError)
{
    EXPECT_ANY_THROW(sre(std::vector<double>{1, 2}, std::vector<double>{1}));
}

TEST(Dtw, Examples)
{
    const std::vector<double> a{0.1, 0.5, 0.2};
    EXPECT_EQ(dtw(a, a), 0.0);
    EXPECT_EQ(dtw(std::vector<double>{0, 1}, std::vector<double>{0, 1, 1}), 0.0);
    EXPECT_EQ(dtw(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3}), 1.0);
}

TEST(Dtw, MatchesBruteForceOnRandomPairs)
{
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len(1, 6), val(0, 4);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a(len(rng)), b(len(rng));
        for (auto& x : a)
            x = val(rng);
        for (auto& x : b)
            x = val(rng);
        ASSERT_EQ(dtw(a, b), oracle::dtw_brute_force(a, b)) << trial;
    }
}

TEST(Dtw, Symmetric)
{
    const std::vector<double> a{0.3, 1.2, 0.7, 2.0}, b{1.0, 0.1, 2.5};
    EXPECT_DOUBLE_EQ(dtw(a, b), dtw(b, a));
}

TEST(FinalCost, ThresholdStep)
{
    EXPECT_EQ(final_cost(0.0, std::sqrt(2e-4)), 10.0);
    EXPECT_EQ(final_cost(0.0, std::sqrt(5e-5)), 0.0);
    // |x|^2 must equal the threshold exactly: 0.01^2 rounds to 1e-4 in double.
    ASSERT_EQ(0.01 * 0.01, 1e-4);
    EXPECT_EQ(final_cost(0.0, 0.01), 0.0);
    LossWeights w;
    w.final_magnitude = 3.0;
    w.final_threshold = 1.0;
    EXPECT_EQ(final_cost(0.0, 2.0, w), 3.0);
    EXPECT_EQ(final_cost(0.0, 1.0, w), 0.0);
}

TEST(CalibrationLoss, IdenticalSeriesIsZero)
{
    const ImbibitionSeries d({1, 2, 3}, {0.1, 0.2, 0.25});
    const auto b = calibration_loss(d, d, LossWeights{});
    EXPECT_EQ(b.total, 0.0);
    EXPECT_EQ(b.sre, 0.0);
    EXPECT_EQ(b.dtw, 0.0);
    EXPECT_EQ(b.final, 0.0);
}

TEST(CalibrationLoss, DegenerateWeightsGiveDtwPlusFinal)
{
    const ImbibitionSeries d({1, 2, 3}, {0.1, 0.2, 0.25});
    const ImbibitionSeries s({1, 2, 3}, {0.12, 0.18, 0.4});
    LossWeights w;
    w.sre = 0.0;
    w.dtw = 1.0;
    const auto b = calibration_loss(d, s, w);
    EXPECT_DOUBLE_EQ(b.total, dtw(d.values(), s.values()) + final_cost(0.25, 0.4, w));
    EXPECT_EQ(b.final, 10.0);
}

TEST(CalibrationLoss, WeightedSum)
{
    const ImbibitionSeries d({1, 2, 3}, {0.1, 0.2, 0.25});
    const ImbibitionSeries s({1, 2, 3}, {0.11, 0.19, 0.251});
    LossWeights w;
    w.sre = 2.0;
    w.dtw = 5.0;
    const auto b = calibration_loss(d, s, w);
    EXPECT_DOUBLE_EQ(b.total, 2.0 * sre(d.values(), s.values()) + 5.0 * dtw(d.values(), s.values()));
}
