#include "imbibe/errors.hpp"
#include "imbibe/ode.hpp"
#include "imbibe/reconstruct.hpp"
#include "support/oracles.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace imbibe;

namespace {

ReconstructionModel model_with(std::vector<double> c, double horizon = 1.0, double f0 = 0.0, double slope = 1.0,
                               double lambda = 0.0)
{
    ReconstructionModel m;
    m.degree = static_cast<int>(c.size()) - 1;
    m.coefficients = std::move(c);
    m.horizon = horizon;
    m.f0 = f0;
    m.f0_slope = slope;
    m.lambda = lambda;
    return m;
}

// F1' = F2, F2' = w F2 by odeint's controlled Dormand-Prince with w from the
// Rodrigues expansion.
std::vector<double> reference_curve(const std::vector<double>& c, double horizon, double f0, double slope,
                                    const std::vector<double>& times)
{
    using state = std::array<double, 2>;
    auto w = [&](double t) {
        double s = 0.0;
        for (std::size_t n = 0; n < c.size(); ++n)
            s += c[n] * oracle::legendre_rodrigues(static_cast<int>(n), std::clamp(t, 0.0, horizon), horizon);
        return s;
    };
    auto rhs = [&](const state& x, state& dx, double t) {
        dx[0] = x[1];
        dx[1] = w(t) * x[1];
    };
    std::vector<double> out;
    state x{f0, slope};
    double t = 0.0;
    auto stepper = boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<state>>(1e-13, 1e-13);
    for (double target : times) {
        if (target > t)
            boost::numeric::odeint::integrate_adaptive(stepper, rhs, x, t, target, 1e-3);
        t = target;
        out.push_back(x[0]);
    }
    return out;
}

} // namespace

TEST(Legendre, Examples)
{
    EXPECT_EQ(legendre_shifted(0, 0.37, 2.0), 1.0);
    EXPECT_EQ(legendre_shifted(1, 0.0, 1.0), 1.0);
    EXPECT_EQ(legendre_shifted(1, 1.0, 1.0), -1.0);
    EXPECT_DOUBLE_EQ(legendre_shifted(1, 0.25, 1.0), 0.5);
}

TEST(Legendre, MatchesRodriguesExpansion)
{
    for (int n = 0; n <= 25; ++n)
        for (double t : {0.0, 0.013, 0.25, 0.5, 0.77, 0.999, 1.0, 1.7, 3.0})
            EXPECT_NEAR(legendre_shifted(n, t, 3.0), oracle::legendre_rodrigues(n, t, 3.0), 1e-12) << n << ' ' << t;
}

TEST(Legendre, AllMatchesSingle)
{
    std::vector<double> all(26);
    legendre_shifted_all(1.3, 2.0, all);
    for (int n = 0; n <= 25; ++n)
        EXPECT_DOUBLE_EQ(all[n], legendre_shifted(n, 1.3, 2.0));
}

TEST(Legendre, GramMatrixIsDiagonal)
{
    const double horizon = 2.5;
    for (int n = 0; n <= 12; ++n)
        for (int m = 0; m <= 12; ++m) {
            auto f = [&](double t) { return legendre_shifted(n, t, horizon) * legendre_shifted(m, t, horizon); };
            const double g = boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, horizon);
            const double expected = n == m ? horizon / (2 * n + 1) : 0.0;
            EXPECT_NEAR(g, expected, 1e-13) << n << ' ' << m;
        }
}

TEST(Legendre, OutsideIntervalIsDomainError)
{
    EXPECT_THROW(legendre_shifted(2, -0.1, 1.0), DomainError);
    EXPECT_THROW(legendre_shifted(2, 1.1, 1.0), DomainError);
    EXPECT_THROW(legendre_shifted(-1, 0.5, 1.0), DomainError);
}

TEST(EvalW, Examples)
{
    EXPECT_EQ(eval_w(model_with({0.0, 0.0, 0.0}), 0.4), 0.0);
    EXPECT_DOUBLE_EQ(eval_w(model_with({1.7, 0.0, 0.0}), 0.4), 1.7);
    EXPECT_DOUBLE_EQ(eval_w(model_with({0.0, 1.0, 0.0}), 0.25), 0.5);
}

TEST(Penalty, ClosedFormExample)
{
    EXPECT_DOUBLE_EQ(regularization_penalty(model_with({1.0, 1.0}, 1.0, 0.0, 1.0, 2.0)), 8.0 / 3.0);
}

TEST(Penalty, MatchesQuadratureForRandomCoefficients)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> c(26);
        for (auto& x : c)
            x = g(rng);
        const auto m = model_with(c, 1.7, 0.0, 1.0, 0.3);
        auto w2 = [&](double t) {
            double s = 0.0;
            for (int n = 0; n <= 25; ++n)
                s += c[n] * oracle::legendre_rodrigues(n, t, 1.7);
            return s * s;
        };
        const double ref = 0.3 * boost::math::quadrature::gauss<double, 60>::integrate(w2, 0.0, 1.7);
        EXPECT_NEAR(regularization_penalty(m), ref, 1e-8 * ref);
    }
}

TEST(MonotoneModel, ZeroWIsLinear)
{
    const std::vector<double> t{0.0, 0.1, 0.5, 1.0};
    const auto s = integrate_monotone_model(model_with({0.0, 0.0}, 1.0, 0.2, 0.7), t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NEAR(s.values[i], 0.2 + 0.7 * t[i], 1e-14);
        EXPECT_NEAR(s.slopes[i], 0.7, 1e-14);
    }
}

TEST(MonotoneModel, ConstantWMatchesExponential)
{
    for (double a : {-2.0, -0.3, 0.5, 3.0}) {
        const double horizon = 2.0;
        const std::vector<double> t{horizon / 2, horizon};
        const auto s = integrate_monotone_model(model_with({a}, horizon, 0.1, 0.4), t);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double ref = 0.1 + 0.4 * std::expm1(a * t[i]) / a;
            EXPECT_NEAR(s.values[i], ref, 1e-7 * std::abs(ref)) << a;
            EXPECT_NEAR(s.slopes[i], 0.4 * std::exp(a * t[i]), 1e-7 * 0.4 * std::exp(a * t[i]));
        }
    }
}

TEST(MonotoneModel, MatchesIndependentIntegrator)
{
    const std::vector<double> c{0.4, -1.1, 0.6, 0.3};
    const std::vector<double> t{0.0, 0.2, 0.45, 0.8, 1.3, 1.5};
    const auto s = integrate_monotone_model(model_with(c, 1.5, 0.05, 0.9), t);
    const auto ref = reference_curve(c, 1.5, 0.05, 0.9, t);
    for (std::size_t i = 0; i < t.size(); ++i)
        EXPECT_NEAR(s.values[i], ref[i], 1e-8) << i;
}

TEST(Dopri5, ExponentialDecay)
{
    std::vector<double> y{1.0};
    const std::vector<double> out{0.5, 1.0, 4.0};
    std::vector<double> got;
    // local tolerances well below the asserted global error
    OdeOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-14;
    integrate_dopri5([](double, std::span<const double> x, std::span<double> dx) { dx[0] = -1.3 * x[0]; }, y,
                     0.0, out, [&](std::size_t, std::span<const double> x) { got.push_back(x[0]); }, o);
    ASSERT_EQ(got.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_NEAR(got[i], std::exp(-1.3 * out[i]), 1e-8 * std::exp(-1.3 * out[i]));
}

TEST(Dopri5, BlowUpRaisesIntegrationError)
{
    std::vector<double> y{1.0};
    const std::vector<double> out{2.0};
    EXPECT_THROW(integrate_dopri5([](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; },
                                  y, 0.0, out, [](std::size_t, std::span<const double>) {}),
                 IntegrationError);
}

TEST(Rescale, TwoPointExample)
{
    const auto s = rescale_to_unit(ImbibitionSeries({0.0, 10.0}, {2.0, 4.0}));
    EXPECT_EQ(s.series.times(), (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(s.series.values(), (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(s.transform.time_offset, 0.0);
    EXPECT_EQ(s.transform.time_scale, 10.0);
    EXPECT_EQ(s.transform.value_offset, 2.0);
    EXPECT_EQ(s.transform.value_scale, 2.0);
}

TEST(Rescale, RoundTrip)
{
    const ImbibitionSeries d({3.0, 7.5, 20.0, 61.0}, {0.013, 0.05, 0.11, 0.2}, 1.0);
    const auto s = rescale_to_unit(d);
    const auto back = unscale(s.series, s.transform);
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_NEAR(back.times()[i], d.times()[i], 1e-14 * d.times()[i]);
        EXPECT_NEAR(back.values()[i], d.values()[i], 1e-14 * d.values()[i]);
    }
}

TEST(Rescale, DegenerateRangeIsDataError)
{
    EXPECT_THROW(rescale_to_unit(ImbibitionSeries({0, 1, 2}, {5, 5, 5})), DataError);
}

TEST(Objective, ZeroForDataOnTheModel)
{
    const auto m = model_with({0.0, 0.0, 0.0}, 1.0, 0.1, 0.5, 3.0);
    const ImbibitionSeries line({0.0, 0.3, 0.6, 1.0}, {0.1, 0.25, 0.4, 0.6});
    EXPECT_NEAR(reconstruction_objective(m, line), 0.0, 1e-28);
}

TEST(Objective, IncludesPenalty)
{
    const auto m = model_with({1.0, 1.0}, 1.0, 0.0, 1.0, 2.0);
    const std::vector<double> t{0.0, 0.5, 1.0};
    const auto s = integrate_monotone_model(m, t);
    const ImbibitionSeries d(t, s.values);
    EXPECT_NEAR(reconstruction_objective(m, d), 8.0 / 3.0, 1e-10);
}

TEST(Fit, RecoversNoiselessModelData)
{
    // The fitter fixes the initial slope to the first forward difference, so a
    // second sample very close to t = 0 makes the generating model attainable.
    const std::vector<double> c{0.8, -0.6, 0.4, 0.2};
    std::vector<double> t{0.0, 1e-6};
    for (int i = 1; i <= 14; ++i)
        t.push_back(i / 14.0);
    const auto q = reference_curve(c, 1.0, 0.0, 1.0, t);
    FitOptions o;
    o.seed = 3;
    const auto r = fit_monotone(ImbibitionSeries(t, q), 3, 0.0, o);
    EXPECT_LT(r.misfit, 1e-8);
    const auto curve = evaluate_curve(r.model, t);
    for (std::size_t i = 0; i < t.size(); ++i)
        EXPECT_NEAR(curve.values()[i], q[i], 1e-4 * (q.back() - q.front()));
}

TEST(Fit, NoisySqrtDataGivesIncreasingCurve)
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<double> t, q;
    for (int i = 1; i <= 16; ++i) {
        t.push_back(5.0 * i * i);
        q.push_back(0.01 * std::sqrt(t.back()) * (1.0 + noise(rng)));
    }
    const auto r = fit_monotone(ImbibitionSeries(t, q), 25, 1e-3, {});
    const auto curve = evaluate_curve(r.model, t);
    for (std::size_t i = 1; i < t.size(); ++i)
        EXPECT_GT(curve.values()[i], curve.values()[i - 1]);
}

TEST(Fit, DeterministicForSeed)
{
    const ImbibitionSeries d({1, 2, 4, 8, 16, 32}, {0.1, 0.14, 0.2, 0.29, 0.4, 0.55});
    FitOptions o;
    o.seed = 42;
    const auto a = fit_monotone(d, 6, 1e-4, o);
    const auto b = fit_monotone(d, 6, 1e-4, o);
    EXPECT_EQ(a.model.coefficients, b.model.coefficients);
    EXPECT_EQ(a.objective, b.objective);
}

TEST(Fit, SubstitutesFirstPositiveSlope)
{
    const ImbibitionSeries d({0, 1, 2, 3, 4}, {0.1, 0.1, 0.2, 0.3, 0.35});
    const auto r = fit_monotone(d, 3, 1e-4, {});
    EXPECT_TRUE(r.slope_substituted);
    EXPECT_THROW(fit_monotone(ImbibitionSeries({0, 1, 2}, {0.3, 0.2, 0.1}), 3, 1e-4, {}), DataError);
}

TEST(ModelJson, RoundTrip)
{
    auto m = model_with({0.1, -0.2, 0.3}, 1.0, 0.05, 0.8, 1e-3);
    m.transform = {2.0, 100.0, 0.01, 0.5};
    const auto back = model_from_json(model_to_json(m));
    EXPECT_EQ(back.coefficients, m.coefficients);
    EXPECT_EQ(back.degree, 2);
    EXPECT_EQ(back.f0, m.f0);
    EXPECT_EQ(back.f0_slope, m.f0_slope);
    EXPECT_EQ(back.lambda, m.lambda);
    EXPECT_EQ(back.transform.time_scale, 100.0);
    EXPECT_EQ(back.transform.value_offset, 0.01);
    EXPECT_THROW(model_from_json("{not json"), DataError);
}
