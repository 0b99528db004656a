/**
 * @file ode.hpp
 * @brief Adaptive Dormand-Prince 5(4) integrator with output at given instants.
 */
#pragma once

#include "imbibe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace imbibe {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    std::size_t max_steps = 200000;
    /// Error control uses only the first `controlled` components (0 = all).
    /// Uncontrolled components (e.g. sensitivities) then follow the step
    /// sequence of the controlled ones bit for bit.
    std::size_t controlled = 0;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

namespace detail {

inline double rms_norm(std::span<const double> v, std::span<const double> scale)
{
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = v[i] / scale[i];
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(v.size()));
}

} // namespace detail

/**
 * Integrates y' = rhs(t, y, dydt) from t0 and calls emit(i, y) at every
 * instant outputs[i] (nondecreasing, >= t0). `y` holds the state at the last
 * output on return. Throws IntegrationError on step-size underflow or when
 * the step budget is exhausted.
 */
template <class Rhs, class Emit>
OdeStats integrate_dopri5(Rhs&& rhs, std::vector<double>& y, double t0, std::span<const double> outputs,
                          Emit&& emit, const OdeOptions& options = {})
{
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::size_t n = y.size();
    const std::size_t nc = options.controlled == 0 ? n : std::min(options.controlled, n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(nc), scale(nc);

    OdeStats stats;
    double t = t0;
    rhs(t, std::span<const double>(y), std::span<double>(k1));

    auto scales_for = [&](std::span<const double> a, std::span<const double> b) {
        for (std::size_t i = 0; i < nc; ++i)
            scale[i] = options.atol + options.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    };

    // Initial step (Hairer, Norsett & Wanner, II.4)
    double h;
    {
        scales_for(y, y);
        const double d0 = detail::rms_norm(std::span(y).first(nc), scale);
        const double d1 = detail::rms_norm(std::span(k1).first(nc), scale);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        const double span = outputs.empty() ? 0.0 : outputs.back() - t0;
        if (span > 0.0)
            h0 = std::min(h0, span);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h0 * k1[i];
        rhs(t + h0, std::span<const double>(tmp), std::span<double>(k2));
        for (std::size_t i = 0; i < nc; ++i)
            err[i] = (k2[i] - k1[i]) / h0;
        const double d2 = detail::rms_norm(err, scale);
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
        h = std::min(100.0 * h0, h1);
    }

    bool rejected_last = false;
    for (std::size_t out = 0; out < outputs.size(); ++out) {
        const double target = outputs[out];
        while (t < target) {
            if (stats.accepted + stats.rejected >= options.max_steps)
                throw IntegrationError(t);
            const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (!(h > min_step) || !std::isfinite(h))
                throw IntegrationError(t);
            bool last = false;
            double step = h;
            if (t + step >= target) {
                step = target - t;
                last = true;
            }

            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * a21 * k1[i];
            rhs(t + c2 * step, std::span<const double>(tmp), std::span<double>(k2));
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
            rhs(t + c3 * step, std::span<const double>(tmp), std::span<double>(k3));
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(t + c4 * step, std::span<const double>(tmp), std::span<double>(k4));
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(t + c5 * step, std::span<const double>(tmp), std::span<double>(k5));
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(t + step, std::span<const double>(tmp), std::span<double>(k6));
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + step * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            rhs(t + step, std::span<const double>(ynew), std::span<double>(k7));

            for (std::size_t i = 0; i < nc; ++i)
                err[i] = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            scales_for(y, ynew);
            double e = detail::rms_norm(err, scale);
            if (!std::isfinite(e))
                e = 1e10;

            if (e <= 1.0) {
                ++stats.accepted;
                t = last ? target : t + step;
                y.swap(ynew);
                k1.swap(k7);
                double fac = e == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 10.0);
                if (rejected_last)
                    fac = std::min(fac, 1.0);
                // Keep the proposal of the unclipped step when the output instant cut it short.
                h = last && step < h ? std::max(h, step * fac) : step * fac;
                rejected_last = false;
            } else {
                ++stats.rejected;
                h = step * std::max(0.2, 0.9 * std::pow(e, -0.2));
                rejected_last = true;
            }
        }
        emit(out, std::span<const double>(y));
    }
    return stats;
}

} // namespace imbibe
