/**
 * @file absorption.hpp
 * @brief Closed-form absorption function B(s) and its derivative.
 *
 * B'(s) is a concave parabola supported on [s_R, s_S] and clipped at zero
 * elsewhere; its peak value D is reached at the midpoint (s_R + s_S)/2.
 * B is the antiderivative vanishing at s = 0, i.e. a piecewise cubic that
 * is zero below s_R and constant, (2D/3)(s_S - s_R), above s_S.
 */
#pragma once

namespace imbibe {

/// Saturations within this distance of [0,1] are clamped, beyond it rejected.
inline constexpr double kSaturationSlack = 1e-9;

/// Clamps roundoff excursions of s into [0,1]; throws DomainError beyond the slack.
double clamp_saturation(double s);

class AbsorptionLaw {
public:
    AbsorptionLaw(double residual_saturation, double max_saturation, double diffusion_rate);

    double residual_saturation() const noexcept { return s_r_; }
    double max_saturation() const noexcept { return s_s_; }
    /// Peak of B' (cm^2/min).
    double diffusion_rate() const noexcept { return d_; }

    /// B'(s).
    double rate(double s) const;
    /// B(s).
    double value(double s) const;
    /// B on [s_S, 1].
    double plateau() const noexcept { return 2.0 * d_ * (s_s_ - s_r_) / 3.0; }

    // Hot-loop variants: s must already lie in [0,1].
    double rate_unchecked(double s) const noexcept
    {
        if (s <= s_r_ || s >= s_s_)
            return 0.0;
        return 4.0 * d_ * (s - s_r_) * (s_s_ - s) * inv_width2_;
    }
    double value_unchecked(double s) const noexcept
    {
        if (s <= s_r_)
            return 0.0;
        if (s >= s_s_)
            return plateau_;
        const double u = s_r_ - s;
        return two_thirds_d_ * u * u * (3.0 * s_s_ - s_r_ - 2.0 * s) * inv_width2_;
    }

private:
    double s_r_;
    double s_s_;
    double d_;
    double inv_width2_;
    double two_thirds_d_;
    double plateau_;
};

} // namespace imbibe
