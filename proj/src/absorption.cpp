#include "imbibe/absorption.hpp"

#include "imbibe/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace imbibe {

double clamp_saturation(double s)
{
    if (!(s >= -kSaturationSlack && s <= 1.0 + kSaturationSlack))
        throw DomainError(fmt::format("saturation {} outside [0,1]", s));
    if (s < 0.0)
        return 0.0;
    if (s > 1.0)
        return 1.0;
    return s;
}

AbsorptionLaw::AbsorptionLaw(double residual_saturation, double max_saturation, double diffusion_rate)
    : s_r_(residual_saturation), s_s_(max_saturation), d_(diffusion_rate)
{
    if (!(s_r_ >= 0.0 && s_r_ < s_s_ && s_s_ <= 1.0))
        throw ConfigError(fmt::format(
            "absorption law needs 0 <= s_R < s_S <= 1 (got s_R={}, s_S={})", s_r_, s_s_));
    if (!(d_ >= 0.0) || !std::isfinite(d_))
        throw ConfigError(fmt::format("diffusion rate must be finite and >= 0 (got {})", d_));
    const double w = s_s_ - s_r_;
    inv_width2_ = 1.0 / (w * w);
    two_thirds_d_ = 2.0 * d_ / 3.0;
    plateau_ = 2.0 * d_ * w / 3.0;
}

double AbsorptionLaw::rate(double s) const
{
    return rate_unchecked(clamp_saturation(s));
}

double AbsorptionLaw::value(double s) const
{
    return value_unchecked(clamp_saturation(s));
}

} // namespace imbibe
