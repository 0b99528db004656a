#include "imbibe/errors.hpp"

#include <fmt/format.h>

namespace imbibe {

CflError::CflError(double dt, double bound)
    : NumericalError(fmt::format("time step {:.6g} exceeds the stability bound {:.6g}", dt, bound)),
      dt_(dt), bound_(bound)
{
}

DivergenceError::DivergenceError(std::size_t step)
    : NumericalError(fmt::format("explicit scheme diverged at time step {}", step)), step_(step)
{
}

IntegrationError::IntegrationError(double reached_time)
    : NumericalError(fmt::format("step size underflow at t = {:.9g}", reached_time)), reached_(reached_time)
{
}

} // namespace imbibe
