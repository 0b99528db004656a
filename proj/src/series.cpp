#include "imbibe/series.hpp"

#include "imbibe/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace imbibe {

ImbibitionSeries::ImbibitionSeries(std::vector<double> times, std::vector<double> values, double density)
    : times_(std::move(times)), values_(std::move(values)), density_(density)
{
    if (times_.size() != values_.size())
        throw DataError(fmt::format("series has {} times but {} values", times_.size(), values_.size()));
    if (!(density_ > 0.0))
        throw DataError("liquid density must be positive");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]))
            throw DataError(fmt::format("non-finite entry at index {}", i));
        if (i > 0 && !(times_[i] > times_[i - 1]))
            throw DataError(fmt::format("times not strictly increasing at index {}", i));
    }
}

ImbibitionSeries ImbibitionSeries::select(std::span<const std::size_t> indices) const
{
    std::vector<double> t, v;
    t.reserve(indices.size());
    v.reserve(indices.size());
    for (auto i : indices) {
        t.push_back(times_.at(i));
        v.push_back(values_.at(i));
    }
    return {std::move(t), std::move(v), density_};
}

} // namespace imbibe
