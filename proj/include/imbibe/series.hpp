#pragma once

#include <span>
#include <vector>

namespace imbibe {

/// Water absorbed per unit area Q (g/cm^2) at strictly increasing instants (min).
class ImbibitionSeries {
public:
    ImbibitionSeries() = default;
    ImbibitionSeries(std::vector<double> times, std::vector<double> values, double density = 1.0);

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& values() const noexcept { return values_; }
    /// Liquid density rho_l (g/cm^3) the series was computed with.
    double density() const noexcept { return density_; }

    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

    /// Subsequence at the given indices, in order.
    ImbibitionSeries select(std::span<const std::size_t> indices) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    double density_ = 1.0;
};

} // namespace imbibe
