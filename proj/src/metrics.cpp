#include "imbibe/metrics.hpp"

#include "imbibe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <spdlog/spdlog.h>
#include <vector>

namespace imbibe {

double sre(std::span<const double> data, std::span<const double> sim)
{
    if (data.size() != sim.size())
        throw DataError(fmt::format("sre: {} data values vs {} simulated", data.size(), sim.size()));
    if (data.size() < 2)
        throw DataError("sre needs at least two points");
    double sum = 0.0;
    std::size_t retained = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i] == 0.0)
            continue;
        const double r = (data[i] - sim[i]) / data[i];
        sum += r * r;
        ++retained;
    }
    if (retained == 0)
        throw DataError("sre: every data value is zero");
    const std::size_t n_data = data.size() - 1;
    if (retained < data.size())
        spdlog::debug("sre: skipped {} zero data value(s)", data.size() - retained);
    return sum / static_cast<double>(std::min(n_data, retained));
}

double dtw(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty())
        throw DataError("dtw needs nonempty sequences");
    const std::size_t m = b.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m, inf), cur(m, inf);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = a[i] - b[j];
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else {
                best = inf;
                if (i > 0)
                    best = std::min(best, prev[j]);
                if (j > 0)
                    best = std::min(best, cur[j - 1]);
                if (i > 0 && j > 0)
                    best = std::min(best, prev[j - 1]);
            }
            cur[j] = best + d * d;
        }
        std::swap(prev, cur);
    }
    return std::sqrt(prev[m - 1]);
}

double final_cost(double q_data_end, double q_sim_end, const LossWeights& weights)
{
    const double d = q_data_end - q_sim_end;
    return d * d > weights.final_threshold ? weights.final_magnitude : 0.0;
}

LossBreakdown calibration_loss(const ImbibitionSeries& data, const ImbibitionSeries& sim,
                               const LossWeights& weights)
{
    if (data.size() < 2)
        throw DataError("calibration loss needs at least two data points");
    const auto& st = sim.times();
    std::vector<double> matched;
    matched.reserve(data.size());
    for (double tau : data.times()) {
        auto it = std::lower_bound(st.begin(), st.end(), tau * (1.0 - 1e-9) - 1e-12);
        if (it == st.end() || std::abs(*it - tau) > 1e-9 * std::max(1.0, std::abs(tau)))
            throw AlignmentError(fmt::format("data time {} is not a simulation time level", tau));
        matched.push_back(sim.values()[static_cast<std::size_t>(it - st.begin())]);
    }
    LossBreakdown out;
    out.sre = sre(data.values(), matched);
    out.dtw = dtw(data.values(), matched);
    out.final = final_cost(data.values().back(), matched.back(), weights);
    out.total = weights.sre * out.sre + weights.dtw * out.dtw + out.final;
    return out;
}

} // namespace imbibe
