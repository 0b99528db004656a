/**
 * @file data.hpp
 * @brief Laboratory weighing logs, absorbed-water series and dataset bundles.
 *
 * Specimen CSV layout:
 *
 *     # specimen_id=CM-01
 *     # dry_mass_g=352.18
 *     # area_cm2=25
 *     time_min,mass_g
 *     0,352.18
 *     1,352.61
 *     ...
 *
 * A bundle is a manifest JSON next to the specimen files:
 *
 *     { "material": "...",
 *       "environment": {"temperature_c": 27, "relative_humidity": 0.8},
 *       "groups": {"all": ["s1.csv", "s2.csv"]} }
 */
#pragma once

#include "imbibe/series.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imbibe {

/// Wet mass may undershoot the dry mass by this much (balance noise, g).
inline constexpr double kDryMassTolerance = 0.01;
/// Ambient moisture used when no override is given (T = 27 C, UR = 0.8).
inline constexpr double kDefaultThetaBar = 2.33e-5;

struct SpecimenLog {
    std::string specimen_id;
    double dry_mass = 0.0; // g
    double area = 0.0;     // cm^2
    std::vector<double> times;  // min
    std::vector<double> masses; // g

    /// Throws DataError when area or dry mass are not positive, times are not
    /// strictly increasing, or a wet mass is below dry mass - tolerance.
    void validate() const;
};

SpecimenLog parse_specimen_csv(std::istream& in, std::string_view source = "<stream>");
SpecimenLog read_specimen_log(const std::filesystem::path& path);
void write_specimen_log(const SpecimenLog& log, const std::filesystem::path& path);

/// Q_i = (m_i - m_d) / A in g/cm^2.
ImbibitionSeries compute_q_data(const SpecimenLog& log, double density = 1.0);

/// Pointwise mean of series sharing identical time stamps.
ImbibitionSeries average_series(std::span<const ImbibitionSeries> series);

/// Two-column CSV (time_min, q_g_per_cm2) with a header row.
void write_series_csv(const ImbibitionSeries& series, const std::filesystem::path& path);
ImbibitionSeries read_series_csv(const std::filesystem::path& path, double density = 1.0);

struct Environment {
    double temperature = 27.0; // C
    double humidity = 0.8;     // fraction
    std::optional<double> theta_bar_override;
    /// Evaluate the saturated-vapour-density cubic instead of the default.
    bool use_formula = false;

    /// Throws ConfigError unless humidity is in [0, 1] and the override is finite and >= 0.
    void validate() const;
};

/// alpha_T (alpha_0 + alpha_1 T + alpha_2 T^2 + alpha_3 T^3) UR with the
/// coefficients as commonly printed. Note that this does not evaluate to
/// kDefaultThetaBar at 27 C and UR = 0.8.
double vapour_density_formula(double temperature, double humidity) noexcept;

/// Override if present, else the formula if requested, else kDefaultThetaBar.
double theta_bar(const Environment& env);

struct SampleGroup {
    std::string name;
    std::vector<SpecimenLog> specimens;
    ImbibitionSeries average;
};

struct Dataset {
    std::string material;
    Environment environment;
    double density = 1.0;
    bool synthetic = false;
    std::vector<SampleGroup> groups;

    /// Throws DataError when no group has this name.
    const SampleGroup& group(std::string_view name) const;
};

/// Loads a manifest and every specimen it names (paths relative to the manifest).
Dataset load_dataset(const std::filesystem::path& manifest);

} // namespace imbibe
