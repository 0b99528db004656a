#include "imbibe/data.hpp"

#include "imbibe/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <spdlog/spdlog.h>
#include <sstream>

namespace imbibe {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::string_view source, std::size_t line)
{
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw DataError(fmt::format("{}:{}: expected a number, got '{}'", source, line, text));
    return value;
}

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError(fmt::format("cannot open '{}'", path.string()));
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError(fmt::format("cannot write '{}'", path.string()));
    out.precision(17);
    return out;
}

} // namespace

void SpecimenLog::validate() const
{
    if (!(area > 0.0))
        throw DataError(fmt::format("specimen '{}': area must be positive, got {}", specimen_id, area));
    if (!(dry_mass > 0.0))
        throw DataError(fmt::format("specimen '{}': dry mass must be positive, got {}", specimen_id, dry_mass));
    if (times.size() != masses.size())
        throw DataError(fmt::format("specimen '{}': {} times vs {} masses", specimen_id, times.size(), masses.size()));
    if (times.empty())
        throw DataError(fmt::format("specimen '{}': no records", specimen_id));
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw DataError(fmt::format("specimen '{}': times not strictly increasing at record {} ({} after {})",
                                        specimen_id, i, times[i], times[i - 1]));
    for (std::size_t i = 0; i < masses.size(); ++i)
        if (masses[i] < dry_mass - kDryMassTolerance)
            throw DataError(fmt::format("specimen '{}': mass {} g at {} min is below the dry mass {} g", specimen_id,
                                        masses[i], times[i], dry_mass));
}

SpecimenLog parse_specimen_csv(std::istream& in, std::string_view source)
{
    SpecimenLog log;
    bool have_dry = false, have_area = false, have_header = false;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            const auto body = trim(line.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                continue;
            const auto key = trim(body.substr(0, eq));
            const auto value = trim(body.substr(eq + 1));
            if (key == "specimen_id") {
                log.specimen_id = std::string(value);
            } else if (key == "dry_mass_g") {
                log.dry_mass = parse_number(value, source, line_no);
                have_dry = true;
            } else if (key == "area_cm2") {
                log.area = parse_number(value, source, line_no);
                have_area = true;
            }
            continue;
        }
        const auto fields = split_commas(line);
        if (!have_header) {
            if (fields.size() != 2 || fields[0] != "time_min" || fields[1] != "mass_g")
                throw DataError(fmt::format("{}:{}: expected header 'time_min,mass_g'", source, line_no));
            have_header = true;
            continue;
        }
        if (fields.size() != 2)
            throw DataError(fmt::format("{}:{}: expected 2 fields, got {}", source, line_no, fields.size()));
        log.times.push_back(parse_number(fields[0], source, line_no));
        log.masses.push_back(parse_number(fields[1], source, line_no));
    }
    if (!have_dry || !have_area)
        throw DataError(fmt::format("{}: missing '# dry_mass_g=' or '# area_cm2=' header", source));
    if (!have_header)
        throw DataError(fmt::format("{}: missing column header", source));
    if (log.specimen_id.empty())
        log.specimen_id = std::string(source);
    log.validate();
    return log;
}

SpecimenLog read_specimen_log(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_specimen_csv(in, path.string());
}

void write_specimen_log(const SpecimenLog& log, const std::filesystem::path& path)
{
    log.validate();
    auto out = open_output(path);
    out << "# specimen_id=" << log.specimen_id << '\n'
        << "# dry_mass_g=" << log.dry_mass << '\n'
        << "# area_cm2=" << log.area << '\n'
        << "time_min,mass_g\n";
    for (std::size_t i = 0; i < log.times.size(); ++i)
        out << log.times[i] << ',' << log.masses[i] << '\n';
}

ImbibitionSeries compute_q_data(const SpecimenLog& log, double density)
{
    log.validate();
    std::vector<double> q(log.masses.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        q[i] = (log.masses[i] - log.dry_mass) / log.area;
    return {log.times, std::move(q), density};
}

ImbibitionSeries average_series(std::span<const ImbibitionSeries> series)
{
    if (series.empty())
        throw DataError("cannot average an empty list of series");
    const auto& ref = series.front();
    std::vector<double> sum(ref.size(), 0.0);
    for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].times() != ref.times())
            throw DataError(fmt::format("series {} does not share the time stamps of series 0", s));
        if (series[s].density() != ref.density())
            throw DataError(fmt::format("series {} has a different liquid density", s));
        for (std::size_t i = 0; i < sum.size(); ++i)
            sum[i] += series[s].values()[i];
    }
    const auto n = static_cast<double>(series.size());
    for (double& v : sum)
        v /= n;
    return {ref.times(), std::move(sum), ref.density()};
}

void write_series_csv(const ImbibitionSeries& series, const std::filesystem::path& path)
{
    auto out = open_output(path);
    out << "time_min,q_g_per_cm2\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out << series.times()[i] << ',' << series.values()[i] << '\n';
}

ImbibitionSeries read_series_csv(const std::filesystem::path& path, double density)
{
    auto in = open_input(path);
    const auto source = path.string();
    std::vector<double> t, v;
    std::string raw;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        const auto fields = split_commas(line);
        if (fields.size() < 2)
            throw DataError(fmt::format("{}:{}: expected at least 2 fields", source, line_no));
        if (!header) {
            header = true;
            // Accept a header row of any names.
            double probe = 0.0;
            const auto f = fields[0];
            if (std::from_chars(f.data(), f.data() + f.size(), probe).ec != std::errc())
                continue;
        }
        t.push_back(parse_number(fields[0], source, line_no));
        v.push_back(parse_number(fields[1], source, line_no));
    }
    try {
        return {std::move(t), std::move(v), density};
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", source, e.what()));
    }
}

void Environment::validate() const
{
    if (!(humidity >= 0.0 && humidity <= 1.0))
        throw ConfigError(fmt::format("relative humidity must lie in [0, 1], got {}", humidity));
    if (!std::isfinite(temperature))
        throw ConfigError("temperature must be finite");
    if (theta_bar_override && !(*theta_bar_override >= 0.0 && std::isfinite(*theta_bar_override)))
        throw ConfigError(fmt::format("theta_bar override must be finite and nonnegative, got {}",
                                      *theta_bar_override));
}

double vapour_density_formula(double temperature, double humidity) noexcept
{
    constexpr double alpha_t = 1e-6, a0 = 5.02, a1 = 0.32, a2 = 8.18, a3 = 3.12;
    const double t = temperature;
    return alpha_t * (a0 + t * (a1 + t * (a2 + t * a3))) * humidity;
}

double theta_bar(const Environment& env)
{
    env.validate();
    if (env.theta_bar_override)
        return *env.theta_bar_override;
    if (env.use_formula)
        return vapour_density_formula(env.temperature, env.humidity);
    return kDefaultThetaBar;
}

const SampleGroup& Dataset::group(std::string_view name) const
{
    for (const auto& g : groups)
        if (g.name == name)
            return g;
    throw DataError(fmt::format("dataset '{}' has no group '{}'", material, name));
}

Dataset load_dataset(const std::filesystem::path& manifest)
{
    auto in = open_input(manifest);
    Dataset ds;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        ds.material = j.value("material", std::string("unnamed"));
        ds.synthetic = j.value("synthetic", false);
        ds.density = j.value("density_g_cm3", 1.0);
        if (j.contains("environment")) {
            const auto& e = j.at("environment");
            ds.environment.temperature = e.value("temperature_c", ds.environment.temperature);
            ds.environment.humidity = e.value("relative_humidity", ds.environment.humidity);
            if (e.contains("theta_bar"))
                ds.environment.theta_bar_override = e.at("theta_bar").get<double>();
            ds.environment.use_formula = e.value("use_formula", false);
        }
        if (!j.contains("groups") || !j.at("groups").is_object() || j.at("groups").empty())
            throw DataError(fmt::format("{}: manifest needs a nonempty 'groups' object", manifest.string()));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("{}: {}", manifest.string(), e.what()));
    }
    ds.environment.validate();
    if (!(ds.density > 0.0))
        throw DataError(fmt::format("{}: density must be positive", manifest.string()));

    const auto dir = manifest.parent_path();
    for (const auto& [name, files] : j.at("groups").items()) {
        SampleGroup g;
        g.name = name;
        if (!files.is_array() || files.empty())
            throw DataError(fmt::format("{}: group '{}' must list at least one file", manifest.string(), name));
        std::vector<ImbibitionSeries> q;
        for (const auto& f : files) {
            g.specimens.push_back(read_specimen_log(dir / f.get<std::string>()));
            q.push_back(compute_q_data(g.specimens.back(), ds.density));
        }
        g.average = average_series(q);
        spdlog::debug("dataset '{}': group '{}' with {} specimen(s), {} records", ds.material, name,
                      g.specimens.size(), g.average.size());
        ds.groups.push_back(std::move(g));
    }
    if (ds.synthetic)
        spdlog::info("dataset '{}' is synthetic", ds.material);
    return ds;
}

} // namespace imbibe
