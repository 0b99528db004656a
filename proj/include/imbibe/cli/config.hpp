/**
 * @file config.hpp
 * @brief JSON run configuration with per-value provenance logging.
 *
 * Every value a command reads goes through ConfigReader::get, which takes it
 * from the user file when present and otherwise from a fallback whose origin
 * ("default", "materials table", ...) is logged next to the value. The
 * resolved tree is written to the output directory with each run.
 */
#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace imbibe::cli {

inline constexpr int kSchemaVersion = 1;

/// Published material constants shipped as data: porosity ranges, reconstruction M and
/// lambda per material, PSO and final-cost defaults, the coarse box.
class MaterialsTable {
public:
    /// Loads `path`, or the installed share/imbibe/materials.json when empty.
    static MaterialsTable load(const std::filesystem::path& path = {});

    const nlohmann::json& raw() const noexcept { return data_; }
    std::filesystem::path source() const { return source_; }
    bool has_material(std::string_view key) const;
    /// Throws ConfigError for unknown keys.
    const nlohmann::json& material(std::string_view key) const;

private:
    nlohmann::json data_;
    std::filesystem::path source_;
};

class ConfigReader {
public:
    ConfigReader() = default;
    ConfigReader(nlohmann::json user, std::filesystem::path base_dir);

    /// Reads and validates a config file (schema_version must match).
    static ConfigReader from_file(const std::filesystem::path& path);

    /// Value at a dotted path such as "calibrate.pso.swarm_size".
    template <class T>
    T get(std::string_view path, const T& fallback, std::string_view fallback_source = "default")
    {
        if (const nlohmann::json* node = find(path)) {
            T value = convert<T>(*node, path);
            record(path, nlohmann::json(value), "config");
            return value;
        }
        record(path, nlohmann::json(fallback), fallback_source);
        return fallback;
    }

    /// Value without a fallback; nullopt when absent.
    template <class T>
    std::optional<T> maybe(std::string_view path)
    {
        if (const nlohmann::json* node = find(path)) {
            T value = convert<T>(*node, path);
            record(path, nlohmann::json(value), "config");
            return value;
        }
        return std::nullopt;
    }

    /// Records a value that came from the command line.
    template <class T>
    T override_with(std::string_view path, const T& value)
    {
        record(path, nlohmann::json(value), "command line");
        return value;
    }

    bool contains(std::string_view path) const { return find(path) != nullptr; }
    /// Paths in the config are relative to the config file.
    std::filesystem::path resolve_path(const std::string& p) const;

    const nlohmann::json& user() const noexcept { return user_; }
    /// Every value read so far, as {"value": ..., "source": ...} leaves.
    const nlohmann::json& resolved() const noexcept { return resolved_; }

private:
    const nlohmann::json* find(std::string_view path) const;
    void record(std::string_view path, nlohmann::json value, std::string_view source);

    template <class T>
    static T convert(const nlohmann::json& node, std::string_view path)
    {
        try {
            return node.get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw_type_error(path, e.what());
        }
    }
    [[noreturn]] static void throw_type_error(std::string_view path, const char* what);

    nlohmann::json user_ = nlohmann::json::object();
    nlohmann::json resolved_ = nlohmann::json::object();
    std::filesystem::path base_dir_;
};

} // namespace imbibe::cli
