#include "imbibe/cli/config.hpp"

#include "imbibe/errors.hpp"

#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <spdlog/spdlog.h>

#ifndef IMBIBE_SHARE_DIR
#define IMBIBE_SHARE_DIR "share/imbibe"
#endif

namespace imbibe::cli {

namespace {

nlohmann::json parse_file(const std::filesystem::path& path, const char* what)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open {} '{}'", what, path.string()));
    try {
        return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("{} '{}': {}", what, path.string(), e.what()));
    }
}

std::vector<std::string> split_path(std::string_view path)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        parts.emplace_back(path.substr(start, dot - start));
        if (dot == std::string_view::npos)
            break;
        start = dot + 1;
    }
    return parts;
}

std::filesystem::path default_materials_path()
{
    if (const char* env = std::getenv("IMBIBE_SHARE_DIR"))
        return std::filesystem::path(env) / "materials.json";
    return std::filesystem::path(IMBIBE_SHARE_DIR) / "materials.json";
}

} // namespace

MaterialsTable MaterialsTable::load(const std::filesystem::path& path)
{
    MaterialsTable t;
    t.source_ = path.empty() ? default_materials_path() : path;
    t.data_ = parse_file(t.source_, "materials table");
    if (!t.data_.contains("materials") || !t.data_.at("materials").is_object())
        throw ConfigError(fmt::format("materials table '{}' has no 'materials' object", t.source_.string()));
    return t;
}

bool MaterialsTable::has_material(std::string_view key) const
{
    return data_.at("materials").contains(std::string(key));
}

const nlohmann::json& MaterialsTable::material(std::string_view key) const
{
    const auto& m = data_.at("materials");
    const auto it = m.find(std::string(key));
    if (it == m.end()) {
        std::string known;
        for (const auto& [k, _] : m.items())
            known += (known.empty() ? "" : ", ") + k;
        throw ConfigError(fmt::format("unknown material '{}' (known: {})", key, known));
    }
    return *it;
}

ConfigReader::ConfigReader(nlohmann::json user, std::filesystem::path base_dir)
    : user_(std::move(user)), base_dir_(std::move(base_dir))
{
    if (!user_.is_object())
        throw ConfigError("configuration must be a JSON object");
    const auto version = user_.value("schema_version", kSchemaVersion);
    if (version != kSchemaVersion)
        throw ConfigError(fmt::format("unsupported schema_version {} (expected {})", version, kSchemaVersion));
    resolved_["schema_version"] = {{"value", version}, {"source", user_.contains("schema_version") ? "config" : "default"}};
}

ConfigReader ConfigReader::from_file(const std::filesystem::path& path)
{
    return ConfigReader(parse_file(path, "config"), path.parent_path());
}

std::filesystem::path ConfigReader::resolve_path(const std::string& p) const
{
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir_.empty() ? path : base_dir_ / path;
}

const nlohmann::json* ConfigReader::find(std::string_view path) const
{
    const nlohmann::json* node = &user_;
    for (const auto& part : split_path(path)) {
        if (!node->is_object())
            return nullptr;
        const auto it = node->find(part);
        if (it == node->end() || it->is_null())
            return nullptr;
        node = &*it;
    }
    return node;
}

void ConfigReader::record(std::string_view path, nlohmann::json value, std::string_view source)
{
    nlohmann::json* node = &resolved_;
    for (const auto& part : split_path(path))
        node = &(*node)[part];
    if (source != "config")
        spdlog::info("config: {} = {} ({})", path, value.dump(), source);
    else
        spdlog::debug("config: {} = {}", path, value.dump());
    *node = {{"value", std::move(value)}, {"source", std::string(source)}};
}

void ConfigReader::throw_type_error(std::string_view path, const char* what)
{
    throw ConfigError(fmt::format("config: bad value for '{}': {}", path, what));
}

} // namespace imbibe::cli
