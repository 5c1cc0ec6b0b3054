#pragma once

#include "lsv/date.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsv::cli {

/// Flat `key = value` run configuration. `#` starts a comment; relative paths
/// are resolved against the directory of the config file.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig load(const std::filesystem::path& path);
    static RunConfig parse(std::istream& in, const std::filesystem::path& base_dir,
                           const std::string& source = "<config>");

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string text(const std::string& key, const std::string& fallback) const;
    std::optional<std::string> text(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::size_t count(const std::string& key, std::size_t fallback) const;
    std::uint64_t seed() const;
    std::optional<Date> date(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<std::size_t> counts(const std::string& key) const;
    /// Path value resolved against the config directory.
    std::optional<std::filesystem::path> path(const std::string& key) const;

    /// FNV-1a (64-bit, hex) of the sorted key=value text, excluding `out` and
    /// `threads`, which never change artifact contents.
    std::string hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_;
};

/// Keys accepted in a config file.
const std::vector<std::string>& known_keys();

}  // namespace lsv::cli
