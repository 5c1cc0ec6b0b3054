#include "config.hpp"

#include "lsv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lsv::cli {

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "data_csv", "spx_csv", "vix_csv", "spx_column", "vix_column",
        "in_sample_start", "in_sample_end", "out_sample_start", "out_sample_end",
        "kernel_n", "kernel_init", "optimizer_budget", "random_restarts", "innovation_floor",
        "seed", "threads", "out", "calibration",
        "r", "q", "rho", "s0", "a0", "kappa_y", "nu", "y0",
        "quantizer_allocation", "quantizer_grid_steps", "quantizer_basis", "quantize_horizon",
        "product", "engines", "n_paths", "strikes",
        "pde_spot_nodes", "pde_average_nodes", "pde_time_steps", "pde_advection",
        "scenario_paths", "scenario_horizon", "scenario_start", "scenario_measure",
        "real_world_drift", "ks_threshold",
    };
    return keys;
}

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw InputError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
    return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw InputError("config: key '" + key + "' expects a non-negative integer, got '" + v + "'");
    }
    return out;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open '" + path.string() + "'");
    return parse(in, path.parent_path(), path.string());
}

RunConfig RunConfig::parse(std::istream& in, const std::filesystem::path& base_dir,
                           const std::string& source) {
    RunConfig cfg;
    cfg.base_dir_ = base_dir;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(number);
        if (eq == std::string::npos) throw InputError("config " + where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw InputError("config " + where + ": unknown key '" + key + "'");
        }
        if (cfg.values_.count(key)) throw InputError("config " + where + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

std::optional<std::string> RunConfig::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
    return text(key).value_or(fallback);
}

double RunConfig::number(const std::string& key, double fallback) const {
    const auto v = text(key);
    return v ? parse_number(key, *v) : fallback;
}

std::size_t RunConfig::count(const std::string& key, std::size_t fallback) const {
    const auto v = text(key);
    return v ? static_cast<std::size_t>(parse_unsigned(key, *v)) : fallback;
}

std::uint64_t RunConfig::seed() const {
    const auto v = text("seed");
    return v ? parse_unsigned("seed", *v) : 1;
}

std::optional<Date> RunConfig::date(const std::string& key) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    const auto d = Date::parse_iso(*v);
    if (!d) throw InputError("config: key '" + key + "' expects YYYY-MM-DD, got '" + *v + "'");
    return d;
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
    std::vector<double> out;
    if (const auto v = text(key)) {
        for (const auto& item : split_list(*v)) out.push_back(parse_number(key, item));
    }
    return out;
}

std::vector<std::size_t> RunConfig::counts(const std::string& key) const {
    std::vector<std::size_t> out;
    if (const auto v = text(key)) {
        for (const auto& item : split_list(*v)) {
            out.push_back(static_cast<std::size_t>(parse_unsigned(key, item)));
        }
    }
    return out;
}

std::optional<std::filesystem::path> RunConfig::path(const std::string& key) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    std::filesystem::path p(*v);
    if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
    return p;
}

std::string RunConfig::hash() const {
    std::string canonical;
    for (const auto& [k, v] : values_) {
        if (k == "out" || k == "threads") continue;
        canonical += k + "=" + v + "\n";
    }
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace lsv::cli
