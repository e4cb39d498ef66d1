#pragma once

// Flat, typed key=value run configuration. Precedence: defaults < config file <
// CARS_* environment variables < command-line flags.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cars/numerics/optimize.hpp"

namespace cars::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kEnvPrefix = "CARS_";

enum class Format { csv, json };

struct RunConfig {
    std::string family;  // plane | vortex; empty: the command's own family
    double s_min = 0.01;
    double s_max = 3.0;
    int s_points = 120;
    std::vector<double> s_list;  // explicit grid overrides s_min/s_max/s_points
    std::vector<double> ktilde{0.0, 1.0, 2.0, 4.0};
    bool ktilde_default = true;
    std::vector<double> a{0.70710678118654752440};
    std::vector<double> psi{0.0, 0.1, 0.2, 0.3};
    std::vector<int> modes_list{5, 10, 15, 20, 25};
    int modes = 10;
    double tol = 1e-12;  // absolute fi_direct tolerance, normalized units
    double a_min = 0.05;
    double a_max = 5.0;
    bool raw = false;
    // simulate
    double s = 1.0;
    std::string measurement = "spade";  // spade | direct
    double mu = 1e4;
    int batches = 50;
    int estimates_per_batch = 40;
    double photons = 10.0;
    int bins = 32;
    // spectral
    double pump_center = 10.0;
    double pump_bandwidth = 1.0;
    double pump_amplitude = 1.0;
    double stokes_center = 7.0;
    double stokes_bandwidth = 1.0;
    double stokes_amplitude = 1.0;
    double omega_vib = 3.0;
    double gamma_vib = 0.5;
    double polarizability = 1.0;
    int grid_points = 4096;
    // run
    std::uint64_t seed = 1;
    Format format = Format::csv;
    std::string out;  // empty: stdout
    int workers = 0;  // 0: hardware concurrency

    [[nodiscard]] std::vector<double> s_grid() const {
        if (!s_list.empty()) return s_list;
        return numerics::linspace(s_min, s_max, static_cast<std::size_t>(s_points));
    }
};

namespace detail {

inline std::string trim(const std::string& v) {
    const auto b = v.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = v.find_last_not_of(" \t\r\n");
    return v.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("config: '" + key + "' must be a nonempty list");
    return out;
}

}  // namespace detail

/// Applies one key=value assignment.
inline void apply(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
    using namespace detail;
    std::string key = trim(raw_key);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string v = trim(raw_value);
    auto positive_int = [&](int& field) {
        const long long n = parse_int(key, v);
        if (n < 1 || n > 100'000'000) throw ConfigError("config: '" + key + "' must be a positive integer");
        field = static_cast<int>(n);
    };

    if (key == "family") {
        if (v != "plane" && v != "vortex") throw ConfigError("config: family must be 'plane' or 'vortex'");
        c.family = v;
    } else if (key == "s_min") c.s_min = parse_double(key, v);
    else if (key == "s_max") c.s_max = parse_double(key, v);
    else if (key == "s_points") positive_int(c.s_points);
    else if (key == "s_grid") c.s_list = parse_double_list(key, v);
    else if (key == "ktilde") {
        c.ktilde = parse_double_list(key, v);
        c.ktilde_default = false;
    } else if (key == "a") c.a = parse_double_list(key, v);
    else if (key == "psi") c.psi = parse_double_list(key, v);
    else if (key == "modes_list") {
        c.modes_list.clear();
        for (const auto& item : split_list(v)) c.modes_list.push_back(static_cast<int>(parse_int(key, item)));
        if (c.modes_list.empty()) throw ConfigError("config: modes_list must be nonempty");
    } else if (key == "modes" || key == "m") {
        const long long n = parse_int(key, v);
        if (n < 0 || n > 200) throw ConfigError("config: modes must lie in [0, 200]");
        c.modes = static_cast<int>(n);
    } else if (key == "tol") c.tol = parse_double(key, v);
    else if (key == "a_min") c.a_min = parse_double(key, v);
    else if (key == "a_max") c.a_max = parse_double(key, v);
    else if (key == "raw") c.raw = parse_bool(key, v);
    else if (key == "s") c.s = parse_double(key, v);
    else if (key == "measurement") {
        if (v != "spade" && v != "direct") throw ConfigError("config: measurement must be 'spade' or 'direct'");
        c.measurement = v;
    } else if (key == "mu") c.mu = parse_double(key, v);
    else if (key == "batches") positive_int(c.batches);
    else if (key == "estimates_per_batch") positive_int(c.estimates_per_batch);
    else if (key == "photons") c.photons = parse_double(key, v);
    else if (key == "bins") positive_int(c.bins);
    else if (key == "pump_center") c.pump_center = parse_double(key, v);
    else if (key == "pump_bandwidth") c.pump_bandwidth = parse_double(key, v);
    else if (key == "pump_amplitude") c.pump_amplitude = parse_double(key, v);
    else if (key == "stokes_center") c.stokes_center = parse_double(key, v);
    else if (key == "stokes_bandwidth") c.stokes_bandwidth = parse_double(key, v);
    else if (key == "stokes_amplitude") c.stokes_amplitude = parse_double(key, v);
    else if (key == "omega_vib") c.omega_vib = parse_double(key, v);
    else if (key == "gamma_vib") c.gamma_vib = parse_double(key, v);
    else if (key == "polarizability") c.polarizability = parse_double(key, v);
    else if (key == "grid_points") positive_int(c.grid_points);
    else if (key == "seed") {
        const long long n = parse_int(key, v);
        if (n < 0) throw ConfigError("config: seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(n);
    } else if (key == "format") {
        if (v == "csv") c.format = Format::csv;
        else if (v == "json") c.format = Format::json;
        else throw ConfigError("config: format must be 'csv' or 'json'");
    } else if (key == "out") c.out = v;
    else if (key == "workers") {
        const long long n = parse_int(key, v);
        if (n < 0 || n > 1024) throw ConfigError("config: workers must lie in [0, 1024]");
        c.workers = static_cast<int>(n);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "family", "s_min", "s_max", "s_points", "s_grid", "ktilde", "a", "psi", "modes_list", "modes", "tol",
        "a_min", "a_max", "raw", "s", "measurement", "mu", "batches", "estimates_per_batch", "photons", "bins",
        "pump_center", "pump_bandwidth", "pump_amplitude", "stokes_center", "stokes_bandwidth", "stokes_amplitude",
        "omega_vib", "gamma_vib", "polarizability", "grid_points", "seed", "format", "out", "workers"};
    return keys;
}

/// Reads `key = value` lines; '#' starts a comment.
inline void load_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" + std::to_string(lineno) + ": expected key = value");
        apply(c, line.substr(0, eq), line.substr(eq + 1));
    }
}

/// CARS_<KEY> variables, e.g. CARS_MODES=30.
inline void load_environment(RunConfig& c) {
    for (const auto& key : config_keys()) {
        std::string name = kEnvPrefix;
        for (char ch : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* v = std::getenv(name.c_str())) apply(c, key, v);
    }
}

inline void validate(const RunConfig& c) {
    if (c.s_list.empty()) {
        if (!(c.s_min >= 0.0) || !(c.s_max >= c.s_min)) throw ConfigError("config: need 0 <= s_min <= s_max");
    }
    for (double s : c.s_list)
        if (!(s >= 0.0)) throw ConfigError("config: s_grid entries must be >= 0");
    for (double a : c.a)
        if (!(a > 0.0)) throw ConfigError("config: a entries must be > 0");
    for (int m : c.modes_list)
        if (m < 0 || m > 200) throw ConfigError("config: modes_list entries must lie in [0, 200]");
    if (!(c.tol > 0.0)) throw ConfigError("config: tol must be > 0");
    if (!(c.a_min > 0.0) || !(c.a_max > c.a_min)) throw ConfigError("config: need 0 < a_min < a_max");
    if (!(c.s >= 0.0)) throw ConfigError("config: s must be >= 0");
    if (!(c.mu >= 1.0)) throw ConfigError("config: mu must be >= 1");
    if (!(c.photons > 0.0)) throw ConfigError("config: photons must be > 0");
    if (!(c.pump_bandwidth > 0.0) || !(c.stokes_bandwidth > 0.0))
        throw ConfigError("config: bandwidths must be > 0");
    if (!(c.gamma_vib > 0.0)) throw ConfigError("config: gamma_vib must be > 0");
    if (!(c.polarizability > 0.0)) throw ConfigError("config: polarizability must be > 0");
    if (c.grid_points < 3) throw ConfigError("config: grid_points must be >= 3");
}

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
    return out;
}

}  // namespace detail

/// Resolved configuration as ordered key/value pairs (used in output headers).
inline std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
    using detail::fmt;
    using detail::fmt_list;
    std::string modes_list;
    for (std::size_t i = 0; i < c.modes_list.size(); ++i) modes_list += (i ? "," : "") + std::to_string(c.modes_list[i]);
    return {
        {"family", c.family},
        {"s_grid", c.s_list.empty() ? "linspace(" + fmt(c.s_min) + "," + fmt(c.s_max) + "," + std::to_string(c.s_points) + ")"
                                    : fmt_list(c.s_list)},
        {"ktilde", fmt_list(c.ktilde)},
        {"a", fmt_list(c.a)},
        {"psi", fmt_list(c.psi)},
        {"modes", std::to_string(c.modes)},
        {"modes_list", modes_list},
        {"tol", fmt(c.tol)},
        {"a_min", fmt(c.a_min)},
        {"a_max", fmt(c.a_max)},
        {"raw", c.raw ? "true" : "false"},
        {"s", fmt(c.s)},
        {"measurement", c.measurement},
        {"mu", fmt(c.mu)},
        {"batches", std::to_string(c.batches)},
        {"estimates_per_batch", std::to_string(c.estimates_per_batch)},
        {"photons", fmt(c.photons)},
        {"bins", std::to_string(c.bins)},
        {"pump_center", fmt(c.pump_center)},
        {"pump_bandwidth", fmt(c.pump_bandwidth)},
        {"pump_amplitude", fmt(c.pump_amplitude)},
        {"stokes_center", fmt(c.stokes_center)},
        {"stokes_bandwidth", fmt(c.stokes_bandwidth)},
        {"stokes_amplitude", fmt(c.stokes_amplitude)},
        {"omega_vib", fmt(c.omega_vib)},
        {"gamma_vib", fmt(c.gamma_vib)},
        {"polarizability", fmt(c.polarizability)},
        {"grid_points", std::to_string(c.grid_points)},
        {"seed", std::to_string(c.seed)},
    };
}

}  // namespace cars::cli
