#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "kylefee/model.hpp"

namespace kylefee {

// Run configuration read from a flat key = value file.
struct Config {
    MarketParams params;
    std::size_t n_grid = 1000;
    double epsilon_fraction = 0.01;
};

namespace detail {
inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}
inline double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': not a number: '" + v + "'");
    }
    if (pos != v.size())
        throw config_error("config key '" + key + "': trailing junk in '" + v + "'");
    return x;
}
}  // namespace detail

// Lines are `key = value`; '#' starts a comment; unknown keys are errors.
inline Config parse_config_text(std::istream& in) {
    Config cfg;
    cfg.params.sigma_const = 0.20;
    cfg.params.sigma_v = 0.30;
    cfg.params.horizon = 10.0;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const double x = detail::to_double(key, val);

        if (key == "mu_v") cfg.params.mu_v = x;
        else if (key == "sigma_v") cfg.params.sigma_v = x;
        else if (key == "sigma") cfg.params.sigma_const = x;
        else if (key == "horizon") cfg.params.horizon = x;
        else if (key == "kappa") cfg.params.kappa = x;
        else if (key == "n_grid") cfg.n_grid = static_cast<std::size_t>(x);
        else if (key == "epsilon_fraction") cfg.epsilon_fraction = x;
        else if (key == "w0_insider") cfg.params.w0_insider = x;
        else if (key == "w0_mm") cfg.params.w0_mm = x;
        else if (key == "w0_noise") cfg.params.w0_noise = x;
        else throw config_error("config line " + std::to_string(lineno) +
                                ": unknown key '" + key + "'");
    }
    validate(cfg.params);
    return cfg;
}

inline Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    return parse_config_text(in);
}

}  // namespace kylefee
