#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "occ/optimize.hpp"

namespace occ {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal INI reader: [section] headers, key = value lines, `#` or `;`
/// comments. Unknown keys are rejected by the RunConfig loader so typos
/// in archived run configs fail loudly.
class IniFile {
public:
    static IniFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    static IniFile parse_string(const std::string& text, const std::string& name = "<string>") {
        IniFile ini;
        std::istringstream in(text);
        std::string line, section;
        int line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            auto cut = line.find_first_of("#;");
            if (cut != std::string::npos) line.erase(cut);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw ConfigError(name + ":" + std::to_string(line_number) +
                                      ": malformed section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(name + ":" + std::to_string(line_number) +
                                  ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigError(name + ":" + std::to_string(line_number) + ": empty key");
            ini.values_[section + "." + key] = value;
        }
        return ini;
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        auto it = values_.find(section + "." + key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + section + "." + key + " is not a number: '" +
                              it->second + "'");
        }
    }

    long get_int(const std::string& section, const std::string& key, long fallback) const {
        auto it = values_.find(section + "." + key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + section + "." + key + " is not an integer: '" +
                              it->second + "'");
        }
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

/// Fully resolved run configuration. Every key has a documented default
/// matching the reference instance.
struct RunConfig {
    // [mesh]
    int mesh_n = 64;
    std::string mesh_file;  // overrides mesh_n when set

    // [problem]
    double psi = -0.05;
    double f = -10.0;
    double alpha = 1e-3;
    double u_d = -0.02;
    double q_min = 0.5;
    double q_max = 2.0;
    double q0_scalar = 1.25;     // initial / fixed control: q0 * I
    std::string control_file;    // overrides q0_scalar when set

    // [regularization]
    std::string instance = "polynomial";
    double gamma = 1e4;  // for single-gamma commands

    // [path]
    double gamma_min = 10.0;
    double gamma_max = 1e4;
    double gamma_ratio = 3.1622776601683795;  // sqrt(10)
    int pg_max_iters = 400;
    double pg_tol = 1e-7;
    double fp_tol = 1e-6;

    // [tolerances]
    double newton_tol = 1e-10;
    int newton_max_iters = 50;
    double lin_tol = 1e-10;
    double c_mu = 10.0;

    std::uint64_t seed = 42;

    std::vector<double> gamma_ladder() const {
        std::vector<double> ladder;
        if (!(gamma_min > 0.0) || !(gamma_ratio > 1.0) || !(gamma_max >= gamma_min))
            throw ConfigError("path: need 0 < gamma_min <= gamma_max and gamma_ratio > 1");
        for (double g = gamma_min; g <= gamma_max * (1.0 + 1e-12); g *= gamma_ratio)
            ladder.push_back(g);
        return ladder;
    }

    NewtonOptions newton_options() const {
        NewtonOptions opts;
        opts.newton_tol = newton_tol;
        opts.max_iters = newton_max_iters;
        opts.lin_tol = lin_tol;
        return opts;
    }

    PathConfig path_config() const {
        PathConfig cfg;
        cfg.gamma_ladder = gamma_ladder();
        cfg.pg_max_iters = pg_max_iters;
        cfg.pg_tol = pg_tol;
        cfg.fp_tol = fp_tol;
        cfg.seed = seed;
        cfg.newton = newton_options();
        return cfg;
    }

    void validate() const {
        if (mesh_file.empty() && mesh_n < 1) throw ConfigError("mesh: n must be >= 1");
        if (!(psi < 0.0)) throw ConfigError("psi must be negative");
        if (!(q_min > 0.0 && q_min < q_max))
            throw ConfigError("bounds must satisfy 0 < q_min < q_max");
        if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
        if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
        if (instance != "polynomial")
            throw ConfigError("unknown smoothed-max instance: " + instance);
        gamma_ladder();  // validates the ladder parameters
    }

    static RunConfig from_ini(const IniFile& ini) {
        static const std::map<std::string, int> known = {
            {"mesh.n", 0},           {"mesh.file", 0},
            {"problem.psi", 0},      {"problem.f", 0},
            {"problem.alpha", 0},    {"problem.u_d", 0},
            {"problem.q_min", 0},    {"problem.q_max", 0},
            {"problem.q0", 0},       {"problem.control_file", 0},
            {"regularization.instance", 0}, {"regularization.gamma", 0},
            {"path.gamma_min", 0},   {"path.gamma_max", 0},
            {"path.gamma_ratio", 0}, {"path.pg_max_iters", 0},
            {"path.pg_tol", 0},      {"path.fp_tol", 0},
            {"tolerances.newton_tol", 0}, {"tolerances.newton_max_iters", 0},
            {"tolerances.lin_tol", 0},    {"tolerances.c_mu", 0},
        };
        for (const auto& [key, value] : ini.entries())
            if (!known.count(key)) throw ConfigError("unknown config key: " + key);

        RunConfig c;
        c.mesh_n = static_cast<int>(ini.get_int("mesh", "n", c.mesh_n));
        c.mesh_file = ini.get_string("mesh", "file", c.mesh_file);
        c.psi = ini.get_double("problem", "psi", c.psi);
        c.f = ini.get_double("problem", "f", c.f);
        c.alpha = ini.get_double("problem", "alpha", c.alpha);
        c.u_d = ini.get_double("problem", "u_d", c.u_d);
        c.q_min = ini.get_double("problem", "q_min", c.q_min);
        c.q_max = ini.get_double("problem", "q_max", c.q_max);
        c.q0_scalar = ini.get_double("problem", "q0", c.q0_scalar);
        c.control_file = ini.get_string("problem", "control_file", c.control_file);
        c.instance = ini.get_string("regularization", "instance", c.instance);
        c.gamma = ini.get_double("regularization", "gamma", c.gamma);
        c.gamma_min = ini.get_double("path", "gamma_min", c.gamma_min);
        c.gamma_max = ini.get_double("path", "gamma_max", c.gamma_max);
        c.gamma_ratio = ini.get_double("path", "gamma_ratio", c.gamma_ratio);
        c.pg_max_iters = static_cast<int>(ini.get_int("path", "pg_max_iters", c.pg_max_iters));
        c.pg_tol = ini.get_double("path", "pg_tol", c.pg_tol);
        c.fp_tol = ini.get_double("path", "fp_tol", c.fp_tol);
        c.newton_tol = ini.get_double("tolerances", "newton_tol", c.newton_tol);
        c.newton_max_iters =
            static_cast<int>(ini.get_int("tolerances", "newton_max_iters", c.newton_max_iters));
        c.lin_tol = ini.get_double("tolerances", "lin_tol", c.lin_tol);
        c.c_mu = ini.get_double("tolerances", "c_mu", c.c_mu);
        c.validate();
        return c;
    }
};

}  // namespace occ
