#pragma once

// Flat key-value run configuration with section headers.
//
//   [run]       circuit, unit
//   [scenario]  kind, sigma_fs, separation_fs, eta, pair_times_fs, name
//               (section may repeat; one scan set is produced per scenario)
//   [scan]      delay_min_fs, delay_max_fs, delay_step_fs, patterns
//   [analysis]  combine_eq4, combine_eq6, background, fit, r0
//
// Pattern entries are explicit label strings ("ABCD") or the tokens
// all-two-fold, all-four-fold, six-fold, full.

#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "source.hpp"

namespace noonsim {

struct ConfigError : std::runtime_error {
    ConfigError(int line_number, const std::string& message)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
          line(line_number) {}
    int line;
};

struct ScenarioConfig {
    std::string name;                 // defaults to the kind name
    ScenarioKind kind = ScenarioKind::FourXOne;
    double sigma = 100.0;             // fs
    double separation = 2000.0;       // fs, used by the separated kinds
    double eta = 0.1;
    std::vector<double> pair_times;   // fs, custom kind only
};

struct RunConfig {
    std::string circuit = "noon4";
    std::string unit = "fs";   // fs | um, for emitted CSVs
    std::string out_dir = "out"; // overridable from the command line
    std::vector<ScenarioConfig> scenarios;
    double delay_min = -1500.0;
    double delay_max = 1500.0;
    double delay_step = 150.0;
    std::vector<std::string> patterns;
    bool combine_eq4 = false;
    std::string combine_eq6 = "none"; // none | four_plus_two | two_by_three | both
    double background = 0.0;
    bool fit = true;
    double r0 = 1.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

} // namespace detail

inline RunConfig parse_config(std::istream& is) {
    RunConfig cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    bool have_scenario = false;

    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(lineno, "unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "run" && section != "scenario" && section != "scan" &&
                section != "analysis")
                throw ConfigError(lineno, "unknown section '" + section + "'");
            if (section == "scenario") {
                cfg.scenarios.emplace_back();
                have_scenario = true;
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(lineno, "empty key or value");

        if (section == "run") {
            if (key == "circuit") cfg.circuit = value;
            else if (key == "out") cfg.out_dir = value;
            else if (key == "unit") {
                if (value != "fs" && value != "um")
                    throw ConfigError(lineno, "unit must be fs or um");
                cfg.unit = value;
            } else throw ConfigError(lineno, "unknown key '" + key + "' in [run]");
        } else if (section == "scenario") {
            ScenarioConfig& sc = cfg.scenarios.back();
            if (key == "kind") {
                try {
                    sc.kind = scenario_kind_from_name(value);
                } catch (const std::exception& e) {
                    throw ConfigError(lineno, e.what());
                }
            } else if (key == "name") sc.name = value;
            else if (key == "sigma_fs") sc.sigma = detail::parse_number(value, lineno);
            else if (key == "separation_fs") sc.separation = detail::parse_number(value, lineno);
            else if (key == "eta") sc.eta = detail::parse_number(value, lineno);
            else if (key == "pair_times_fs") {
                for (const auto& t : detail::split_list(value))
                    sc.pair_times.push_back(detail::parse_number(t, lineno));
            } else throw ConfigError(lineno, "unknown key '" + key + "' in [scenario]");
        } else if (section == "scan") {
            if (key == "delay_min_fs") cfg.delay_min = detail::parse_number(value, lineno);
            else if (key == "delay_max_fs") cfg.delay_max = detail::parse_number(value, lineno);
            else if (key == "delay_step_fs") cfg.delay_step = detail::parse_number(value, lineno);
            else if (key == "patterns") cfg.patterns = detail::split_list(value);
            else throw ConfigError(lineno, "unknown key '" + key + "' in [scan]");
        } else if (section == "analysis") {
            if (key == "combine_eq4") cfg.combine_eq4 = detail::parse_bool(value, lineno);
            else if (key == "combine_eq6") {
                if (value != "none" && value != "four_plus_two" && value != "two_by_three" &&
                    value != "both")
                    throw ConfigError(lineno, "combine_eq6 must be none, four_plus_two, two_by_three or both");
                cfg.combine_eq6 = value;
            } else if (key == "background") cfg.background = detail::parse_number(value, lineno);
            else if (key == "fit") cfg.fit = detail::parse_bool(value, lineno);
            else if (key == "r0") cfg.r0 = detail::parse_number(value, lineno);
            else throw ConfigError(lineno, "unknown key '" + key + "' in [analysis]");
        } else {
            throw ConfigError(lineno, "key '" + key + "' outside any section");
        }
    }

    if (!have_scenario)
        throw ConfigError(lineno, "config declares no [scenario] section");
    if (cfg.patterns.empty())
        throw ConfigError(lineno, "config declares no patterns");
    if (cfg.delay_step <= 0.0 || cfg.delay_max < cfg.delay_min)
        throw ConfigError(lineno, "invalid delay grid");
    return cfg;
}

} // namespace noonsim
