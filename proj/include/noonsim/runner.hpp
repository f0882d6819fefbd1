#pragma once

// Configuration-driven runner: simulates the requested scans, applies the
// combination formulas, fits, and emits plot-ready CSV files plus a report
// table compared against the ideal visibilities. Re-running a config
// byte-reproduces every output file.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "circuits.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "fit.hpp"
#include "source.hpp"

namespace noonsim {

struct PatternInfo {
    std::string pattern;
    int photons = 0;
    int class_id = 0;
    double predicted_visibility = 0.0; // ideal, coincident-pair input
};

namespace detail {

inline std::vector<std::string> label_subsets(const std::string& labels, int k) {
    std::vector<std::string> out;
    const int n = static_cast<int>(labels.size());
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        std::string s;
        for (int i : idx) s += labels[static_cast<std::size_t>(i)];
        out.push_back(s);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

inline std::string circuit_labels(const Circuit& c) {
    std::string labels;
    for (const auto& [L, mode] : c.detector_labels) labels += L;
    return labels; // std::map keeps them sorted
}

// Detector projection phases z_j = u_V(j) / u_H(j) for photons entering on
// path 0; valid when all coupling magnitudes agree, which every preset
// satisfies by construction.
inline std::vector<Complex> detector_phases(const Circuit& c, const LinearMap& map,
                                            const std::string& labels) {
    std::vector<Complex> z;
    double mag = -1.0;
    for (char L : labels) {
        const int row = c.detector_labels.at(L).index();
        const Complex uh = map.matrix(row, 0); // column (path 0, H)
        const Complex uv = map.matrix(row, 1); // column (path 0, V)
        if (std::abs(std::abs(uh) - std::abs(uv)) > 1e-9)
            throw std::runtime_error("detector couplings are not balanced");
        if (mag < 0.0) mag = std::abs(uh);
        else if (std::abs(mag - std::abs(uh)) > 1e-9)
            throw std::runtime_error("detector couplings are not balanced");
        z.push_back(uv / uh);
    }
    return z;
}

// Ideal visibility of a coincidence pattern for a coincident-pair source,
// from the elementary symmetric polynomial of the detector phases:
//   2-fold: -Re(z_j conj(z_k));  4-fold: 1 - |e2|^2 / 6;  6-fold: 1 - |e3|^2 / 20.
inline double snap_tiny(double v) { return std::abs(v) < 1e-12 ? 0.0 : v; }

inline double predicted_visibility(const std::vector<Complex>& z) {
    const int n = static_cast<int>(z.size());
    if (n == 2)
        return snap_tiny(-std::real(z[0] * std::conj(z[1])));
    Complex e{0.0, 0.0};
    if (n == 4) {
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) e += z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(b)];
        return snap_tiny(1.0 - std::norm(e) / 6.0);
    }
    if (n == 6) {
        for (int a = 0; a < 6; ++a)
            for (int b = a + 1; b < 6; ++b)
                for (int c = b + 1; c < 6; ++c)
                    e += z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(b)] * z[static_cast<std::size_t>(c)];
        return snap_tiny(1.0 - std::norm(e) / 20.0);
    }
    throw std::invalid_argument("predicted_visibility: unsupported pattern size");
}

inline std::string format_g(double x, int precision = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    return buf;
}

} // namespace detail

// Catalog of every two-fold and four-fold detector pattern plus the full
// pattern, grouped by predicted equivalence class.
inline std::vector<PatternInfo> list_patterns(const Circuit& c) {
    const std::string labels = detail::circuit_labels(c);
    const LinearMap map = compile(c);
    const int n = static_cast<int>(labels.size());

    std::vector<PatternInfo> out;
    auto add_size = [&](int k) {
        std::vector<PatternInfo> batch;
        for (const auto& p : detail::label_subsets(labels, k)) {
            PatternInfo info;
            info.pattern = p;
            info.photons = k;
            info.predicted_visibility = detail::predicted_visibility(detail::detector_phases(c, map, p));
            batch.push_back(info);
        }
        // Class ids per size, highest predicted visibility first.
        std::vector<double> classes;
        for (const auto& b : batch) {
            bool found = false;
            for (double v : classes)
                if (std::abs(v - b.predicted_visibility) < 1e-9) found = true;
            if (!found) classes.push_back(b.predicted_visibility);
        }
        std::sort(classes.begin(), classes.end(), std::greater<>());
        for (auto& b : batch)
            for (std::size_t i = 0; i < classes.size(); ++i)
                if (std::abs(classes[i] - b.predicted_visibility) < 1e-9)
                    b.class_id = static_cast<int>(i);
        out.insert(out.end(), batch.begin(), batch.end());
    };

    add_size(2);
    if (n >= 4) add_size(4);
    if (n >= 6) add_size(n); // full pattern; for n <= 4 it is already listed
    return out;
}

// Expands pattern tokens against a circuit's label set.
inline std::vector<std::string> expand_patterns(const Circuit& c,
                                                const std::vector<std::string>& tokens) {
    const std::string labels = detail::circuit_labels(c);
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto push = [&](const std::string& p) {
        if (seen.insert(detail::sorted_pattern(p)).second)
            out.push_back(p);
    };
    for (const auto& t : tokens) {
        if (t == "all-two-fold") {
            for (const auto& p : detail::label_subsets(labels, 2)) push(p);
        } else if (t == "all-four-fold") {
            if (labels.size() < 4)
                throw std::invalid_argument("all-four-fold: circuit has fewer than 4 detectors");
            for (const auto& p : detail::label_subsets(labels, 4)) push(p);
        } else if (t == "six-fold") {
            if (labels.size() != 6)
                throw std::invalid_argument("six-fold: circuit does not have 6 detectors");
            push(labels);
        } else if (t == "full") {
            push(labels);
        } else {
            std::string sorted = detail::sorted_pattern(t);
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw std::invalid_argument("pattern '" + t + "' repeats a detector");
            for (char L : t)
                if (labels.find(L) == std::string::npos)
                    throw std::invalid_argument("pattern '" + t + "' uses unknown detector '" +
                                                std::string(1, L) + "'");
            if (t.size() % 2 != 0 || t.empty())
                throw std::invalid_argument("pattern '" + t + "' must list an even number of detectors");
            push(t);
        }
    }
    return out;
}

struct ReportRow {
    std::string scenario;
    std::string pattern;
    std::string method; // direct | eq4 | eq6-2x3 | eq6-4+2
    double visibility = 0.0;
    double baseline = 0.0;
    std::optional<double> width;
    std::string ea_estimates;
    std::optional<double> ideal;
};

namespace detail {

inline Scenario make_scenario(const ScenarioConfig& sc) {
    if (sc.kind == ScenarioKind::Custom) {
        Scenario s;
        s.kind = ScenarioKind::Custom;
        s.pair_times = sc.pair_times;
        s.sigma = sc.sigma;
        s.eta = sc.eta;
        validate_scenario(s);
        return s;
    }
    return scenario_build(sc.kind, sc.sigma, sc.separation, sc.eta);
}

inline bool coincident_pairs(const Scenario& s) {
    for (double t : s.pair_times)
        if (t != s.pair_times.front())
            return false;
    return true;
}

inline std::string ea_field(const std::vector<EAEstimate>& estimates) {
    std::string out;
    for (const auto& e : estimates) {
        if (!out.empty()) out += ';';
        out += ea_method_name(e.method) + ":" + format_g(e.raw, 9);
        if (e.clamped) out += "(clamped)";
    }
    return out;
}

} // namespace detail

// Executes a parsed configuration. Writes one CSV per scan, report.csv and
// summary.txt under out_dir. Throws ConfigError for configuration-level
// problems and std::runtime_error for runtime failures.
inline void run(const RunConfig& cfg, const std::string& out_dir, bool quiet, std::ostream& log) {
    namespace fs = std::filesystem;

    Circuit circuit;
    try {
        circuit = preset(cfg.circuit);
    } catch (const std::exception&) {
        throw ConfigError(0, "unknown circuit '" + cfg.circuit + "' (key: circuit)");
    }
    const std::string labels = detail::circuit_labels(circuit);

    std::vector<std::string> patterns;
    try {
        patterns = expand_patterns(circuit, cfg.patterns);
    } catch (const std::exception& e) {
        throw ConfigError(0, std::string(e.what()) + " (key: patterns)");
    }

    std::vector<double> delays;
    for (double d = cfg.delay_min; d <= cfg.delay_max + 1e-9 * cfg.delay_step; d += cfg.delay_step)
        delays.push_back(d);
    if (delays.empty())
        throw ConfigError(0, "empty delay grid (keys: delay_min_fs/delay_max_fs/delay_step_fs)");

    fs::create_directories(out_dir);

    // Ideal reference visibilities for coincident-pair inputs.
    std::map<std::string, double> predicted;
    for (const auto& info : list_patterns(circuit))
        predicted[detail::sorted_pattern(info.pattern)] = info.predicted_visibility;

    std::vector<ReportRow> rows;
    std::set<std::string> used_names;

    for (const auto& sc : cfg.scenarios) {
        Scenario scenario;
        try {
            scenario = detail::make_scenario(sc);
        } catch (const std::exception& e) {
            throw ConfigError(0, std::string(e.what()) + " (section: scenario)");
        }
        std::string name = sc.name.empty() ? scenario_name(sc.kind) : sc.name;
        for (int suffix = 2; !used_names.insert(name).second; ++suffix)
            name = (sc.name.empty() ? scenario_name(sc.kind) : sc.name) + "_" + std::to_string(suffix);

        const int pairs = static_cast<int>(scenario.pair_times.size());
        for (const auto& p : patterns)
            if (order_for_pattern(p) > pairs)
                throw ConfigError(0, "pattern '" + p + "' needs " +
                                  std::to_string(order_for_pattern(p)) + " pairs but scenario '" +
                                  name + "' provides " + std::to_string(pairs));

        if (!quiet)
            log << "scenario " << name << ": " << patterns.size() << " scan(s), "
                << delays.size() << " delay points\n";

        std::vector<ScanResult> scans = delay_scan_multi(scenario, circuit, patterns, delays);

        std::map<std::string, ScanResult> by_pattern; // sorted-pattern key, post background
        for (auto& s : scans) {
            if (cfg.background > 0.0 && s.label.size() >= 4)
                s = subtract_background(s, cfg.background).scan;
            by_pattern[detail::sorted_pattern(s.label)] = s;
        }

        auto emit = [&](const ScanResult& scan, const std::string& method,
                        const std::string& filename) {
            const ScanResult converted = convert_scan_unit(scan, cfg.unit);
            std::ofstream os(fs::path(out_dir) / filename);
            if (!os)
                throw std::runtime_error("cannot write " + filename);
            write_scan_csv(os, converted);

            ReportRow row;
            row.scenario = name;
            row.pattern = scan.label;
            row.method = method;
            row.visibility = visibility_model_free(converted);
            row.baseline = baseline_value(converted);
            if (cfg.fit) {
                try {
                    const FitResult fr = fit_gaussian_dip(converted);
                    if (!fr.degenerate)
                        row.width = fr.width;
                } catch (const std::exception&) {
                    // unfittable scan (e.g. grid narrower than the feature); keep the
                    // model-free visibility and leave the width column empty
                }
            }
            if (method == "eq4")
                row.ideal = 1.0 / 3.0;
            else if (method == "eq6-2x3")
                row.ideal = 0.4;
            else if (method == "eq6-4+2")
                row.ideal = 0.6;
            else if (detail::coincident_pairs(scenario))
                row.ideal = predicted.at(detail::sorted_pattern(scan.label));
            else if (scenario.kind == ScenarioKind::TwoXTwo &&
                     scan.label.size() == labels.size() && labels.size() == 4)
                row.ideal = 1.0 / 3.0;
            rows.push_back(row);
            return row;
        };

        std::optional<ReportRow> direct_full;
        for (const auto& s : scans) {
            ReportRow row = emit(s, "direct", name + "_" + s.label + ".csv");
            if (s.label.size() == labels.size())
                direct_full = row;
        }

        auto pair_scan = [&](char a, char b) -> const ScanResult& {
            auto it = by_pattern.find(detail::sorted_pattern(std::string{a, b}));
            if (it == by_pattern.end())
                throw ConfigError(0, std::string("combination needs two-fold pattern ") + a + b +
                                  " (add all-two-fold to patterns)");
            return it->second;
        };

        if (cfg.combine_eq4) {
            if (labels.size() != 4)
                throw ConfigError(0, "combine_eq4 requires a four-detector circuit");
            ScanResult comb = combine_accidental_four(
                pair_scan(labels[0], labels[1]), pair_scan(labels[2], labels[3]),
                pair_scan(labels[0], labels[2]), pair_scan(labels[1], labels[3]),
                pair_scan(labels[0], labels[3]), pair_scan(labels[1], labels[2]), cfg.r0);
            comb.label = labels;
            ReportRow comb_row = emit(comb, "eq4", name + "_eq4.csv");

            if (direct_full) {
                // E/A estimates attach to the direct full-fold row.
                std::vector<EAEstimate> estimates;
                const double v2 = visibility_model_free(pair_scan(labels[0], labels[1]));
                if (v2 > 0.0 && v2 <= 1.0) {
                    try {
                        estimates.push_back(ea_from_v4(direct_full->visibility, v2));
                    } catch (const std::exception&) {
                        // infeasible v4/v2 combination: skip the estimate
                    }
                }
                estimates.push_back(
                    ea_from_baseline_ratio(direct_full->baseline, comb_row.baseline));
                if (scenario.pair_times.size() == 2)
                    estimates.push_back(ea_from_packets(
                        GaussianPacket{scenario.pair_times[0], scenario.sigma},
                        GaussianPacket{scenario.pair_times[1], scenario.sigma}));
                for (auto& row : rows)
                    if (row.scenario == name && row.method == "direct" &&
                        row.pattern == direct_full->pattern)
                        row.ea_estimates = detail::ea_field(estimates);
            }
        }

        if (cfg.combine_eq6 != "none") {
            if (labels.size() != 6)
                throw ConfigError(0, "combine_eq6 requires a six-detector circuit");
            std::map<std::string, ScanResult> two_fold, four_fold;
            for (const auto& [key, s] : by_pattern) {
                if (key.size() == 2) two_fold[key] = s;
                if (key.size() == 4) four_fold[key] = s;
            }
            if (two_fold.size() != 15)
                throw ConfigError(0, "combine_eq6 needs all 15 two-fold scans (add all-two-fold)");
            if (cfg.combine_eq6 != "two_by_three" && four_fold.size() != 15)
                throw ConfigError(0, "combine_eq6 four_plus_two needs all 15 four-fold scans "
                                     "(add all-four-fold)");
            if (cfg.combine_eq6 == "four_plus_two" || cfg.combine_eq6 == "both") {
                ScanResult comb = combine_accidental_six(two_fold, four_fold, cfg.r0,
                                                         SixMode::FourPlusTwo);
                comb.label = labels;
                emit(comb, "eq6-4+2", name + "_eq6_4p2.csv");
            }
            if (cfg.combine_eq6 == "two_by_three" || cfg.combine_eq6 == "both") {
                ScanResult comb = combine_accidental_six(two_fold, {}, cfg.r0,
                                                         SixMode::TwoByThree);
                comb.label = labels;
                emit(comb, "eq6-2x3", name + "_eq6_2x3.csv");
            }
        }
    }

    // report.csv
    {
        std::ofstream os(fs::path(out_dir) / "report.csv");
        if (!os)
            throw std::runtime_error("cannot write report.csv");
        os << "scenario,pattern,method,visibility,baseline,width,ea_estimates\n";
        for (const auto& r : rows) {
            os << r.scenario << ',' << r.pattern << ',' << r.method << ','
               << detail::format_g(r.visibility) << ',' << detail::format_g(r.baseline) << ','
               << (r.width ? detail::format_g(*r.width) : std::string()) << ','
               << r.ea_estimates << '\n';
        }
    }

    // summary.txt: computed vs ideal
    {
        std::ofstream os(fs::path(out_dir) / "summary.txt");
        if (!os)
            throw std::runtime_error("cannot write summary.txt");
        os << "circuit: " << cfg.circuit << "\n";
        os << std::left << std::setw(22) << "scenario" << std::setw(10) << "pattern"
           << std::setw(10) << "method" << std::setw(16) << "visibility"
           << std::setw(16) << "ideal" << "delta\n";
        for (const auto& r : rows) {
            os << std::left << std::setw(22) << r.scenario << std::setw(10) << r.pattern
               << std::setw(10) << r.method << std::setw(16) << detail::format_g(r.visibility, 9);
            if (r.ideal) {
                os << std::setw(16) << detail::format_g(*r.ideal, 9)
                   << detail::format_g(std::abs(r.visibility - *r.ideal), 3) << "\n";
            } else {
                os << std::setw(16) << "-" << "-\n";
            }
        }
    }

    if (!quiet) {
        log << "wrote " << rows.size() << " report rows to " << out_dir << "/report.csv\n";
        for (const auto& r : rows)
            if (r.ideal)
                log << "  " << r.scenario << " " << r.pattern << " " << r.method
                    << " visibility " << detail::format_g(r.visibility, 9) << " (ideal "
                    << detail::format_g(*r.ideal, 9) << ")\n";
    }
}

} // namespace noonsim
