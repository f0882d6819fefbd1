#pragma once

// Delay scans, accidental-coincidence combinations, E/A estimators and
// background subtraction: the data-analysis layer on top of the simulator.
//
// Rates are per-pulse probabilities times an arbitrary constant; only ratios
// and visibilities are meaningful. The repetition-rate constant R0 enters the
// combination formulas exactly as written, so visibilities are R0-independent.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "circuits.hpp"
#include "fock.hpp"
#include "source.hpp"

namespace noonsim {

inline constexpr double kSpeedOfLightUmPerFs = 0.2998;

struct ScanResult {
    std::vector<double> delays; // c*dT values, in `unit`
    std::vector<double> rates;  // non-negative, arbitrary units
    std::string label;          // coincidence pattern, e.g. "ABCD"
    std::string unit = "fs";    // fs | um
};

namespace detail {

inline void check_scan(const ScanResult& s) {
    if (s.delays.size() != s.rates.size())
        throw std::invalid_argument("ScanResult: delay/rate length mismatch");
    if (s.delays.empty())
        throw std::invalid_argument("ScanResult: empty scan");
}

inline void require_same_grid(const ScanResult& a, const ScanResult& b) {
    check_scan(a);
    check_scan(b);
    if (a.delays != b.delays || a.unit != b.unit)
        throw std::invalid_argument("scans are not on identical delay grids");
}

// Deterministic chunked parallel map over [0, n); each index writes its own
// slot, so results are identical regardless of thread count.
template <typename F>
void parallel_for_index(std::size_t n, F&& f) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw <= 1 || n < 4) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    for (auto& t : pool) t.join();
}

inline std::string sorted_pattern(std::string_view pattern) {
    std::string p(pattern);
    std::sort(p.begin(), p.end());
    return p;
}

} // namespace detail

// Minimal pair order producing enough photons for the pattern.
inline int order_for_pattern(std::string_view pattern) {
    if (pattern.empty() || pattern.size() % 2 != 0)
        throw std::invalid_argument("coincidence pattern must list an even, positive number of detectors");
    return static_cast<int>(pattern.size()) / 2;
}

// Coincidence rate versus H/V delay for several patterns at once; the source
// state is built and evolved once per (delay, order). Grid points evaluate
// independently and deterministically.
inline std::vector<ScanResult> delay_scan_multi(const Scenario& scenario, const Circuit& circuit,
                                                const std::vector<std::string>& patterns,
                                                const std::vector<double>& delays) {
    if (delays.empty())
        throw std::invalid_argument("delay_scan: empty delay grid");
    std::vector<int> orders;
    std::vector<std::vector<ExternalMode>> modes;
    for (const auto& p : patterns) {
        orders.push_back(order_for_pattern(p));
        modes.push_back(detectors_for(circuit, p));
    }
    std::set<int> distinct_orders(orders.begin(), orders.end());
    const LinearMap map = compile(circuit);

    std::vector<ScanResult> out(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        out[i].label = patterns[i];
        out[i].delays = delays;
        out[i].rates.assign(delays.size(), 0.0);
    }
    detail::parallel_for_index(delays.size(), [&](std::size_t d) {
        std::map<int, StateVector> evolved;
        for (int ord : distinct_orders) {
            SourceState src = pdc_state(scenario, ord, delays[d]);
            // Embed the single-path source into the circuit's mode space.
            StateVector widened(circuit.n_paths, src.basis);
            for (const auto& [m, a] : src.state.terms())
                widened.add_term(m, a);
            evolved.emplace(ord, apply_linear_map(map, widened));
        }
        for (std::size_t i = 0; i < patterns.size(); ++i)
            out[i].rates[d] = coincidence_probability(evolved.at(orders[i]),
                                                      modes[i]);
    });
    return out;
}

inline ScanResult delay_scan(const Scenario& scenario, const Circuit& circuit,
                             std::string_view pattern, const std::vector<double>& delays) {
    return delay_scan_multi(scenario, circuit, {std::string(pattern)}, delays).front();
}

// Four-fold rate of two independent pairs from pairwise accidentals:
// [R2(AB) R2(CD) + R2(AC) R2(BD) + R2(AD) R2(BC)] / R0.
inline ScanResult combine_accidental_four(const ScanResult& r_ab, const ScanResult& r_cd,
                                          const ScanResult& r_ac, const ScanResult& r_bd,
                                          const ScanResult& r_ad, const ScanResult& r_bc,
                                          double r0) {
    const ScanResult* scans[] = {&r_ab, &r_cd, &r_ac, &r_bd, &r_ad, &r_bc};
    for (const auto* s : scans)
        detail::require_same_grid(r_ab, *s);
    if (r0 <= 0.0)
        throw std::invalid_argument("combine_accidental_four: R0 must be positive");
    ScanResult out;
    out.delays = r_ab.delays;
    out.unit = r_ab.unit;
    out.label = "eq4";
    out.rates.resize(r_ab.rates.size());
    for (std::size_t i = 0; i < out.rates.size(); ++i)
        out.rates[i] = (r_ab.rates[i] * r_cd.rates[i] + r_ac.rates[i] * r_bd.rates[i] +
                        r_ad.rates[i] * r_bc.rates[i]) / r0;
    return out;
}

enum class SixMode { FourPlusTwo, TwoByThree };

// Six-fold rate from the 15 two-element subsets P of the detector labels:
// R6 = sum_P R2(P) R4(complement P) / R0. In FourPlusTwo mode the R4 inputs
// are the directly simulated four-fold scans; in TwoByThree mode each R4 is
// first rebuilt from two-fold scans with the pairwise-accidental formula.
inline ScanResult combine_accidental_six(const std::map<std::string, ScanResult>& two_fold,
                                         const std::map<std::string, ScanResult>& four_fold,
                                         double r0, SixMode mode) {
    if (r0 <= 0.0)
        throw std::invalid_argument("combine_accidental_six: R0 must be positive");
    const std::string labels = "ABCDEF";

    auto find2 = [&](char a, char b) -> const ScanResult& {
        std::string key{a, b};
        auto it = two_fold.find(detail::sorted_pattern(key));
        if (it == two_fold.end()) {
            it = two_fold.find(key);
            if (it == two_fold.end())
                throw std::invalid_argument("combine_accidental_six: missing two-fold pattern " + key);
        }
        return it->second;
    };

    const ScanResult& ref = find2('A', 'B');
    ScanResult out;
    out.delays = ref.delays;
    out.unit = ref.unit;
    out.label = mode == SixMode::FourPlusTwo ? "eq6-4+2" : "eq6-2x3";
    out.rates.assign(ref.delays.size(), 0.0);

    auto accidental_four = [&](const std::string& q) {
        return combine_accidental_four(find2(q[0], q[1]), find2(q[2], q[3]),
                                       find2(q[0], q[2]), find2(q[1], q[3]),
                                       find2(q[0], q[3]), find2(q[1], q[2]), r0);
    };

    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            std::string pair{labels[i], labels[j]};
            std::string rest;
            for (char L : labels)
                if (L != labels[i] && L != labels[j])
                    rest += L;
            const ScanResult& r2 = find2(pair[0], pair[1]);
            detail::require_same_grid(ref, r2);
            ScanResult r4;
            if (mode == SixMode::FourPlusTwo) {
                auto it = four_fold.find(detail::sorted_pattern(rest));
                if (it == four_fold.end())
                    throw std::invalid_argument("combine_accidental_six: missing four-fold pattern " + rest);
                r4 = it->second;
            } else {
                r4 = accidental_four(rest);
            }
            detail::require_same_grid(ref, r4);
            for (std::size_t d = 0; d < out.rates.size(); ++d)
                out.rates[d] += r2.rates[d] * r4.rates[d] / r0;
        }
    }
    return out;
}

// Four-photon visibility under imperfect conditions, homogeneous in the
// direct term: V4 = [2 v2 (1 + 3 ea) - v2^2 (1 + ea)] / [3 (1 + ea)].
inline double v4_from_ea(double v2, double ea) {
    if (v2 < 0.0 || v2 > 1.0)
        throw std::invalid_argument("v4_from_ea: v2 must be in [0,1]");
    if (ea < 0.0 || ea > 1.0)
        throw std::invalid_argument("v4_from_ea: ea must be in [0,1]");
    return (2.0 * v2 * (1.0 + 3.0 * ea) - v2 * v2 * (1.0 + ea)) / (3.0 * (1.0 + ea));
}

enum class EAMethod { FromVisibility, FromBaselineRatio, FromPackets };

inline std::string ea_method_name(EAMethod m) {
    switch (m) {
        case EAMethod::FromVisibility: return "from_visibility";
        case EAMethod::FromBaselineRatio: return "from_baseline_ratio";
        case EAMethod::FromPackets: return "from_packets";
    }
    return "?";
}

struct EAEstimate {
    double raw = 0.0;      // as computed, unclamped
    double value = 0.0;    // clamped to [0,1]
    bool clamped = false;
    EAMethod method = EAMethod::FromVisibility;
};

namespace detail {
inline EAEstimate make_ea(double raw, EAMethod method) {
    EAEstimate e;
    e.raw = raw;
    e.value = std::clamp(raw, 0.0, 1.0);
    e.clamped = e.value != raw;
    e.method = method;
    return e;
}
} // namespace detail

// Closed-form inversion of v4_from_ea, linear in ea:
// ea = [3 v4 - v2 (2 - v2)] / [6 v2 - v2^2 - 3 v4].
inline EAEstimate ea_from_v4(double v4, double v2) {
    if (!(v2 > 0.0 && v2 <= 1.0))
        throw std::invalid_argument("ea_from_v4: v2 must be in (0,1]");
    const double den = 6.0 * v2 - v2 * v2 - 3.0 * v4;
    if (std::abs(den) < 1e-12)
        throw std::domain_error("ea_from_v4: v4 sits at the ea->infinity asymptote (infeasible input)");
    return detail::make_ea((3.0 * v4 - v2 * (2.0 - v2)) / den, EAMethod::FromVisibility);
}

// The large-delay plateau of the direct four-fold scan sits a factor
// (1 + E/A) above the accidental combination, so ratio - 1 estimates E/A.
inline EAEstimate ea_from_baseline_ratio(double direct_baseline, double combined_baseline) {
    if (combined_baseline <= 0.0)
        throw std::invalid_argument("ea_from_baseline_ratio: combined baseline must be positive");
    return detail::make_ea(direct_baseline / combined_baseline - 1.0,
                           EAMethod::FromBaselineRatio);
}

inline EAEstimate ea_from_packets(const GaussianPacket& g1, const GaussianPacket& g2) {
    return detail::make_ea(exchange_ratio(g1, g2), EAMethod::FromPackets);
}

struct BackgroundSubtraction {
    ScanResult scan;
    std::vector<std::size_t> clipped; // indices where rate - b fell below zero
};

inline BackgroundSubtraction subtract_background(const ScanResult& scan, double b) {
    detail::check_scan(scan);
    if (b < 0.0)
        throw std::invalid_argument("subtract_background: background must be >= 0");
    BackgroundSubtraction out;
    out.scan = scan;
    for (std::size_t i = 0; i < scan.rates.size(); ++i) {
        const double r = scan.rates[i] - b;
        if (r < 0.0) {
            out.scan.rates[i] = 0.0;
            out.clipped.push_back(i);
        } else {
            out.scan.rates[i] = r;
        }
    }
    return out;
}

// Baseline: mean rate over the outermost delays (|dT| >= 0.9 max |dT|). The
// scan range is expected to extend to >= 10 fitted dip widths so this region
// is interference-free.
inline double baseline_value(const ScanResult& scan) {
    detail::check_scan(scan);
    double maxabs = 0.0;
    for (double d : scan.delays) maxabs = std::max(maxabs, std::abs(d));
    if (maxabs == 0.0)
        throw std::invalid_argument("baseline_value: scan has no nonzero delays");
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < scan.delays.size(); ++i) {
        if (std::abs(scan.delays[i]) >= 0.9 * maxabs) {
            sum += scan.rates[i];
            ++n;
        }
    }
    return sum / n;
}

inline ScanResult convert_scan_unit(ScanResult scan, std::string_view unit) {
    if (unit != "fs" && unit != "um")
        throw std::invalid_argument("scan unit must be fs or um");
    if (scan.unit == unit)
        return scan;
    const double factor = unit == "um" ? kSpeedOfLightUmPerFs : 1.0 / kSpeedOfLightUmPerFs;
    for (double& d : scan.delays) d *= factor;
    scan.unit = unit;
    return scan;
}

inline void write_scan_csv(std::ostream& os, const ScanResult& scan) {
    detail::check_scan(scan);
    os << "# label=" << scan.label << " unit=" << scan.unit << "\n";
    char buf[64];
    for (std::size_t i = 0; i < scan.delays.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", scan.delays[i], scan.rates[i]);
        os << buf;
    }
}

inline ScanResult read_scan_csv(std::istream& is) {
    ScanResult scan;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# label=", 0) != 0)
        throw std::runtime_error("scan CSV: missing '# label=' header");
    const auto unit_pos = line.find(" unit=");
    if (unit_pos == std::string::npos)
        throw std::runtime_error("scan CSV: missing unit tag");
    scan.label = line.substr(8, unit_pos - 8);
    scan.unit = line.substr(unit_pos + 6);
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("scan CSV: malformed row '" + line + "'");
        scan.delays.push_back(std::stod(line.substr(0, comma)));
        scan.rates.push_back(std::stod(line.substr(comma + 1)));
    }
    detail::check_scan(scan);
    return scan;
}

} // namespace noonsim
