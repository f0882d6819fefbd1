// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <noonsim/circuits.hpp>
#include <noonsim/experiment.hpp>
#include <noonsim/fit.hpp>
#include <noonsim/runner.hpp>
#include <noonsim/source.hpp>

#include "helpers.hpp"

using namespace noonsim;
using namespace testutil;

namespace {

constexpr double kSigma = 100.0;
constexpr double kEta = 0.1;

struct Criterion {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok) { pass = pass && ok; }
};

int failures = 0;

void run_criterion(const std::string& name, double time_limit_s,
                   const std::function<void(Criterion&)>& body) {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail << " exception: " << e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > time_limit_s) {
        c.pass = false;
        c.detail << " [exceeded " << time_limit_s << " s budget]";
    }
    if (!c.pass) ++failures;
    std::printf("%s %s (%.2f s)%s\n", name.c_str(), c.pass ? "PASS" : "FAIL", elapsed,
                c.detail.str().c_str());
    std::fflush(stdout);
}

std::map<std::string, ScanResult> scan_map(const Scenario& sc, const Circuit& c,
                                           const std::vector<std::string>& patterns,
                                           const std::vector<double>& delays) {
    std::map<std::string, ScanResult> out;
    for (auto& s : delay_scan_multi(sc, c, patterns, delays))
        out[s.label] = s;
    return out;
}

std::vector<std::string> pair_patterns(const std::string& labels) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            out.push_back({labels[i], labels[j]});
    return out;
}

std::vector<std::string> quad_patterns(const std::string& labels) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            for (std::size_t k = j + 1; k < labels.size(); ++k)
                for (std::size_t l = k + 1; l < labels.size(); ++l)
                    out.push_back({labels[i], labels[j], labels[k], labels[l]});
    return out;
}

} // namespace

int main() {
    const auto delays = grid21();

    // A1: full-fold nullity of the balanced two-mode Fock inputs.
    run_criterion("A1", 1.0, [&](Criterion& c) {
        const StateVector k22 = two_mode_state(4, {0, 0, Complex{1, 0}, 0, 0}, 4);
        const Circuit c4 = preset("noon4");
        const double p4 = coincidence_probability(apply_linear_map(compile(c4), k22),
                                                  detectors_for(c4, "ABCD"));
        const StateVector k33 = two_mode_state(6, {0, 0, 0, Complex{1, 0}, 0, 0, 0}, 6);
        const Circuit c6 = preset("noon6");
        const double p6 = coincidence_probability(apply_linear_map(compile(c6), k33),
                                                  detectors_for(c6, "ABCDEF"));
        c.require(p4 <= 1e-12 && p6 <= 1e-12);
        c.detail << " noon4 |2,2>: " << p4 << ", noon6 |3,3>: " << p6 << " (tol 1e-12)";
    });

    // A2: two-photon classes of the six-fold projector.
    run_criterion("A2", 10.0, [&](Criterion& c) {
        const Circuit c6 = preset("noon6");
        const Scenario sc = scenario_build(ScenarioKind::SixXOne, kSigma, 0.0, kEta);
        const auto scans = scan_map(sc, c6, pair_patterns("ABCDEF"), delays);

        const std::vector<std::pair<std::vector<std::string>, double>> classes = {
            {{"AB", "CD", "EF"}, 1.0},
            {{"AC", "AE", "BD", "BF", "CE", "DF"}, 0.5},
            {{"AD", "BC", "CF", "DE", "AF", "BE"}, -0.5},
        };
        for (const auto& [members, ideal] : classes) {
            const ScanResult& first = scans.at(members.front());
            const double scale = baseline_value(first);
            double max_vis_err = 0.0, max_member_dev = 0.0;
            for (const auto& m : members) {
                max_vis_err = std::max(max_vis_err,
                                       std::abs(visibility_model_free(scans.at(m)) - ideal));
                for (std::size_t i = 0; i < delays.size(); ++i)
                    max_member_dev = std::max(
                        max_member_dev, std::abs(scans.at(m).rates[i] - first.rates[i]) / scale);
            }
            c.require(max_vis_err < 1e-6 && max_member_dev < 1e-10);
            c.detail << " " << members.front() << "-class: vis err " << max_vis_err
                     << ", member dev " << max_member_dev << ";";
        }
    });

    // A3: four-photon classes of the six-fold projector, coincident pairs.
    run_criterion("A3", 120.0, [&](Criterion& c) {
        const Circuit c6 = preset("noon6");
        const Scenario sc = scenario_build(ScenarioKind::FourXOne, kSigma, 0.0, kEta);
        const auto scans = scan_map(sc, c6, quad_patterns("ABCDEF"), delays);

        const std::vector<std::pair<std::vector<std::string>, double>> classes = {
            {{"ABCE", "ABDF", "BCDF", "ACDE", "BDEF", "ACEF"}, 1.0},
            {{"ABCF", "ABDE", "BCDE", "ACDF", "BCEF", "ADEF"}, 1.0 / 3.0},
            {{"ABCD", "ABEF", "CDEF"}, 5.0 / 6.0},
        };
        for (const auto& [members, ideal] : classes) {
            double max_err = 0.0;
            for (const auto& m : members) {
                std::string key = m;
                std::sort(key.begin(), key.end());
                max_err = std::max(max_err,
                                   std::abs(visibility_model_free(scans.at(key)) - ideal));
            }
            c.require(max_err < 1e-6);
            c.detail << " " << members.front() << "-class vis err " << max_err << ";";
        }
    });

    // A4: four-photon scenarios through the four-fold projector.
    run_criterion("A4", 60.0, [&](Criterion& c) {
        const Circuit c4 = preset("noon4");
        const double v_coincident = visibility_model_free(delay_scan(
            scenario_build(ScenarioKind::FourXOne, kSigma, 0.0, kEta), c4, "ABCD", delays));
        const double v_separated = visibility_model_free(delay_scan(
            scenario_build(ScenarioKind::TwoXTwo, kSigma, 6000.0, kEta), c4, "ABCD", delays));
        c.require(std::abs(v_coincident - 1.0) < 1e-6);
        c.require(std::abs(v_separated - 1.0 / 3.0) < 1e-6);
        c.detail << " four_x_one vis " << v_coincident << " (ideal 1), two_x_two vis "
                 << v_separated << " (ideal 1/3)";
    });

    // A5: six-photon scenarios: direct plus both reconstruction modes.
    run_criterion("A5", 600.0, [&](Criterion& c) {
        const Circuit c6 = preset("noon6");
        const Scenario coincident = scenario_build(ScenarioKind::SixXOne, kSigma, 0.0, kEta);

        const double v_direct =
            visibility_model_free(delay_scan(coincident, c6, "ABCDEF", delays));

        const Scenario two_pair = scenario_build(ScenarioKind::FourXOne, kSigma, 0.0, kEta);
        auto two_fold = scan_map(coincident, c6, pair_patterns("ABCDEF"), delays);
        auto four_fold = scan_map(two_pair, c6, quad_patterns("ABCDEF"), delays);

        const double v42 = visibility_model_free(
            combine_accidental_six(two_fold, four_fold, 1.0, SixMode::FourPlusTwo));
        const double v23 = visibility_model_free(
            combine_accidental_six(two_fold, {}, 1.0, SixMode::TwoByThree));

        c.require(std::abs(v_direct - 1.0) < 1e-4);
        c.require(std::abs(v42 - 0.6) < 1e-4);
        c.require(std::abs(v23 - 0.4) < 1e-4);
        c.detail << " six_x_one vis " << v_direct << " (ideal 1), eq6 4+2 vis " << v42
                 << " (ideal 3/5), eq6 2x3 vis " << v23 << " (ideal 2/5)";
    });

    // A6: visibility formula suite.
    run_criterion("A6", 10.0, [&](Criterion& c) {
        c.require(v4_from_ea(1.0, 0.0) == 1.0 / 3.0);
        c.require(v4_from_ea(1.0, 1.0) == 1.0);
        double max_err = 0.0;
        for (int i = 1; i <= 10; ++i) {
            const double v2 = i / 10.0;
            for (int j = 0; j <= 9; ++j) {
                const double x = j / 9.0;
                max_err = std::max(max_err, std::abs(ea_from_v4(v4_from_ea(v2, x), v2).raw - x));
            }
        }
        c.require(max_err < 1e-12);
        c.detail << " v4(1,0) = " << v4_from_ea(1.0, 0.0) << ", v4(1,1) = "
                 << v4_from_ea(1.0, 1.0) << ", round-trip err " << max_err << " (tol 1e-12)";
    });

    // A7: baseline-ratio law, as stated: direct / combined = 1 + exchange_ratio.
    run_criterion("A7", 120.0, [&](Criterion& c) {
        const Circuit c4 = preset("noon4");
        const Scenario one_pair = scenario_build(ScenarioKind::FourXOne, kSigma, 0.0, kEta);
        auto pairs = scan_map(one_pair, c4, pair_patterns("ABCD"), delays);
        const double combined = baseline_value(
            combine_accidental_four(pairs.at("AB"), pairs.at("CD"), pairs.at("AC"),
                                    pairs.at("BD"), pairs.at("AD"), pairs.at("BC"), 1.0));

        const std::vector<std::pair<double, double>> points = {
            {0.0, 6000.0},                 // exchange_ratio 0
            {0.2, 179.41225779941016},     // overlap 0.2^(1/4)
            {0.6561, 91.80872100528414},   // overlap 0.9
            {1.0, 0.0},                    // identical packets
        };
        for (const auto& [x, separation] : points) {
            const Scenario sc = separation == 0.0
                ? scenario_build(ScenarioKind::FourXOne, kSigma, 0.0, kEta)
                : scenario_build(ScenarioKind::TwoXTwo, kSigma, separation, kEta);
            const double direct = baseline_value(delay_scan(sc, c4, "ABCD", delays));
            const double ratio = direct / combined;
            const bool ok = std::abs(ratio - (1.0 + x)) < 1e-6;
            c.require(ok);
            c.detail << " x=" << x << ": ratio " << ratio << " vs " << 1.0 + x
                     << (ok ? "" : " MISMATCH") << ";";
        }
    });

    // A8: accidental combination matches the separated-pair scan pointwise
    // up to one global scale.
    run_criterion("A8", 120.0, [&](Criterion& c) {
        const Circuit c4 = preset("noon4");
        const Scenario separated = scenario_build(ScenarioKind::TwoXTwo, kSigma, 6000.0, kEta);
        auto pairs = scan_map(separated, c4, pair_patterns("ABCD"), delays);
        const ScanResult comb =
            combine_accidental_four(pairs.at("AB"), pairs.at("CD"), pairs.at("AC"),
                                    pairs.at("BD"), pairs.at("AD"), pairs.at("BC"), 1.0);
        const ScanResult direct = delay_scan(separated, c4, "ABCD", delays);

        double scale = 0.0;
        for (std::size_t i = 0; i < delays.size(); ++i)
            scale += comb.rates[i] / direct.rates[i];
        scale /= static_cast<double>(delays.size());

        double max_dev = 0.0;
        for (std::size_t i = 0; i < delays.size(); ++i)
            max_dev = std::max(max_dev,
                               std::abs(comb.rates[i] / (scale * direct.rates[i]) - 1.0));
        c.require(max_dev < 1e-6);
        c.detail << " fitted scale " << scale << ", max pointwise rel dev " << max_dev
                 << " (tol 1e-6)";
    });

    // A9: fit recovery on noiseless synthetic dips.
    run_criterion("A9", 60.0, [&](Criterion& c) {
        double max_fit_err = 0.0, max_mf_err = 0.0;
        for (double v : {1.0 / 3.0, 2.0 / 5.0, 3.0 / 5.0, 5.0 / 6.0, 1.0}) {
            ScanResult scan;
            scan.label = "ABCD";
            const double b = 3.0, w = 140.0;
            for (int i = 0; i <= 40; ++i) {
                const double d = -1500.0 + 75.0 * i;
                scan.delays.push_back(d);
                scan.rates.push_back(b * (1.0 - v * std::exp(-0.5 * d * d / (w * w))));
            }
            const FitResult fr = fit_gaussian_dip(scan);
            max_fit_err = std::max(max_fit_err, std::abs(fr.visibility - v));
            max_mf_err = std::max(max_mf_err, std::abs(visibility_model_free(scan) - v));
        }
        c.require(max_fit_err < 1e-6 && max_mf_err < 1e-9);
        c.detail << " max fit err " << max_fit_err << " (tol 1e-6), max model-free err "
                 << max_mf_err << " (tol 1e-9)";
    });

    // A10: detection completeness for random inputs, summing every
    // one-photon-per-mode coincidence pattern plus the bunched outcomes.
    run_criterion("A10", 60.0, [&](Criterion& c) {
        std::mt19937 rng(101);
        double max_err = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            for (int n_photons : {4, 6}) {
                const Circuit circuit = preset(n_photons == 4 ? "noon4" : "noon6");
                StateVector s = two_mode_state(n_photons, random_coeffs(n_photons + 1, rng),
                                               circuit.n_paths);
                const StateVector out = apply_linear_map(compile(circuit), s);
                const int dim = 2 * circuit.n_paths;

                double total = 0.0;
                std::vector<int> subset(static_cast<std::size_t>(n_photons));
                auto recurse = [&](auto&& self, int start, int depth) -> void {
                    if (depth == n_photons) {
                        std::vector<ExternalMode> dets;
                        for (int e : subset) dets.push_back(ExternalMode::from_index(e));
                        total += coincidence_probability(out, dets);
                        return;
                    }
                    for (int e = start; e < dim; ++e) {
                        subset[static_cast<std::size_t>(depth)] = e;
                        self(self, e + 1, depth + 1);
                    }
                };
                recurse(recurse, 0, 0);
                for (const auto& [fp, p] : occupation_spectrum(out, n_photons)) {
                    bool bunched = false;
                    for (std::size_t i = 1; i < fp.size(); ++i)
                        if (fp[i] == fp[i - 1]) bunched = true;
                    if (bunched)
                        total += p;
                }
                max_err = std::max(max_err,
                                   std::abs(total - out.sector_norm2(n_photons))
                                       / out.sector_norm2(n_photons));
            }
        }
        c.require(max_err < 1e-9);
        c.detail << " max relative completeness err " << max_err << " (tol 1e-9)";
    });

    std::printf("acceptance: %d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
