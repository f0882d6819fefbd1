#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <noonsim/circuits.hpp>
#include <noonsim/experiment.hpp>

#include "helpers.hpp"

using namespace noonsim;
using namespace testutil;
using Catch::Approx;

namespace {

// Scan computed with explicit compile options (the public delay_scan always
// uses the default convention).
std::vector<double> manual_scan(const Scenario& sc, const Circuit& c, const CompileOptions& opt,
                                const std::string& pattern, const std::vector<double>& delays) {
    const LinearMap map = compile(c, opt);
    const auto dets = detectors_for(c, pattern);
    std::vector<double> out;
    for (double d : delays) {
        SourceState src = pdc_state(sc, order_for_pattern(pattern), d);
        StateVector wide(c.n_paths, src.basis);
        for (const auto& [m, a] : src.state.terms()) wide.add_term(m, a);
        out.push_back(coincidence_probability(apply_linear_map(map, wide), dets));
    }
    return out;
}

std::multiset<int> phase_angles_deg(const Circuit& c, const std::string& labels) {
    const LinearMap map = compile(c);
    std::multiset<int> angles;
    for (char L : labels) {
        const int row = c.detector_labels.at(L).index();
        const Complex z = map.matrix(row, 1) / map.matrix(row, 0);
        int deg = static_cast<int>(std::lround(std::arg(z) * 180.0 / std::numbers::pi));
        angles.insert(((deg % 360) + 360) % 360);
    }
    return angles;
}

} // namespace

TEST_CASE("empty circuit compiles to the identity") {
    Circuit c;
    c.n_paths = 3;
    const LinearMap map = compile(c);
    CHECK((map.matrix - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single balanced splitter has half intensity everywhere in its block") {
    Circuit c;
    c.n_paths = 2;
    c.elements = {BeamSplitter{0, 1, 0.5}};
    const LinearMap map = compile(c);
    for (int pol = 0; pol < 2; ++pol) {
        for (int i : {0, 1})
            for (int j : {0, 1})
                CHECK(std::norm(map.matrix(2 * i + pol, 2 * j + pol)) == Approx(0.5).margin(1e-14));
    }
}

TEST_CASE("presets compile to unitaries") {
    for (const char* name : {"hom", "noon4", "noon6"}) {
        const LinearMap map = compile(preset(name));
        const UnitaryCheck chk = check_unitary(map, 1e-12);
        INFO(name << " residual " << chk.residual);
        CHECK(chk.pass);
    }
}

TEST_CASE("check_unitary reports residuals") {
    LinearMap id{Eigen::MatrixXcd::Identity(4, 4), false};
    const UnitaryCheck ok = check_unitary(id, 1e-10);
    CHECK(ok.pass);
    CHECK(ok.residual == 0.0);

    LinearMap scaled{Eigen::MatrixXcd::Identity(4, 4) * 1.01, false};
    CHECK_FALSE(check_unitary(scaled, 1e-10).pass);
}

TEST_CASE("unknown preset and bad element paths are rejected") {
    CHECK_THROWS_AS(preset("noon8"), std::invalid_argument);
    Circuit c;
    c.n_paths = 2;
    c.elements = {BeamSplitter{0, 5, 0.5}};
    CHECK_THROWS_AS(compile(c), std::out_of_range);
    c.elements = {PolarizingSplitter{0, 1, 1}};
    CHECK_THROWS_AS(compile(c), std::invalid_argument);
}

TEST_CASE("detector projection phases are the roots of unity") {
    CHECK(phase_angles_deg(preset("noon4"), "ABCD")
          == std::multiset<int>{0, 90, 180, 270});
    CHECK(phase_angles_deg(preset("noon6"), "ABCDEF")
          == std::multiset<int>{0, 60, 120, 180, 240, 300});
}

TEST_CASE("full-fold coincidence vanishes for the balanced two-mode Fock input") {
    // |2,2> through the four-photon projector
    const StateVector k22 = two_mode_state(4, {0, 0, Complex{1, 0}, 0, 0}, 4);
    const Circuit c4 = preset("noon4");
    const StateVector out4 = apply_linear_map(compile(c4), k22);
    CHECK(coincidence_probability(out4, detectors_for(c4, "ABCD")) <= 1e-12);

    // |3,3> through the six-photon projector
    const StateVector k33 = two_mode_state(6, {0, 0, 0, Complex{1, 0}, 0, 0, 0}, 6);
    const Circuit c6 = preset("noon6");
    const StateVector out6 = apply_linear_map(compile(c6), k33);
    CHECK(coincidence_probability(out6, detectors_for(c6, "ABCDEF")) <= 1e-12);
}

TEST_CASE("full four-fold rate is proportional to the NOON overlap") {
    const Circuit c4 = preset("noon4");
    const LinearMap map = compile(c4);
    const auto dets = detectors_for(c4, "ABCD");
    std::mt19937 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const StateVector s = two_mode_state(4, random_coeffs(5, rng), 4);
        const double overlap = noon_overlap(s, 4);
        REQUIRE(overlap > 1e-4); // seeds chosen to stay away from the null space
        const double rate = coincidence_probability(apply_linear_map(map, s), dets);
        CHECK(rate / overlap == Approx(3.0 / 16.0).margin(1e-12));
    }
}

TEST_CASE("two-photon equivalence classes of the six-photon projector") {
    const Circuit c6 = preset("noon6");
    const Scenario sc = scenario_build(ScenarioKind::SixXOne, 100.0, 0.0);
    const auto delays = grid21();

    const std::vector<std::vector<std::string>> classes = {
        {"AB", "CD", "EF"},
        {"AC", "AE", "BD", "BF", "CE", "DF"},
        {"AD", "BC", "CF", "DE", "AF", "BE"},
    };
    for (const auto& members : classes) {
        std::vector<std::string> patterns(members.begin(), members.end());
        const auto scans = delay_scan_multi(sc, c6, patterns, delays);
        const double scale = baseline_value(scans.front());
        for (std::size_t m = 1; m < scans.size(); ++m)
            for (std::size_t i = 0; i < delays.size(); ++i) {
                INFO(members[0] << " vs " << members[m] << " at " << delays[i]);
                CHECK(std::abs(scans[m].rates[i] - scans[0].rates[i]) <= 1e-10 * scale);
            }
    }
}

TEST_CASE("swapping the +/- analyzer ports on all arms leaves the six-fold rate invariant") {
    using std::numbers::pi;
    const Circuit c6 = preset("noon6");
    Circuit swapped = c6;
    for (auto& e : swapped.elements)
        if (auto* r = std::get_if<Rotator>(&e))
            r->angle = -pi / 4;

    const Scenario sc = scenario_build(ScenarioKind::SixXOne, 100.0, 0.0);
    const auto delays = grid21();
    const auto a = manual_scan(sc, c6, {}, "ABCDEF", delays);
    const auto b = manual_scan(sc, swapped, {}, "ABCDEF", delays);
    const double scale = *std::max_element(a.begin(), a.end());
    for (std::size_t i = 0; i < delays.size(); ++i)
        CHECK(std::abs(a[i] - b[i]) <= 1e-10 * scale);
}

TEST_CASE("coincidence rates are independent of the splitter reflection convention") {
    const auto delays = grid21();
    CompileOptions real_bs;
    real_bs.bs = CompileOptions::BsConvention::RealAsymmetric;

    const Circuit c4 = preset("noon4");
    const Scenario two_by_two = scenario_build(ScenarioKind::TwoXTwo, 100.0, 6000.0);
    const auto a4 = manual_scan(two_by_two, c4, {}, "ABCD", delays);
    const auto b4 = manual_scan(two_by_two, c4, real_bs, "ABCD", delays);

    const Circuit c6 = preset("noon6");
    const Scenario one_pair = scenario_build(ScenarioKind::SixXOne, 100.0, 0.0);
    for (const char* pattern : {"AB", "AC", "AD"}) {
        const auto a = manual_scan(one_pair, c6, {}, pattern, delays);
        const auto b = manual_scan(one_pair, c6, real_bs, pattern, delays);
        const double scale = *std::max_element(a.begin(), a.end());
        for (std::size_t i = 0; i < delays.size(); ++i)
            CHECK(std::abs(a[i] - b[i]) <= 1e-10 * scale);
    }
    const double scale4 = *std::max_element(a4.begin(), a4.end());
    for (std::size_t i = 0; i < delays.size(); ++i)
        CHECK(std::abs(a4[i] - b4[i]) <= 1e-10 * scale4);
}

TEST_CASE("waveplate phase on H with -theta is equivalent to phase on V") {
    const auto delays = grid21();
    CompileOptions h_phase;
    h_phase.phase_on_h = true;

    const Circuit c6 = preset("noon6");
    const Scenario sc = scenario_build(ScenarioKind::SixXOne, 100.0, 0.0);
    for (const char* pattern : {"AB", "AD", "ABCDEF"}) {
        const auto a = manual_scan(sc, c6, {}, pattern, delays);
        const auto b = manual_scan(sc, c6, h_phase, pattern, delays);
        const double scale = *std::max_element(a.begin(), a.end());
        for (std::size_t i = 0; i < delays.size(); ++i)
            CHECK(std::abs(a[i] - b[i]) <= 1e-10 * scale);
    }
}
