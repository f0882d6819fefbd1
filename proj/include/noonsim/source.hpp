#pragma once

// Parametric down-conversion source states for the distinguishability
// scenarios.
//
// Each scenario fixes definite pair emission times. A pair born at time t
// contributes the operator K_t = a^dag_H(g_t) a^dag_V(g_{t+dT}): the two
// photons of a pair share one packet shape, only the H/V delay dT separates
// them. The k-pair sector carries amplitude eta^k / sqrt(k!) times the
// product of the first k pair operators, which reproduces the coefficients
// eta, sqrt(2) eta^2, sqrt(6) eta^3 when all pairs share one packet.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fock.hpp"
#include "temporal.hpp"

namespace noonsim {

enum class ScenarioKind {
    FourXOne,        // 2 pairs, coincident
    TwoXTwo,         // 2 pairs, separated
    SixXOne,         // 3 pairs, coincident
    FourXOnePlusTwo, // 3 pairs: two coincident, one separated
    TwoXThree,       // 3 pairs, mutually separated
    Custom,
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::FourXOne;
    std::vector<double> pair_times; // fs, one entry per pair
    double sigma = 100.0;           // packet width, fs
    double eta = 0.1;               // pair amplitude, |eta|^2 << 1
};

inline int pairs_for_kind(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::FourXOne:
        case ScenarioKind::TwoXTwo: return 2;
        case ScenarioKind::SixXOne:
        case ScenarioKind::FourXOnePlusTwo:
        case ScenarioKind::TwoXThree: return 3;
        case ScenarioKind::Custom: return -1;
    }
    return -1;
}

inline std::string scenario_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::FourXOne: return "four_x_one";
        case ScenarioKind::TwoXTwo: return "two_x_two";
        case ScenarioKind::SixXOne: return "six_x_one";
        case ScenarioKind::FourXOnePlusTwo: return "four_x_one_plus_two";
        case ScenarioKind::TwoXThree: return "two_x_three";
        case ScenarioKind::Custom: return "custom";
    }
    return "custom";
}

inline ScenarioKind scenario_kind_from_name(std::string_view name) {
    if (name == "four_x_one") return ScenarioKind::FourXOne;
    if (name == "two_x_two") return ScenarioKind::TwoXTwo;
    if (name == "six_x_one") return ScenarioKind::SixXOne;
    if (name == "four_x_one_plus_two") return ScenarioKind::FourXOnePlusTwo;
    if (name == "two_x_three") return ScenarioKind::TwoXThree;
    if (name == "custom") return ScenarioKind::Custom;
    throw std::invalid_argument("unknown scenario kind '" + std::string(name) + "'");
}

inline void validate_scenario(const Scenario& s) {
    if (s.sigma <= 0.0)
        throw std::invalid_argument("Scenario: sigma must be positive");
    const int expected = pairs_for_kind(s.kind);
    if (expected > 0 && static_cast<int>(s.pair_times.size()) != expected)
        throw std::invalid_argument("Scenario: pair count does not match kind");
    if (s.pair_times.empty() || s.pair_times.size() > kMaxPhotons / 2)
        throw std::invalid_argument("Scenario: unsupported pair count");
}

// "Well separated" is realized by any separation >= 20 sigma (packet overlap
// below 1e-21, numerically orthogonal).
inline Scenario scenario_build(ScenarioKind kind, double sigma, double separation,
                               double eta = 0.1) {
    if (separation < 0.0)
        throw std::invalid_argument("scenario_build: separation must be >= 0");
    Scenario s;
    s.kind = kind;
    s.sigma = sigma;
    s.eta = eta;
    switch (kind) {
        case ScenarioKind::FourXOne: s.pair_times = {0.0, 0.0}; break;
        case ScenarioKind::TwoXTwo: s.pair_times = {0.0, separation}; break;
        case ScenarioKind::SixXOne: s.pair_times = {0.0, 0.0, 0.0}; break;
        case ScenarioKind::FourXOnePlusTwo: s.pair_times = {0.0, 0.0, separation}; break;
        case ScenarioKind::TwoXThree: s.pair_times = {0.0, separation, 2.0 * separation}; break;
        case ScenarioKind::Custom:
            throw std::invalid_argument("scenario_build: custom scenarios take explicit pair times");
    }
    validate_scenario(s);
    return s;
}

struct SourceState {
    StateVector state;
    std::shared_ptr<const InternalBasis> basis;
    int order = 0;
};

// PDC state over path 0, expanded to the requested pair order, with every
// V photon delayed by dT (the movable fiber arm).
inline SourceState pdc_state(const Scenario& scenario, int order, double delay) {
    validate_scenario(scenario);
    if (order < 1 || order > static_cast<int>(scenario.pair_times.size()))
        throw std::invalid_argument("pdc_state: order exceeds available pairs");

    // Basis spanning the H and V packets of the pairs actually used.
    std::vector<GaussianPacket> packets;
    packets.reserve(2 * static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        const GaussianPacket g{scenario.pair_times[static_cast<std::size_t>(k)], scenario.sigma};
        packets.push_back(g);
        packets.push_back(shift_packet(g, delay));
    }
    auto basis = std::make_shared<const InternalBasis>(packets);

    StateVector state(1, basis);
    state.add_term(Monomial::vacuum(), Complex{1.0, 0.0});

    // Running product of pair operators; sector k gets eta^k / sqrt(k!).
    StateVector::TermMap running{{Monomial::vacuum(), Complex{1.0, 0.0}}};
    for (int k = 1; k <= order; ++k) {
        const Eigen::VectorXd h_coef = basis->expansion(2 * (k - 1));
        const Eigen::VectorXd v_coef = basis->expansion(2 * (k - 1) + 1);
        StateVector::TermMap next;
        for (const auto& [mono, amp] : running) {
            std::vector<std::uint8_t> ids(static_cast<std::size_t>(mono.photon_count()) + 2);
            for (int i = 0; i < mono.photon_count(); ++i)
                ids[static_cast<std::size_t>(i)] = mono.id(i);
            for (int p = 0; p < basis->dimension(); ++p) {
                if (std::abs(h_coef(p)) < 1e-16)
                    continue;
                for (int q = 0; q < basis->dimension(); ++q) {
                    const double c = h_coef(p) * v_coef(q);
                    if (std::abs(c) < 1e-16)
                        continue;
                    ids[ids.size() - 2] = Monomial::encode(0, p); // path 0, H
                    ids[ids.size() - 1] = Monomial::encode(1, q); // path 0, V
                    next[Monomial::from_ids(ids)] += amp * c;
                }
            }
        }
        running = std::move(next);
        const double prefactor =
            std::pow(scenario.eta, k) / std::sqrt(detail::factorial(k));
        for (const auto& [mono, amp] : running)
            state.add_term(mono, prefactor * amp);
    }
    state.prune();
    return SourceState{std::move(state), basis, order};
}

} // namespace noonsim
