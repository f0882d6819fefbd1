#pragma once

// Optical-element algebra and preset projection circuits.
//
// A Circuit is an ordered element list over a fixed path count plus a map
// from detector labels (A..F) to output external modes. compile() folds the
// per-element unitaries in application order into one LinearMap over the
// (path, polarization) mode space.

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fock.hpp"

namespace noonsim {

struct BeamSplitter {
    int path_a = 0;
    int path_b = 1;
    double transmissivity = 0.5; // T in (0,1)
};

// Birefringent phase: multiplies the V component of one path by e^{i theta}.
struct PolPhaseShifter {
    int path = 0;
    double theta = 0.0;
};

// Polarization rotation on one path: H -> cos a H + sin a V, V -> -sin a H + cos a V.
struct Rotator {
    int path = 0;
    double angle = std::numbers::pi / 4;
};

// Routes H of path_in to path_h_out and V of path_in to path_v_out, as a
// permutation (transpositions) on dressed external modes.
struct PolarizingSplitter {
    int path_in = 0;
    int path_h_out = 0;
    int path_v_out = 1;
};

using Element = std::variant<BeamSplitter, PolPhaseShifter, Rotator, PolarizingSplitter>;

struct Circuit {
    int n_paths = 1;
    std::vector<Element> elements;
    std::map<char, ExternalMode> detector_labels;
};

struct CompileOptions {
    // Default splitter convention: a -> sqrt(T) a + i sqrt(1-T) b (symmetric
    // i-reflection). The real asymmetric alternative exists so tests can
    // assert that coincidence rates are phase-convention independent.
    enum class BsConvention { SymmetricI, RealAsymmetric } bs = BsConvention::SymmetricI;
    // Equivalent waveplate model acting on H with -theta instead of V with
    // +theta; differs only by a global per-path phase.
    bool phase_on_h = false;
};

namespace detail {

inline void require_path(const Circuit& c, int path, const char* what) {
    if (path < 0 || path >= c.n_paths)
        throw std::out_of_range(std::string(what) + ": path index out of range");
}

inline Eigen::MatrixXcd element_matrix(const Circuit& c, const Element& e,
                                       const CompileOptions& opt) {
    const int dim = 2 * c.n_paths;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim);
    const Complex i1{0.0, 1.0};

    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
        require_path(c, bs->path_a, "BeamSplitter");
        require_path(c, bs->path_b, "BeamSplitter");
        if (bs->path_a == bs->path_b)
            throw std::invalid_argument("BeamSplitter: paths must differ");
        if (!(bs->transmissivity > 0.0 && bs->transmissivity < 1.0))
            throw std::invalid_argument("BeamSplitter: transmissivity must be in (0,1)");
        const double t = std::sqrt(bs->transmissivity);
        const double r = std::sqrt(1.0 - bs->transmissivity);
        for (int pol = 0; pol < 2; ++pol) {
            const int a = 2 * bs->path_a + pol;
            const int b = 2 * bs->path_b + pol;
            if (opt.bs == CompileOptions::BsConvention::SymmetricI) {
                m(a, a) = t; m(b, a) = i1 * r;
                m(a, b) = i1 * r; m(b, b) = t;
            } else {
                m(a, a) = t; m(b, a) = r;
                m(a, b) = r; m(b, b) = -t;
            }
        }
        return m;
    }
    if (const auto* ps = std::get_if<PolPhaseShifter>(&e)) {
        require_path(c, ps->path, "PolPhaseShifter");
        if (opt.phase_on_h)
            m(2 * ps->path, 2 * ps->path) = std::exp(-i1 * ps->theta);
        else
            m(2 * ps->path + 1, 2 * ps->path + 1) = std::exp(i1 * ps->theta);
        return m;
    }
    if (const auto* rt = std::get_if<Rotator>(&e)) {
        require_path(c, rt->path, "Rotator");
        const double cs = std::cos(rt->angle), sn = std::sin(rt->angle);
        const int h = 2 * rt->path, v = 2 * rt->path + 1;
        m(h, h) = cs; m(v, h) = sn;   // column H
        m(h, v) = -sn; m(v, v) = cs;  // column V
        return m;
    }
    const auto& pb = std::get<PolarizingSplitter>(e);
    require_path(c, pb.path_in, "PolarizingSplitter");
    require_path(c, pb.path_h_out, "PolarizingSplitter");
    require_path(c, pb.path_v_out, "PolarizingSplitter");
    if (pb.path_h_out == pb.path_v_out)
        throw std::invalid_argument("PolarizingSplitter: output paths must be distinct");
    auto swap_cols = [&m](int a, int b) {
        if (a != b) m.col(a).swap(m.col(b));
    };
    swap_cols(2 * pb.path_in, 2 * pb.path_h_out);         // H components
    swap_cols(2 * pb.path_in + 1, 2 * pb.path_v_out + 1); // V components
    return m;
}

} // namespace detail

// Product of per-element unitaries, first element applied first.
inline LinearMap compile(const Circuit& c, const CompileOptions& opt = {}) {
    if (c.n_paths < 1 || c.n_paths > kMaxPaths)
        throw std::invalid_argument("compile: path count out of range");
    const int dim = 2 * c.n_paths;
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& e : c.elements)
        total = detail::element_matrix(c, e, opt) * total;
    LinearMap map{std::move(total), false};
    if (!check_unitary(map, 1e-10).pass)
        throw std::runtime_error("compile: compiled map failed the unitarity check");
    return map;
}

// Preset circuits:
//   hom   - PDC pair routed onto a 50:50 splitter in a common polarization,
//           detectors on the two outputs.
//   noon4 - Fig-style four-photon projection: 50:50 split, pi/2 V-phase on
//           path 1, 45-degree rotators and polarizing splitters per arm.
//   noon6 - six-photon projection: three balanced arms (T = 2/3 then 1/2),
//           V-phases 2pi/3 and 4pi/3 on arms 2 and 3.
inline Circuit preset(std::string_view name) {
    using std::numbers::pi;
    Circuit c;
    if (name == "hom") {
        c.n_paths = 2;
        c.elements = {
            PolarizingSplitter{0, 0, 1},
            Rotator{1, pi / 2},
            BeamSplitter{0, 1, 0.5},
        };
        c.detector_labels = {{'A', {0, Pol::H}}, {'B', {1, Pol::H}}};
        return c;
    }
    if (name == "noon4") {
        c.n_paths = 4;
        c.elements = {
            BeamSplitter{0, 1, 0.5},
            PolPhaseShifter{1, pi / 2}, // Q1
            Rotator{0, pi / 4},
            Rotator{1, pi / 4},
            PolarizingSplitter{0, 0, 2},
            PolarizingSplitter{1, 1, 3},
        };
        c.detector_labels = {{'A', {0, Pol::H}}, {'B', {2, Pol::V}},
                             {'C', {1, Pol::H}}, {'D', {3, Pol::V}}};
        return c;
    }
    if (name == "noon6") {
        c.n_paths = 6;
        c.elements = {
            BeamSplitter{0, 1, 2.0 / 3.0}, // equal 1/3 arm intensities
            BeamSplitter{0, 2, 0.5},
            PolPhaseShifter{1, 2 * pi / 3}, // Q2
            PolPhaseShifter{2, 4 * pi / 3}, // Q3
            Rotator{0, pi / 4},
            Rotator{1, pi / 4},
            Rotator{2, pi / 4},
            PolarizingSplitter{0, 0, 3},
            PolarizingSplitter{1, 1, 4},
            PolarizingSplitter{2, 2, 5},
        };
        c.detector_labels = {{'A', {0, Pol::H}}, {'B', {3, Pol::V}},
                             {'C', {1, Pol::H}}, {'D', {4, Pol::V}},
                             {'E', {2, Pol::H}}, {'F', {5, Pol::V}}};
        return c;
    }
    throw std::invalid_argument("preset: unknown circuit name '" + std::string(name) + "'");
}

// Detector label string ("ABCD") to external modes.
inline std::vector<ExternalMode> detectors_for(const Circuit& c, std::string_view labels) {
    std::vector<ExternalMode> out;
    out.reserve(labels.size());
    for (char L : labels) {
        auto it = c.detector_labels.find(L);
        if (it == c.detector_labels.end())
            throw std::invalid_argument(std::string("unknown detector label '") + L + "'");
        out.push_back(it->second);
    }
    return out;
}

} // namespace noonsim
