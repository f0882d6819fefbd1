#pragma once

// Shared helpers for the test suite: hand-built states, seeded random
// unitaries, and the standard scan grid used across tests.

#include <cmath>
#include <random>
#include <vector>

#include <noonsim/circuits.hpp>
#include <noonsim/fock.hpp>

namespace testutil {

using namespace noonsim;

// State sum_k coeffs[k] |n-k>_H |k>_V on path 0, single temporal mode,
// embedded in an n_paths mode space.
inline StateVector two_mode_state(int n_photons, const std::vector<Complex>& coeffs,
                                  int n_paths) {
    StateVector s(n_paths, single_mode_basis());
    for (int k = 0; k <= n_photons; ++k) {
        if (k >= static_cast<int>(coeffs.size()) || coeffs[static_cast<std::size_t>(k)] == Complex{})
            continue;
        std::vector<std::uint8_t> ids;
        for (int i = 0; i < n_photons - k; ++i) ids.push_back(Monomial::encode(0, 0)); // H
        for (int i = 0; i < k; ++i) ids.push_back(Monomial::encode(1, 0));             // V
        const double norm = std::sqrt(detail::factorial(n_photons - k) * detail::factorial(k));
        s.add_term(Monomial::from_ids(ids), coeffs[static_cast<std::size_t>(k)] / norm);
    }
    return s;
}

inline std::vector<Complex> random_coeffs(int n, std::mt19937& rng) {
    std::normal_distribution<double> g;
    std::vector<Complex> c(static_cast<std::size_t>(n));
    for (auto& x : c) x = Complex{g(rng), g(rng)};
    return c;
}

inline Eigen::MatrixXcd random_unitary(int dim, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = Complex{g(rng), g(rng)};
    return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

// Standard 21-point grid, -1500 fs .. 1500 fs.
inline std::vector<double> grid21() {
    std::vector<double> d;
    for (int i = 0; i <= 20; ++i) d.push_back(-1500.0 + 150.0 * i);
    return d;
}

// Squared within-pair H/V packet overlap at delay dT.
inline double v2_of(double dT, double sigma = 100.0) {
    const double o = std::exp(-dT * dT / (8.0 * sigma * sigma));
    return o * o;
}

} // namespace testutil
