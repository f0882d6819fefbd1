#pragma once

// Exact few-photon state algebra over dressed modes.
//
// A dressed mode is (path, polarization, internal temporal index). States are
// sparse polynomials of creation operators applied to vacuum: each Monomial is
// a canonically sorted multiset of dressed modes, and a monomial with mode
// multiplicities {n_m} represents the un-normalized ket prod a^dag^{n_m} |0>,
// whose squared norm is prod n_m!. Everything downstream (linear-optical
// evolution, post-selected coincidence probabilities, NOON overlaps) reduces
// to bookkeeping on these monomials.

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "temporal.hpp"

namespace noonsim {

using Complex = std::complex<double>;

// Amplitudes below this magnitude are numerical dust and get pruned.
inline constexpr double kAmplitudeTol = 1e-14;

inline constexpr int kMaxPhotons = 8;
inline constexpr int kMaxPaths = 8;
inline constexpr int kMaxInternal = 16;

enum class Pol : std::uint8_t { H = 0, V = 1 };

struct ExternalMode {
    int path = 0;
    Pol pol = Pol::H;

    int index() const { return 2 * path + static_cast<int>(pol); }
    static ExternalMode from_index(int idx) {
        return ExternalMode{idx / 2, static_cast<Pol>(idx % 2)};
    }
    auto operator<=>(const ExternalMode&) const = default;
};

struct DressedMode {
    ExternalMode external;
    int internal = 0;
};

namespace detail {
inline double factorial(int n) {
    static constexpr std::array<double, 13> table = {
        1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800, 39916800, 479001600};
    return table[static_cast<std::size_t>(n)];
}
} // namespace detail

// Canonically sorted multiset of dressed modes. A mode is packed into one byte
// as (external index << 4) | internal, so byte order equals lexicographic
// order on (path, pol, internal). Unused slots are 0xFF.
class Monomial {
public:
    Monomial() { ids_.fill(0xFF); }

    static std::uint8_t encode(int ext_index, int internal) {
        if (ext_index < 0 || ext_index >= 2 * kMaxPaths)
            throw std::out_of_range("Monomial: external mode index out of range");
        if (internal < 0 || internal >= kMaxInternal)
            throw std::out_of_range("Monomial: internal index out of range");
        return static_cast<std::uint8_t>((ext_index << 4) | internal);
    }
    static int ext_of(std::uint8_t id) { return id >> 4; }
    static int internal_of(std::uint8_t id) { return id & 0x0F; }

    static Monomial vacuum() { return Monomial(); }

    static Monomial from_ids(std::span<const std::uint8_t> ids) {
        if (ids.size() > kMaxPhotons)
            throw std::out_of_range("Monomial: more than kMaxPhotons photons");
        Monomial m;
        m.n_ = static_cast<std::uint8_t>(ids.size());
        std::copy(ids.begin(), ids.end(), m.ids_.begin());
        std::sort(m.ids_.begin(), m.ids_.begin() + m.n_);
        return m;
    }

    static Monomial from_modes(std::span<const DressedMode> modes) {
        std::array<std::uint8_t, kMaxPhotons> ids{};
        if (modes.size() > kMaxPhotons)
            throw std::out_of_range("Monomial: more than kMaxPhotons photons");
        for (std::size_t i = 0; i < modes.size(); ++i)
            ids[i] = encode(modes[i].external.index(), modes[i].internal);
        return from_ids(std::span<const std::uint8_t>(ids.data(), modes.size()));
    }

    int photon_count() const { return n_; }
    std::uint8_t id(int i) const { return ids_[static_cast<std::size_t>(i)]; }

    // prod over distinct modes of multiplicity!, i.e. <m|m>.
    double norm2_factor() const {
        double f = 1.0;
        int run = 1;
        for (int i = 1; i < n_; ++i) {
            if (ids_[i] == ids_[i - 1]) {
                ++run;
                f *= run;
            } else {
                run = 1;
            }
        }
        return f;
    }

    std::uint64_t key() const {
        std::uint64_t k = 0;
        for (int i = kMaxPhotons - 1; i >= 0; --i)
            k = (k << 8) | ids_[static_cast<std::size_t>(i)];
        return k;
    }

    bool operator==(const Monomial& other) const {
        return n_ == other.n_ && ids_ == other.ids_;
    }
    bool operator<(const Monomial& other) const {
        return std::tie(n_, ids_) < std::tie(other.n_, other.ids_);
    }

private:
    std::array<std::uint8_t, kMaxPhotons> ids_;
    std::uint8_t n_ = 0;
};

struct MonomialHash {
    std::size_t operator()(const Monomial& m) const {
        std::uint64_t x = m.key() + 0x9e3779b97f4a7c15ULL * (m.photon_count() + 1);
        x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27; x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return static_cast<std::size_t>(x);
    }
};

// Square matrix over external modes (dimension 2 * n_paths), applied to
// creation operators columnwise: a^dag_k -> sum_j matrix(j,k) a^dag_j.
struct LinearMap {
    Eigen::MatrixXcd matrix;
    bool lossy = false; // when set, non-unitary maps are accepted
};

// Immutable after construction in normal use; all operations below are pure.
class StateVector {
public:
    using TermMap = std::unordered_map<Monomial, Complex, MonomialHash>;

    StateVector(int n_paths, std::shared_ptr<const InternalBasis> basis)
        : n_paths_(n_paths), basis_(std::move(basis)) {
        if (n_paths_ < 1 || n_paths_ > kMaxPaths)
            throw std::invalid_argument("StateVector: path count out of range");
        if (!basis_)
            throw std::invalid_argument("StateVector: null internal basis");
        if (basis_->dimension() > kMaxInternal)
            throw std::invalid_argument("StateVector: internal basis too large");
    }

    int n_paths() const { return n_paths_; }
    int internal_dim() const { return basis_->dimension(); }
    const std::shared_ptr<const InternalBasis>& basis() const { return basis_; }
    const TermMap& terms() const { return terms_; }

    void add_term(const Monomial& m, Complex amp) {
        validate(m);
        terms_[m] += amp;
    }

    Complex amplitude(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
    }

    void prune(double tol = kAmplitudeTol) {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (std::abs(it->second) <= tol)
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    double norm2() const {
        double total = 0.0;
        for (const auto& [m, a] : terms_)
            total += std::norm(a) * m.norm2_factor();
        return total;
    }

    double sector_norm2(int n_photons) const {
        double total = 0.0;
        for (const auto& [m, a] : terms_)
            if (m.photon_count() == n_photons)
                total += std::norm(a) * m.norm2_factor();
        return total;
    }

private:
    void validate(const Monomial& m) const {
        for (int i = 0; i < m.photon_count(); ++i) {
            if (Monomial::ext_of(m.id(i)) >= 2 * n_paths_)
                throw std::out_of_range("StateVector: mode path outside declared paths");
            if (Monomial::internal_of(m.id(i)) >= basis_->dimension())
                throw std::out_of_range("StateVector: internal index outside basis");
        }
    }

    int n_paths_;
    std::shared_ptr<const InternalBasis> basis_;
    TermMap terms_;
};

// Shared single-packet basis for states that live in one temporal mode.
inline std::shared_ptr<const InternalBasis> single_mode_basis() {
    static const auto basis = std::make_shared<const InternalBasis>();
    return basis;
}

namespace detail {
inline void require_compatible(const StateVector& a, const StateVector& b) {
    if (a.n_paths() != b.n_paths())
        throw std::invalid_argument("states declared over different path counts");
    if (a.basis() != b.basis() && !a.basis()->same_modes(*b.basis()))
        throw std::invalid_argument("states expressed over different internal bases");
}
} // namespace detail

// Standard bosonic inner product <a|b>; monomials with repeated modes carry
// their prod n_m! normalization.
inline Complex inner_product(const StateVector& a, const StateVector& b) {
    detail::require_compatible(a, b);
    const bool a_smaller = a.terms().size() <= b.terms().size();
    const StateVector& small = a_smaller ? a : b;
    const StateVector& large = a_smaller ? b : a;
    Complex total{0.0, 0.0};
    for (const auto& [m, amp] : small.terms()) {
        const Complex other = large.amplitude(m);
        if (other == Complex{0.0, 0.0})
            continue;
        const Complex product = a_smaller ? std::conj(amp) * other : std::conj(other) * amp;
        total += product * m.norm2_factor();
    }
    return total;
}

struct UnitaryCheck {
    bool pass = false;
    double residual = 0.0;
};

// Max elementwise |M^dag M - I| against tol.
inline UnitaryCheck check_unitary(const LinearMap& m, double tol) {
    if (m.matrix.rows() != m.matrix.cols())
        throw std::invalid_argument("check_unitary: matrix must be square");
    const Eigen::MatrixXcd r = m.matrix.adjoint() * m.matrix
        - Eigen::MatrixXcd::Identity(m.matrix.rows(), m.matrix.cols());
    const double residual = r.cwiseAbs().maxCoeff();
    return UnitaryCheck{residual <= tol, residual};
}

// Substitutes every creation operator a^dag(ext, internal) by
// sum_j matrix(j, ext) a^dag(j, internal), expands and recollects. The
// internal index rides along untouched.
inline StateVector apply_linear_map(const LinearMap& m, const StateVector& s) {
    const int dim = 2 * s.n_paths();
    if (m.matrix.rows() != dim || m.matrix.cols() != dim)
        throw std::invalid_argument("apply_linear_map: matrix dimension does not match mode space");
    if (!m.lossy && !check_unitary(m, 1e-10).pass)
        throw std::invalid_argument("apply_linear_map: map is not unitary (set lossy to force)");

    StateVector out(s.n_paths(), s.basis());

    // Per-column nonzero structure, gathered once.
    std::vector<std::vector<std::pair<int, Complex>>> columns(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
            if (std::abs(m.matrix(r, c)) > 1e-16)
                columns[static_cast<std::size_t>(c)].emplace_back(r, m.matrix(r, c));

    struct Partial {
        std::vector<std::uint8_t> ids;
        Complex amp;
    };

    for (const auto& [mono, amp] : s.terms()) {
        // Group identical dressed modes; (a^dag)^n expands multinomially.
        std::vector<std::pair<std::uint8_t, int>> groups;
        for (int i = 0; i < mono.photon_count(); ++i) {
            if (!groups.empty() && groups.back().first == mono.id(i))
                ++groups.back().second;
            else
                groups.emplace_back(mono.id(i), 1);
        }

        std::vector<Partial> partials{{std::vector<std::uint8_t>{}, amp}};
        for (const auto& [id, count] : groups) {
            const int ext = Monomial::ext_of(id);
            const int internal = Monomial::internal_of(id);
            const auto& col = columns[static_cast<std::size_t>(ext)];

            // Expansion of (sum_j c_j a^dag_j)^count over the column support.
            struct Term {
                std::vector<std::uint8_t> ids;
                Complex coef;
            };
            std::vector<Term> expansion;
            std::vector<int> ks(col.size(), 0);
            auto emit = [&]() {
                double multinom = detail::factorial(count);
                Complex coef{1.0, 0.0};
                std::vector<std::uint8_t> ids;
                ids.reserve(static_cast<std::size_t>(count));
                for (std::size_t j = 0; j < col.size(); ++j) {
                    if (ks[j] == 0)
                        continue;
                    multinom /= detail::factorial(ks[j]);
                    for (int r = 0; r < ks[j]; ++r)
                        coef *= col[j].second;
                    ids.insert(ids.end(), static_cast<std::size_t>(ks[j]),
                               Monomial::encode(col[j].first, internal));
                }
                expansion.push_back({std::move(ids), coef * multinom});
            };
            // Enumerate compositions of count over the support.
            auto recurse = [&](auto&& self, std::size_t idx, int remaining) -> void {
                if (idx + 1 == col.size()) {
                    ks[idx] = remaining;
                    emit();
                    return;
                }
                for (int k = 0; k <= remaining; ++k) {
                    ks[idx] = k;
                    self(self, idx + 1, remaining - k);
                }
            };
            if (col.empty())
                { partials.clear(); break; } // column annihilated by a lossy map
            recurse(recurse, 0, count);

            std::vector<Partial> next;
            next.reserve(partials.size() * expansion.size());
            for (const auto& p : partials)
                for (const auto& t : expansion) {
                    Partial np;
                    np.ids = p.ids;
                    np.ids.insert(np.ids.end(), t.ids.begin(), t.ids.end());
                    np.amp = p.amp * t.coef;
                    next.push_back(std::move(np));
                }
            partials = std::move(next);
        }

        for (const auto& p : partials)
            out.add_term(Monomial::from_ids(p.ids), p.amp);
    }
    out.prune();
    return out;
}

// Occupation footprint: sorted external-mode index per photon.
using Footprint = std::vector<int>;

// Probability (arbitrary units) of each external occupation pattern in the
// n-photon sector, summed incoherently over internal configurations. Slow,
// time-integrating detectors do not resolve the internal index.
inline std::map<Footprint, double> occupation_spectrum(const StateVector& s, int n_photons) {
    std::map<Footprint, double> spectrum;
    for (const auto& [m, amp] : s.terms()) {
        if (m.photon_count() != n_photons)
            continue;
        Footprint fp(static_cast<std::size_t>(n_photons));
        for (int i = 0; i < n_photons; ++i)
            fp[static_cast<std::size_t>(i)] = Monomial::ext_of(m.id(i));
        std::sort(fp.begin(), fp.end());
        spectrum[fp] += std::norm(amp) * m.norm2_factor();
    }
    return spectrum;
}

// Probability that exactly one photon occupies each listed detector mode and
// zero photons occupy every other external mode, restricted to the sector
// with photon number = detectors.size().
inline double coincidence_probability(const StateVector& s,
                                      const std::vector<ExternalMode>& detectors) {
    if (detectors.empty())
        throw std::invalid_argument("coincidence_probability: empty detector list");
    Footprint want;
    want.reserve(detectors.size());
    for (const auto& d : detectors) {
        if (d.index() < 0 || d.index() >= 2 * s.n_paths())
            throw std::out_of_range("coincidence_probability: detector outside mode space");
        want.push_back(d.index());
    }
    std::sort(want.begin(), want.end());
    if (std::adjacent_find(want.begin(), want.end()) != want.end())
        throw std::invalid_argument("coincidence_probability: duplicate detector modes");

    const int n = static_cast<int>(detectors.size());
    double total = 0.0;
    Footprint fp(static_cast<std::size_t>(n));
    for (const auto& [m, amp] : s.terms()) {
        if (m.photon_count() != n)
            continue;
        for (int i = 0; i < n; ++i)
            fp[static_cast<std::size_t>(i)] = Monomial::ext_of(m.id(i));
        // Monomial ids are sorted, so the footprint is already sorted.
        if (fp == want)
            total += std::norm(amp); // all dressed modes distinct: factor 1
    }
    return total;
}

// |<NOON_n|s>|^2 with NOON_n = (|n,0> - |0,n>)/sqrt(2) on path 0 (H/V).
// Only defined for single-temporal-mode states.
inline double noon_overlap(const StateVector& s, int n) {
    if (n < 2)
        throw std::invalid_argument("noon_overlap: photon number must be >= 2");
    if (s.internal_dim() != 1)
        throw std::invalid_argument("noon_overlap: state must live in a single internal mode");

    StateVector noon(s.n_paths(), s.basis());
    std::vector<std::uint8_t> h(static_cast<std::size_t>(n), Monomial::encode(0, 0));
    std::vector<std::uint8_t> v(static_cast<std::size_t>(n), Monomial::encode(1, 0));
    const double scale = 1.0 / std::sqrt(2.0 * detail::factorial(n));
    noon.add_term(Monomial::from_ids(h), Complex{scale, 0.0});
    noon.add_term(Monomial::from_ids(v), Complex{-scale, 0.0});
    return std::norm(inner_product(noon, s));
}

} // namespace noonsim
