#pragma once

// Temporal wavepackets and orthonormal internal bases.
//
// A photon's temporal amplitude is modelled as a transform-limited real
// Gaussian g(t) = (2*pi*sigma^2)^(-1/4) * exp(-(t-t0)^2 / (4*sigma^2)),
// normalized so <g|g> = 1. All partial-distinguishability physics enters
// through overlaps of such packets; an InternalBasis orthonormalizes the
// span of every packet in play so the Fock layer can work with discrete,
// orthogonal internal mode indices.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace noonsim {

struct GaussianPacket {
    double t0 = 0.0;     // center time, fs
    double sigma = 100.0; // width parameter, fs

    bool operator==(const GaussianPacket&) const = default;
};

namespace detail {
inline void require_same_width(const GaussianPacket& a, const GaussianPacket& b) {
    if (a.sigma <= 0.0 || b.sigma <= 0.0)
        throw std::invalid_argument("GaussianPacket: sigma must be positive");
    if (std::abs(a.sigma - b.sigma) > 1e-12 * std::abs(a.sigma))
        throw std::invalid_argument("packet overlap requires equal widths");
}
} // namespace detail

// <g1|g2> for equal-width real Gaussians: exp(-(t01-t02)^2 / (8 sigma^2)).
inline double packet_overlap(const GaussianPacket& a, const GaussianPacket& b) {
    detail::require_same_width(a, b);
    const double d = a.t0 - b.t0;
    return std::exp(-d * d / (8.0 * a.sigma * a.sigma));
}

inline GaussianPacket shift_packet(GaussianPacket g, double delay) {
    g.t0 += delay;
    return g;
}

// Pair-exchange weight between two photon pairs riding on packets g1, g2.
// Both the H and the V photon must exchange, each contributing |overlap|^2.
inline double exchange_ratio(const GaussianPacket& a, const GaussianPacket& b) {
    const double o = packet_overlap(a, b);
    return o * o * o * o;
}

// Orthonormal basis for the span of a packet list, built by modified
// Gram-Schmidt in packet-coefficient space. transform() is (dim x n_packets)
// with column j holding packet j's expansion; transform^T * transform
// reproduces the Gram matrix on the span.
class InternalBasis {
public:
    InternalBasis() : InternalBasis(std::vector<GaussianPacket>{GaussianPacket{}}, 1e-9) {}

    explicit InternalBasis(std::vector<GaussianPacket> packets, double rank_tol = 1e-9)
        : packets_(std::move(packets)) {
        if (packets_.empty())
            throw std::invalid_argument("InternalBasis: packet list must be non-empty");
        const int n = static_cast<int>(packets_.size());
        gram_.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                gram_(i, j) = packet_overlap(packets_[i], packets_[j]);

        // Pivoted modified Gram-Schmidt with re-orthogonalization; vectors are
        // kept as coefficient columns over the packets, inner products taken
        // through the Gram matrix. Pivoting on the largest residual keeps the
        // construction stable for ill-conditioned packet sets.
        std::vector<Eigen::VectorXd> q;
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        while (true) {
            int pivot = -1;
            double best = rank_tol;
            for (int j = 0; j < n; ++j) {
                if (used[static_cast<std::size_t>(j)])
                    continue;
                double residual = gram_(j, j);
                for (const auto& u : q) {
                    const double proj = u.dot(gram_.col(j));
                    residual -= proj * proj;
                }
                if (residual > best) {
                    best = residual;
                    pivot = j;
                }
            }
            if (pivot < 0)
                break;
            used[static_cast<std::size_t>(pivot)] = true;
            Eigen::VectorXd v = Eigen::VectorXd::Unit(n, pivot);
            for (int pass = 0; pass < 3; ++pass) {
                for (const auto& u : q)
                    v -= u * (u.dot(gram_ * v));
                v /= std::sqrt(v.dot(gram_ * v));
            }
            q.push_back(v);
        }
        const int dim = static_cast<int>(q.size());
        transform_.resize(dim, n);
        coeffs_.resize(n, dim);
        for (int p = 0; p < dim; ++p) {
            transform_.row(p) = (gram_ * q[static_cast<std::size_t>(p)]).transpose();
            coeffs_.col(p) = q[static_cast<std::size_t>(p)];
        }
    }

    int dimension() const { return static_cast<int>(transform_.rows()); }
    int packet_count() const { return static_cast<int>(packets_.size()); }
    const std::vector<GaussianPacket>& packets() const { return packets_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::MatrixXd& transform() const { return transform_; }

    // Expansion of packet j over the orthonormal basis vectors.
    Eigen::VectorXd expansion(int packet_index) const {
        return transform_.col(packet_index);
    }

    // Basis vector p as a coefficient column over the packets.
    const Eigen::MatrixXd& vector_coeffs() const { return coeffs_; }

    bool operator==(const InternalBasis& other) const {
        return packets_ == other.packets_;
    }

    // True when both bases consist of the same orthonormal temporal modes in
    // the same order, regardless of which packet lists generated them.
    bool same_modes(const InternalBasis& other) const {
        if (dimension() != other.dimension())
            return false;
        const int na = packet_count(), nb = other.packet_count();
        for (const auto& pa : packets_)
            for (const auto& pb : other.packets_)
                if (std::abs(pa.sigma - pb.sigma) > 1e-12 * std::abs(pa.sigma))
                    return false;
        Eigen::MatrixXd cross(na, nb);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < nb; ++j)
                cross(i, j) = packet_overlap(packets_[static_cast<std::size_t>(i)],
                                             other.packets_[static_cast<std::size_t>(j)]);
        const Eigen::MatrixXd pairwise = coeffs_.transpose() * cross * other.coeffs_;
        return (pairwise - Eigen::MatrixXd::Identity(dimension(), dimension()))
                   .cwiseAbs()
                   .maxCoeff() < 1e-10;
    }

private:
    std::vector<GaussianPacket> packets_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd transform_;
    Eigen::MatrixXd coeffs_;
};

inline InternalBasis build_internal_basis(std::vector<GaussianPacket> packets,
                                          double rank_tol = 1e-9) {
    return InternalBasis(std::move(packets), rank_tol);
}

} // namespace noonsim
