#pragma once

// Gaussian dip/bump fitting and model-free visibility extraction.
//
// The fitted model is R(d) = B * (1 - V * exp(-(d - mu)^2 / (2 w^2))) with
// signed visibility: positive V is a dip, negative V a bump. Fitting is
// derivative-free Nelder-Mead simplex descent; the model-free estimate
// (baseline minus center rate over baseline) is the primary extraction and
// the fit supplies width/center and a cross-check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "experiment.hpp"

namespace noonsim {

struct FitResult {
    double baseline = 0.0;     // B, rate units
    double visibility = 0.0;   // V, signed
    double width = 0.0;        // w, delay units
    double center = 0.0;       // mu, delay units
    double rms_residual = 0.0;
    bool converged = false;
    bool degenerate = false;            // flat input, V pinned to 0
    bool visibility_out_of_bound = false; // |V| > 1.05 soft bound
    int iterations = 0;
};

namespace detail {

inline double dip_model(double d, const std::array<double, 4>& p) {
    const double z = (d - p[3]) / p[2];
    return p[0] * (1.0 - p[1] * std::exp(-0.5 * z * z));
}

// Standard Nelder-Mead; converged when the simplex collapses to relative
// spread < 1e-10 in every coordinate. Returns iterations used.
inline int nelder_mead(const std::function<double(const std::array<double, 4>&)>& f,
                       std::array<double, 4>& x, const std::array<double, 4>& step,
                       int max_iter) {
    constexpr int n = 4;
    std::array<std::array<double, 4>, n + 1> v;
    std::array<double, n + 1> fv;
    v[0] = x;
    for (int i = 0; i < n; ++i) {
        v[i + 1] = x;
        v[i + 1][i] += step[i];
    }
    for (int i = 0; i <= n; ++i) fv[i] = f(v[i]);

    auto order = [&]() {
        for (int i = 0; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if (fv[j] < fv[i]) {
                    std::swap(fv[i], fv[j]);
                    std::swap(v[i], v[j]);
                }
    };

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        order();
        double spread = 0.0;
        for (int p = 0; p < n; ++p) {
            const double scale = std::max(std::abs(v[0][p]), 1e-30);
            for (int i = 1; i <= n; ++i)
                spread = std::max(spread, std::abs(v[i][p] - v[0][p]) / scale);
        }
        if (spread < 1e-10)
            break;

        std::array<double, 4> centroid{};
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < n; ++p) centroid[p] += v[i][p] / n;

        auto blend = [&](double t) {
            std::array<double, 4> y;
            for (int p = 0; p < n; ++p) y[p] = centroid[p] + t * (centroid[p] - v[n][p]);
            return y;
        };

        const auto xr = blend(1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            const auto xe = blend(2.0);
            const double fe = f(xe);
            if (fe < fr) { v[n] = xe; fv[n] = fe; }
            else { v[n] = xr; fv[n] = fr; }
        } else if (fr < fv[n - 1]) {
            v[n] = xr; fv[n] = fr;
        } else {
            const auto xc = blend(fr < fv[n] ? 0.5 : -0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[n])) {
                v[n] = xc; fv[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int p = 0; p < n; ++p)
                        v[i][p] = v[0][p] + 0.5 * (v[i][p] - v[0][p]);
                    fv[i] = f(v[i]);
                }
            }
        }
    }
    order();
    x = v[0];
    return iter;
}

} // namespace detail

// Model-free signed visibility (B - R(0)) / B with B the baseline-region mean.
inline double visibility_model_free(const ScanResult& scan) {
    detail::check_scan(scan);
    const double b = baseline_value(scan);
    if (b <= 0.0)
        throw std::invalid_argument("visibility_model_free: baseline is not positive");
    std::size_t center = 0;
    for (std::size_t i = 1; i < scan.delays.size(); ++i)
        if (std::abs(scan.delays[i]) < std::abs(scan.delays[center]))
            center = i;
    double maxabs = 0.0;
    for (double d : scan.delays) maxabs = std::max(maxabs, std::abs(d));
    if (std::abs(scan.delays[center]) > 1e-9 * maxabs)
        throw std::invalid_argument("visibility_model_free: scan must include dT = 0");
    return (b - scan.rates[center]) / b;
}

// Least-squares Gaussian dip/bump fit. Initialization from the data unless an
// explicit (B, V, w, mu) start is given; iteration cap 10000 with one restart
// from a perturbed best point before flagging non-convergence.
inline FitResult fit_gaussian_dip(const ScanResult& scan,
                                  std::optional<std::array<double, 4>> init = std::nullopt) {
    detail::check_scan(scan);
    const std::size_t n = scan.delays.size();
    if (n < 8)
        throw std::invalid_argument("fit_gaussian_dip: need at least 8 points");

    double rmin = scan.rates[0], rmax = scan.rates[0];
    for (double r : scan.rates) { rmin = std::min(rmin, r); rmax = std::max(rmax, r); }

    FitResult result;
    if (rmax - rmin <= 1e-12 * std::max(std::abs(rmax), 1.0)) {
        // Flat data: no feature to fit.
        result.baseline = 0.5 * (rmin + rmax);
        result.visibility = 0.0;
        double span = 0.0;
        for (double d : scan.delays) span = std::max(span, std::abs(d));
        result.width = span > 0 ? span : 1.0;
        result.center = 0.0;
        result.degenerate = true;
        result.converged = true;
        return result;
    }

    std::array<double, 4> p0;
    if (init) {
        p0 = *init;
    } else {
        // B from the outer quartiles of the delay-sorted scan.
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return scan.delays[a] < scan.delays[b]; });
        const std::size_t q = std::max<std::size_t>(1, n / 4);
        double bsum = 0.0;
        for (std::size_t i = 0; i < q; ++i)
            bsum += scan.rates[idx[i]] + scan.rates[idx[n - 1 - i]];
        const double b0 = bsum / (2.0 * q);

        std::size_t ext = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(scan.rates[i] - b0) > std::abs(scan.rates[ext] - b0))
                ext = i;
        const double mu0 = scan.delays[ext];
        const double v0 = (b0 - scan.rates[ext]) / b0;

        // Width from the half-depth span around the extremum.
        const double half = 0.5 * std::abs(scan.rates[ext] - b0);
        double lo = mu0, hi = mu0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(scan.rates[i] - b0) >= half) {
                lo = std::min(lo, scan.delays[i]);
                hi = std::max(hi, scan.delays[i]);
            }
        }
        double w0 = (hi - lo) / (2.0 * std::sqrt(2.0 * std::log(2.0)));
        if (w0 <= 0.0)
            w0 = (scan.delays[idx[n - 1]] - scan.delays[idx[0]]) / 10.0;
        p0 = {b0, v0, w0, mu0};

        double dmin = scan.delays[idx[0]], dmax = scan.delays[idx[n - 1]];
        if (dmin > mu0 - w0 || dmax < mu0 + w0)
            throw std::invalid_argument(
                "fit_gaussian_dip: scan must span at least one width on each side of the extremum");
    }

    const double rate_scale = std::max(std::abs(p0[0]), rmax - rmin);
    auto objective = [&](const std::array<double, 4>& p) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = detail::dip_model(scan.delays[i], p) - scan.rates[i];
            sse += e * e;
        }
        return sse / (n * rate_scale * rate_scale);
    };

    constexpr int cap = 10000;
    std::array<double, 4> p = p0;
    std::array<double, 4> step = {0.05 * std::abs(p0[0]) + 1e-12,
                                  0.1,
                                  0.2 * std::abs(p0[2]) + 1e-12,
                                  0.25 * std::abs(p0[2]) + 1e-12};
    int used = detail::nelder_mead(objective, p, step, cap);
    if (used >= cap) {
        // One restart from a perturbed best-so-far.
        std::array<double, 4> p2 = p;
        for (int i = 0; i < 4; ++i) p2[i] *= 1.02;
        std::array<double, 4> step2 = {0.01 * std::abs(p[0]) + 1e-12, 0.02,
                                       0.05 * std::abs(p[2]) + 1e-12,
                                       0.05 * std::abs(p[2]) + 1e-12};
        const int used2 = detail::nelder_mead(objective, p2, step2, cap);
        if (objective(p2) < objective(p)) p = p2;
        result.converged = used2 < cap;
        result.iterations = used + used2;
    } else {
        result.converged = true;
        result.iterations = used;
    }

    result.baseline = p[0];
    result.visibility = p[1];
    result.width = std::abs(p[2]);
    result.center = p[3];
    result.rms_residual = std::sqrt(objective(p)) * rate_scale;
    result.visibility_out_of_bound = std::abs(result.visibility) > 1.05;
    return result;
}

inline std::string fit_csv_header() {
    return "baseline,visibility,width,center,rms_residual,converged,degenerate";
}

inline std::string fit_csv_row(const FitResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d",
                  r.baseline, r.visibility, r.width, r.center, r.rms_residual,
                  r.converged ? 1 : 0, r.degenerate ? 1 : 0);
    return buf;
}

} // namespace noonsim
