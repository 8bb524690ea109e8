#pragma once

/**
 * @file
 * Scaling-law extraction and scenario comparisons.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "zenometry/decay_models.hpp"
#include "zenometry/errors.hpp"
#include "zenometry/estimation.hpp"
#include "zenometry/probes.hpp"

namespace zenometry {

struct ScalingPoint {
    double qubits;
    double value; ///< Delta^2 omega T
    double stderr_ = 0.0;
};

/// Straight line through log(value) versus log(N).
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    std::vector<double> residuals; ///< in log(value)
};

/// Weighted linear least squares in log-log space.
///
/// Weights come from relative errors (stderr/value). When every stderr is zero
/// the fit is unweighted and the slope error comes from the residual scatter.
inline ScalingFit scaling_fit(std::span<const ScalingPoint> points) {
    if (points.size() < 3) throw InputError("scaling fit needs at least three points");
    std::size_t with_errors = 0;
    for (const auto &p : points) {
        if (!(p.value > 0.0) || !(p.qubits > 0.0)) throw DomainError("scaling fit needs positive N and resolution");
        if (!(p.stderr_ >= 0.0)) throw DomainError("scaling fit standard errors must be non-negative");
        with_errors += p.stderr_ > 0.0 ? 1 : 0;
    }
    const bool weighted = with_errors == points.size();
    if (!weighted && with_errors != 0) throw InputError("scaling fit needs errors on all points or none");

    double s = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto &p : points) {
        const double x = std::log(p.qubits);
        const double y = std::log(p.value);
        const double rel = p.stderr_ / p.value;
        const double w = weighted ? 1.0 / (rel * rel) : 1.0;
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    if (std::all_of(points.begin(), points.end(), [&](const ScalingPoint &p) { return p.qubits == points[0].qubits; }))
        throw InputError("scaling fit needs at least two distinct N");
    const double delta = s * sxx - sx * sx;

    ScalingFit fit;
    fit.slope = (s * sxy - sx * sy) / delta;
    fit.intercept = (sxx * sy - sx * sxy) / delta;
    double rss = 0.0;
    for (const auto &p : points) {
        const double r = std::log(p.value) - (fit.intercept + fit.slope * std::log(p.qubits));
        fit.residuals.push_back(r);
        rss += r * r;
    }
    const double scale = weighted ? 1.0 : rss / static_cast<double>(points.size() - 2);
    fit.slope_stderr = std::sqrt(scale * s / delta);
    fit.intercept_stderr = std::sqrt(scale * sxx / delta);
    return fit;
}

/// SQL, Zeno-limit and Heisenberg-limit resolutions for one N, all anchored at
/// the ideal N = 1 value 2 sqrt(e gamma_N).
struct ReferenceBounds {
    int qubits;
    double sql;
    double zeno;
    double heisenberg;
};

inline double reference_anchor(double quadratic_coefficient) {
    if (!(quadratic_coefficient > 0.0)) throw DomainError("quadratic coefficient must be positive");
    return 2.0 * std::sqrt(std::numbers::e * quadratic_coefficient);
}

/// Bounds through an arbitrary N = 1 anchor value.
inline ReferenceBounds bounds_with_anchor(int qubits, double anchor) {
    if (qubits < 1) throw DomainError("qubit count must be at least one");
    if (!(anchor > 0.0)) throw DomainError("bound anchor must be positive");
    const double n = qubits;
    return {qubits, anchor / n, anchor / (n * std::sqrt(n)), anchor / (n * n)};
}

inline ReferenceBounds reference_bounds(int qubits, double quadratic_coefficient) {
    return bounds_with_anchor(qubits, reference_anchor(quadratic_coefficient));
}

inline std::vector<ReferenceBounds> reference_bounds(std::span<const int> qubit_counts, double quadratic_coefficient) {
    std::vector<ReferenceBounds> out;
    out.reserve(qubit_counts.size());
    for (int n : qubit_counts) out.push_back(reference_bounds(n, quadratic_coefficient));
    return out;
}

/// Inverse-variance ratio of ideal GHZ probes under two decay models, each at
/// its own optimal time: (1/Delta^2)_nm / (1/Delta^2)_m.
inline double relative_resolution(int qubits, const DecayModel &non_markovian, const DecayModel &markovian) {
    const ProbeSpec spec(Strategy::Ghz, qubits, 1.0);
    const double d2_nm = sensitivity_closed_form(spec, non_markovian, optimal_time(non_markovian, qubits));
    const double d2_m = sensitivity_closed_form(spec, markovian, optimal_time(markovian, qubits));
    return d2_m / d2_nm;
}

struct NoiseSweepRow {
    int qubits;
    double ghz;  ///< white-noise GHZ resolution at optimal time and phase
    double sql;
    double zeno;
    double heisenberg;
    bool beats_sql;
};

struct NoiseSweep {
    double fusion_visibility;
    std::vector<NoiseSweepRow> rows;
    std::optional<long> crossing; ///< largest N beating the SQL; empty when v = 1 or never beating
};

namespace detail {
/// log(SQL / GHZ) for white-noise GHZ: positive exactly when the SQL is beaten.
inline double log_advantage(double n, double log_v) { return 0.5 * std::log(n) + n * log_v; }
} // namespace detail

/// Largest integer N with sqrt(N) v^N > 1, found by bisection on the continuous relaxation.
inline std::optional<long> advantage_crossing(double fusion_visibility) {
    if (!(fusion_visibility > 0.0 && fusion_visibility <= 1.0)) throw DomainError("fusion visibility must lie in (0, 1]");
    if (fusion_visibility == 1.0) return std::nullopt;
    const double log_v = std::log(fusion_visibility);
    const double peak = -0.5 / log_v;
    if (detail::log_advantage(std::max(peak, 1.0), log_v) <= 0.0 && detail::log_advantage(2.0, log_v) <= 0.0)
        return std::nullopt;
    double lo = std::max(peak, 1.0);
    double hi = 2.0 * lo + 2.0;
    while (detail::log_advantage(hi, log_v) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (detail::log_advantage(mid, log_v) > 0.0) lo = mid;
        else hi = mid;
    }
    auto n = static_cast<long>(std::floor(lo));
    while (detail::log_advantage(static_cast<double>(n + 1), log_v) > 0.0) ++n;
    while (n >= 2 && detail::log_advantage(static_cast<double>(n), log_v) <= 0.0) --n;
    if (n < 2) return std::nullopt;
    return n;
}

/// Resolution of white-noise GHZ probes, 2 sqrt(e gamma_N) / (N^{3/2} v^N), against the reference bounds.
inline NoiseSweep noise_sweep(double fusion_visibility, std::span<const int> qubit_counts, double quadratic_coefficient) {
    if (!(fusion_visibility > 0.0 && fusion_visibility <= 1.0)) throw DomainError("fusion visibility must lie in (0, 1]");
    NoiseSweep sweep{fusion_visibility, {}, advantage_crossing(fusion_visibility)};
    const double log_v = std::log(fusion_visibility);
    for (int n : qubit_counts) {
        const auto b = reference_bounds(n, quadratic_coefficient);
        // 1/v^N as exp(-N log v): no underflow of v^N, and exactly the Zeno curve at v = 1
        const double ghz = b.zeno * std::exp(-static_cast<double>(n) * log_v);
        sweep.rows.push_back({n, ghz, b.sql, b.zeno, b.heisenberg, ghz < b.sql});
    }
    return sweep;
}

} // namespace zenometry
