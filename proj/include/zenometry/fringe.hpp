#pragma once

/**
 * @file
 * Parity fringes: the phase scan of <P_x>, sampled with finite photon counts.
 *
 * Shot model per phase setting: the number of detected events M is
 * Poisson(shots), and the +1 parity outcomes split off as Binomial(M, p+)
 * with p+ = (1 + <P_x>)/2. Every setting draws from its own keyed substream.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "zenometry/csv.hpp"
#include "zenometry/decay_models.hpp"
#include "zenometry/errors.hpp"
#include "zenometry/probes.hpp"
#include "zenometry/random.hpp"

namespace zenometry {

struct FringePoint {
    double theta = 0.0;
    std::int64_t n_plus = 0;
    std::int64_t n_total = 0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    bool missing = false; ///< no events recorded; excluded from fits
    bool clamped = false; ///< estimate clamped to [-1, 1] after rescaling
};

/// Parity fringe for one probe at one interrogation time.
struct FringeDataset {
    Strategy strategy = Strategy::Ghz;
    int qubits = 1;
    double time = 0.0;
    std::optional<double> visibility; ///< generating V0 when known
    double scale = 1.0;               ///< divisor applied to count-derived estimates
    std::vector<FringePoint> points;

    [[nodiscard]] int fringe_order() const noexcept { return strategy == Strategy::Ghz ? qubits : 1; }

    [[nodiscard]] std::size_t usable_points() const noexcept {
        std::size_t n = 0;
        for (const auto &p : points) n += p.missing ? 0 : 1;
        return n;
    }

    /// Checks the dataset invariants: strictly increasing phases, estimates in
    /// [-1, 1] and non-negative standard errors.
    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto &p = points[i];
            if (!std::isfinite(p.theta)) throw InputError("fringe phase must be finite");
            if (i > 0 && !(p.theta > points[i - 1].theta)) throw InputError("fringe phases must be strictly increasing");
            if (p.missing) continue;
            if (!(p.estimate >= -1.0 && p.estimate <= 1.0)) throw InputError("fringe estimate outside [-1, 1]");
            if (!(p.stderr_ >= 0.0)) throw InputError("fringe standard error must be non-negative");
        }
    }
};

/// `count` evenly spaced phases on [lo, hi].
inline std::vector<double> theta_grid(std::size_t count, double lo = 0.0, double hi = std::numbers::pi) {
    if (count < 2) throw InputError("phase grid needs at least two points");
    if (!(hi > lo)) throw InputError("phase grid range must be increasing");
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    grid.back() = hi;
    return grid;
}

/// Estimate and binomial standard error of <P_x> from counts, before rescaling.
inline void fill_from_counts(FringePoint &p, double scale) {
    if (p.n_total <= 0) {
        p.missing = true;
        p.estimate = 0.0;
        p.stderr_ = 0.0;
        return;
    }
    p.missing = false;
    const double m = static_cast<double>(p.n_total);
    const double frac = static_cast<double>(p.n_plus) / m;
    double est = (2.0 * frac - 1.0) / scale;
    p.clamped = est > 1.0 || est < -1.0;
    p.estimate = std::clamp(est, -1.0, 1.0);
    p.stderr_ = 2.0 * std::sqrt(frac * (1.0 - frac) / m) / scale;
}

/// Samples a fringe over `thetas` at interrogation time t. Deterministic in `seed`.
inline FringeDataset sample_fringe(const ProbeSpec &spec, const DecayModel &model, double t,
                                   std::span<const double> thetas, std::int64_t shots_per_setting,
                                   std::uint64_t seed) {
    if (shots_per_setting < 1) throw InputError("shots per setting must be at least one");
    FringeDataset data{spec.strategy(), spec.qubits(), t, spec.visibility(), 1.0, {}};
    data.points.reserve(thetas.size());
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        if (!std::isfinite(thetas[j])) throw InputError("phase values must be finite");
        const double parity = parity_at_phase(spec, model, thetas[j], t);
        const double p_plus = std::clamp(0.5 * (1.0 + parity), 0.0, 1.0);
        Substream rng(seed, streams::fringe, j);
        FringePoint p;
        p.theta = thetas[j];
        p.n_total = rng.poisson(static_cast<double>(shots_per_setting));
        p.n_plus = rng.binomial(p.n_total, p_plus);
        fill_from_counts(p, 1.0);
        data.points.push_back(p);
    }
    data.validate();
    return data;
}

/// Noiseless fringe with exact expectations and a uniform nominal standard error.
inline FringeDataset synthetic_fringe(const ProbeSpec &spec, const DecayModel &model, double t,
                                      std::span<const double> thetas, double nominal_stderr = 1e-3) {
    FringeDataset data{spec.strategy(), spec.qubits(), t, spec.visibility(), 1.0, {}};
    for (double theta : thetas) {
        FringePoint p;
        p.theta = theta;
        p.estimate = parity_at_phase(spec, model, theta, t);
        p.stderr_ = nominal_stderr;
        data.points.push_back(p);
    }
    data.validate();
    return data;
}

/// CSV with header `theta,n_plus,n_total,estimate,stderr`. Missing points carry nan estimates.
inline void write_fringe_csv(std::ostream &out, const FringeDataset &data) {
    out << "theta,n_plus,n_total,estimate,stderr\n";
    for (const auto &p : data.points) {
        out << csv::format(p.theta) << ',' << p.n_plus << ',' << p.n_total << ',';
        if (p.missing) out << "nan,nan\n";
        else out << csv::format(p.estimate) << ',' << csv::format(p.stderr_) << '\n';
    }
}

} // namespace zenometry
