#pragma once

/**
 * @file
 * Frequency estimation from parity fringes.
 *
 * The estimator is error propagation on the parity signal:
 *
 *     Delta^2 omega * T = (1 - <P_x>^2) / (nu_T |d<P_x>/d omega|^2)
 *
 * where nu_T counts single-probe runs per unit of total time: 1/t for one
 * N-qubit GHZ probe, N/t for N independent qubits. The working point is the
 * first steep flank theta_w = pi / (2k) of cos(k theta).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zenometry/decay_models.hpp"
#include "zenometry/errors.hpp"
#include "zenometry/fringe.hpp"
#include "zenometry/probes.hpp"
#include "zenometry/random.hpp"

namespace zenometry {

// ---------------------------------------------------------------------------
// Optimal interrogation time

/// Root of 2 N t dgamma/dt = 1, the time that minimizes Delta^2 omega T.
inline double optimal_time(const DecayModel &model, int qubits) {
    if (qubits < 1) throw DomainError("qubit count must be at least one");
    const double n = qubits;
    if (model.is_markovian() || model.is_quadratic()) {
        const double c = model.coefficient();
        if (!(c > 0.0)) throw NoOptimumError("noiseless model has no finite optimal time");
        return model.is_markovian() ? 1.0 / (2.0 * n * c) : std::sqrt(1.0 / (4.0 * n * c));
    }
    const auto &tab = std::get<Tabulated>(model.variant());
    const auto condition = [&](double t) { return 2.0 * n * t * dgamma_dt(model, t) - 1.0; };
    double lo = tab.t_max() * 1e-12;
    double hi = tab.t_max() * (1.0 - 1e-12);
    const double f_lo = condition(lo);
    const double f_hi = condition(hi);
    if (f_lo >= 0.0 || f_hi <= 0.0) throw NoOptimumError("optimal time not bracketed by the tabulated range");
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (condition(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Closed-form Delta^2 omega T at the optimal phase, visibility folded in:
/// GHZ 1/(N^2 t V0^2 e^{-2 N gamma}), product 1/(N t V0^2 e^{-2 gamma}).
inline double sensitivity_closed_form(const ProbeSpec &spec, const DecayModel &model, double t) {
    if (!(t > 0.0)) throw DegenerateError("sensitivity diverges at zero interrogation time");
    const double n = spec.qubits();
    const double v2 = spec.visibility() * spec.visibility();
    if (!(v2 > 0.0)) throw DegenerateError("sensitivity diverges at zero visibility");
    const double g = gamma_at(model, t);
    if (spec.strategy() == Strategy::Ghz) return 1.0 / (n * n * t * v2 * std::exp(-2.0 * n * g));
    return 1.0 / (n * t * v2 * std::exp(-2.0 * g));
}

// ---------------------------------------------------------------------------
// Fringe fitting

struct FringeFit {
    double amplitude = 0.0;
    double phase = 0.0; ///< in (-pi, pi]
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
    std::vector<double> residuals; ///< per usable point, data minus model
    int iterations = 0;

    [[nodiscard]] double value_at(double theta, int order) const {
        return amplitude * std::cos(order * theta + phase);
    }
};

/// Gauss-Newton did not converge; carries the last iterate.
class FitError : public Error {
  public:
    FitError(const std::string &what, FringeFit last) : Error(what), last_(std::move(last)) {}
    [[nodiscard]] const FringeFit &last_iterate() const noexcept { return last_; }

  private:
    FringeFit last_;
};

inline constexpr int kFitIterationCap = 100;
inline constexpr double kFitStepTolerance = 1e-10;
inline constexpr double kFitMaxAmplitude = 1.05;

namespace detail {

inline double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    phi = std::fmod(phi, two_pi);
    if (phi <= -std::numbers::pi) phi += two_pi;
    if (phi > std::numbers::pi) phi -= two_pi;
    return phi;
}

struct WeightedPoint {
    double theta;
    double value;
    double weight;
};

inline std::vector<WeightedPoint> usable(const FringeDataset &data) {
    std::vector<WeightedPoint> out;
    for (const auto &p : data.points) {
        if (p.missing) continue;
        // Binomial errors vanish at |estimate| = 1; floor at one count.
        double sigma = p.stderr_;
        if (p.n_total > 0) sigma = std::max(sigma, 1.0 / (static_cast<double>(p.n_total) * data.scale));
        sigma = std::max(sigma, 1e-12);
        out.push_back({p.theta, p.estimate, 1.0 / (sigma * sigma)});
    }
    return out;
}

} // namespace detail

/// Weighted Gauss-Newton fit of A cos(k theta + phi), k the fringe order.
inline FringeFit fit_fringe(const FringeDataset &data) {
    const auto pts = detail::usable(data);
    const int k = data.fringe_order();
    if (pts.size() < 5) throw InputError("fringe fit needs at least five usable points");
    if ((pts.back().theta - pts.front().theta) * k < std::numbers::pi - 1e-12)
        throw InputError("fringe data must span at least half a period");

    FringeFit fit;
    double c = 0.0, s = 0.0;
    for (const auto &p : pts) {
        fit.amplitude = std::max(fit.amplitude, std::abs(p.value));
        c += p.value * std::cos(k * p.theta);
        s += p.value * std::sin(k * p.theta);
    }
    fit.phase = std::atan2(-s, c);

    const auto normal_equations = [&](const FringeFit &f, Eigen::Matrix2d &jtwj, Eigen::Vector2d &jtwr) {
        jtwj.setZero();
        jtwr.setZero();
        for (const auto &p : pts) {
            const double u = k * p.theta + f.phase;
            const Eigen::Vector2d j(std::cos(u), -f.amplitude * std::sin(u));
            const double r = p.value - f.amplitude * std::cos(u);
            jtwj += p.weight * j * j.transpose();
            jtwr += p.weight * r * j;
        }
    };

    Eigen::Matrix2d jtwj;
    Eigen::Vector2d jtwr;
    bool converged = false;
    while (fit.iterations < kFitIterationCap) {
        normal_equations(fit, jtwj, jtwr);
        Eigen::FullPivLU<Eigen::Matrix2d> lu(jtwj);
        if (!lu.isInvertible()) throw FitError("singular normal equations in fringe fit", fit);
        const Eigen::Vector2d step = lu.solve(jtwr);
        fit.amplitude += step(0);
        fit.phase += step(1);
        ++fit.iterations;
        if (step.cwiseAbs().maxCoeff() < kFitStepTolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) throw FitError("fringe fit did not converge", fit);

    if (fit.amplitude < 0.0) {
        fit.amplitude = -fit.amplitude;
        fit.phase += std::numbers::pi;
    }
    fit.phase = detail::wrap_phase(fit.phase);
    if (fit.amplitude > kFitMaxAmplitude) throw FitError("fitted amplitude above physical range", fit);

    normal_equations(fit, jtwj, jtwr);
    fit.covariance = jtwj.inverse();
    fit.residuals.reserve(pts.size());
    for (const auto &p : pts) fit.residuals.push_back(p.value - fit.value_at(p.theta, k));
    return fit;
}

// ---------------------------------------------------------------------------
// Five-point stencil

/// Samples at x - 2h, x - h, x + h, x + 2h. The centre value does not enter.
struct StencilSamples {
    double minus2;
    double minus1;
    double plus1;
    double plus2;
};

/// (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / (12 h); error O(h^4).
inline double stencil_derivative(const StencilSamples &f, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("stencil grid length must be positive");
    for (double v : {f.minus2, f.minus1, f.plus1, f.plus2})
        if (!std::isfinite(v)) throw DomainError("stencil samples must be finite");
    return (-f.plus2 + 8.0 * f.plus1 - 8.0 * f.minus1 + f.minus2) / (12.0 * h);
}

template <class F>
double stencil_derivative(F &&f, double x, double h) {
    return stencil_derivative(StencilSamples{f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h)}, h);
}

/// Default phase step: pi/24, except pi/20 for N = 5 where pi/24 misses pi/10.
inline double default_stencil_step(int qubits) {
    return qubits == 5 ? std::numbers::pi / 20.0 : std::numbers::pi / 24.0;
}

/// Working point pi/(2k) of cos(k theta).
inline double working_phase(int fringe_order) { return std::numbers::pi / (2.0 * fringe_order); }

/// The five phases theta_w + {-2, -1, 0, 1, 2} h a stencil evaluation needs.
inline std::array<double, 5> stencil_phases(int fringe_order, double h) {
    const double w = working_phase(fringe_order);
    return {w - 2.0 * h, w - h, w, w + h, w + 2.0 * h};
}

/// Chain rule d/d omega = t d/d theta for theta = omega t.
inline double derivative_wrt_omega(double dtheta_derivative, double t) { return dtheta_derivative * t; }

// ---------------------------------------------------------------------------
// Sensitivity

enum class DerivativeMethod { Fit, Stencil };

inline std::string to_string(DerivativeMethod m) { return m == DerivativeMethod::Fit ? "fit" : "stencil"; }

struct MonteCarloErrors {
    std::optional<double> amplitude; ///< only for the fit method
    double derivative = 0.0;
    double d2omega_t = 0.0;
    double fisher = 0.0;
    int trials_used = 0;
    int trials_dropped = 0;
};

struct SensitivityResult {
    Strategy strategy = Strategy::Ghz;
    int qubits = 1;
    double t_opt = 0.0;
    double parity = 0.0;     ///< <P_x> at the working point
    double derivative = 0.0; ///< d<P_x>/d omega at the working point
    double d2omega_t = 0.0;  ///< Delta^2 omega * T
    double fisher_per_photon = 0.0;
    std::optional<double> amplitude;
    std::optional<MonteCarloErrors> errors;
};

namespace detail {

inline double runs_per_probe(Strategy s, int qubits) { return s == Strategy::Ghz ? 1.0 : qubits; }

inline SensitivityResult finish_sensitivity(Strategy strategy, int qubits, double t, double parity,
                                            double d_omega) {
    if (!(t > 0.0)) throw DegenerateError("sensitivity diverges at zero interrogation time");
    if (!(std::abs(d_omega) >= 1e-9)) throw DegenerateError("fringe slope indistinguishable from zero");
    SensitivityResult r;
    r.strategy = strategy;
    r.qubits = qubits;
    r.t_opt = t;
    r.parity = parity;
    r.derivative = d_omega;
    const double variance = 1.0 - parity * parity;
    r.d2omega_t = t * variance / (runs_per_probe(strategy, qubits) * d_omega * d_omega);
    r.fisher_per_photon = 1.0 / (qubits * r.d2omega_t);
    return r;
}

inline const FringePoint *find_phase(const FringeDataset &data, double theta) {
    for (const auto &p : data.points)
        if (!p.missing && std::abs(p.theta - theta) <= 1e-9) return &p;
    return nullptr;
}

} // namespace detail

/// Closed-form result at the optimal time and working point.
inline SensitivityResult closed_form_result(const ProbeSpec &spec, const DecayModel &model) {
    const int n = spec.qubits();
    const double t = optimal_time(model, spec.fringe_order());
    const int k = spec.fringe_order();
    const double slope_theta = -k * spec.visibility() * std::exp(-k * gamma_at(model, t));
    auto r = detail::finish_sensitivity(spec.strategy(), n, t, 0.0, derivative_wrt_omega(slope_theta, t));
    r.d2omega_t = sensitivity_closed_form(spec, model, t);
    r.fisher_per_photon = 1.0 / (n * r.d2omega_t);
    r.amplitude = spec.visibility() * std::exp(-k * gamma_at(model, t));
    return r;
}

/// Data-driven sensitivity at interrogation time t.
///
/// `step` overrides the stencil grid length; by default default_stencil_step(N).
inline SensitivityResult sensitivity_from_fringe(const FringeDataset &data, double t, DerivativeMethod method,
                                                 std::optional<double> step = std::nullopt) {
    const int k = data.fringe_order();
    const double theta_w = working_phase(k);
    double parity = 0.0;
    double slope_theta = 0.0;
    std::optional<double> amplitude;
    if (method == DerivativeMethod::Fit) {
        const auto pts = detail::usable(data);
        if (pts.empty() || pts.front().theta > theta_w || pts.back().theta < theta_w)
            throw InputError("fringe does not cover the working point");
        const auto fit = fit_fringe(data);
        const double u = k * theta_w + fit.phase;
        parity = fit.amplitude * std::cos(u);
        slope_theta = -k * fit.amplitude * std::sin(u);
        amplitude = fit.amplitude;
    } else {
        const double h = step.value_or(default_stencil_step(data.qubits));
        const auto phases = stencil_phases(k, h);
        std::array<const FringePoint *, 5> found{};
        for (std::size_t i = 0; i < phases.size(); ++i) {
            found[i] = detail::find_phase(data, phases[i]);
            if (found[i] == nullptr)
                throw InputError("stencil phase " + csv::format(phases[i]) + " not sampled in the fringe");
        }
        parity = found[2]->estimate;
        slope_theta = stencil_derivative(
            StencilSamples{found[0]->estimate, found[1]->estimate, found[3]->estimate, found[4]->estimate}, h);
    }
    auto r = detail::finish_sensitivity(data.strategy, data.qubits, t, parity, derivative_wrt_omega(slope_theta, t));
    r.amplitude = amplitude;
    return r;
}

/// Phase grid for a stencil-ready fringe: `base` merged with the five stencil phases.
inline std::vector<double> with_stencil_phases(std::vector<double> base, int fringe_order, double h) {
    for (double p : stencil_phases(fringe_order, h)) {
        bool present = false;
        for (double b : base) present = present || std::abs(b - p) <= 1e-9;
        if (!present) base.push_back(p);
    }
    std::sort(base.begin(), base.end());
    return base;
}

// ---------------------------------------------------------------------------
// Monte Carlo error bars

inline constexpr int kMinMonteCarloTrials = 100;

namespace detail {
inline double sample_stddev(const std::vector<double> &v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}
} // namespace detail

/// Resamples every setting's +1 and -1 counts from Poisson distributions with
/// the observed counts as means and reports the spread of the sensitivity.
/// Trial i draws from its own substream, so the result does not depend on
/// evaluation order.
inline MonteCarloErrors monte_carlo_errorbar(const FringeDataset &data, double t, int trials, std::uint64_t seed,
                                             DerivativeMethod method = DerivativeMethod::Fit,
                                             std::optional<double> step = std::nullopt) {
    if (trials < kMinMonteCarloTrials)
        throw InputError("Monte Carlo error bars need at least " + std::to_string(kMinMonteCarloTrials) + " trials");
    for (const auto &p : data.points)
        if (!p.missing && p.n_total <= 0) throw InputError("Monte Carlo resampling needs count data");

    std::vector<double> amp, deriv, d2, fisher;
    MonteCarloErrors out;
    for (int trial = 0; trial < trials; ++trial) {
        Substream rng(seed, streams::bootstrap, static_cast<std::uint64_t>(trial));
        FringeDataset resampled = data;
        for (auto &p : resampled.points) {
            if (p.missing) continue;
            const auto plus = rng.poisson(static_cast<double>(p.n_plus));
            const auto minus = rng.poisson(static_cast<double>(p.n_total - p.n_plus));
            p.n_plus = plus;
            p.n_total = plus + minus;
            fill_from_counts(p, data.scale);
        }
        try {
            const auto r = sensitivity_from_fringe(resampled, t, method, step);
            if (r.amplitude) amp.push_back(*r.amplitude);
            deriv.push_back(r.derivative);
            d2.push_back(r.d2omega_t);
            fisher.push_back(r.fisher_per_photon);
            ++out.trials_used;
        } catch (const Error &) {
            ++out.trials_dropped;
        }
    }
    if (out.trials_dropped * 10 > trials)
        throw Error("Monte Carlo error bars: " + std::to_string(out.trials_dropped) + " of " +
                    std::to_string(trials) + " trials failed");
    if (method == DerivativeMethod::Fit) out.amplitude = detail::sample_stddev(amp);
    out.derivative = detail::sample_stddev(deriv);
    out.d2omega_t = detail::sample_stddev(d2);
    out.fisher = detail::sample_stddev(fisher);
    return out;
}

// ---------------------------------------------------------------------------
// Preparation-noise subtraction

/// Divides estimates and standard errors by V0, clamping estimates to [-1, 1].
inline FringeDataset noise_subtract(const FringeDataset &data, double visibility) {
    if (!(visibility > 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in (0, 1]");
    FringeDataset out = data;
    out.scale = data.scale * visibility;
    for (auto &p : out.points) {
        if (p.missing) continue;
        if (p.n_total > 0) {
            fill_from_counts(p, out.scale);
        } else {
            const double est = p.estimate / visibility;
            p.clamped = est > 1.0 || est < -1.0;
            p.estimate = std::clamp(est, -1.0, 1.0);
            p.stderr_ /= visibility;
        }
    }
    return out;
}

} // namespace zenometry
