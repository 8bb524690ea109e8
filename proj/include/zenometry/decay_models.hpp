#pragma once

/**
 * @file
 * Dephasing decay exponents gamma(t) and their rates d(gamma)/dt.
 *
 * Off-diagonal coherences of every qubit decay as exp(-gamma(t)). Three
 * families are supported: Markovian (gamma = rate * t), quadratic
 * short-time Zeno decay (gamma = coefficient * t^2) and a tabulated
 * piecewise-linear curve.
 */

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "zenometry/csv.hpp"
#include "zenometry/errors.hpp"

namespace zenometry {

struct Markovian {
    double rate = 1.0; ///< 1/time
};

struct Quadratic {
    double coefficient = 1.0; ///< 1/time^2
};

/// Piecewise-linear gamma(t) through validated samples starting at (0, 0).
class Tabulated {
  public:
    struct Sample {
        double t;
        double gamma;
    };

    explicit Tabulated(std::vector<Sample> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw InputError("tabulated decay needs at least one sample");
        for (const auto &s : samples_)
            if (!std::isfinite(s.t) || !std::isfinite(s.gamma))
                throw InputError("tabulated decay samples must be finite");
        if (samples_.front().t < 0.0) throw InputError("tabulated decay starts before t = 0");
        if (samples_.front().t == 0.0) {
            if (samples_.front().gamma != 0.0) throw InputError("tabulated decay must have gamma(0) = 0");
        } else {
            if (samples_.front().gamma < 0.0) throw InputError("tabulated decay must be non-negative");
            samples_.insert(samples_.begin(), Sample{0.0, 0.0});
        }
        if (samples_.size() < 2) throw InputError("tabulated decay needs a sample beyond t = 0");
        for (std::size_t i = 1; i < samples_.size(); ++i) {
            if (!(samples_[i].t > samples_[i - 1].t))
                throw InputError("tabulated decay times must be strictly increasing");
            if (samples_[i].gamma < samples_[i - 1].gamma)
                throw InputError("tabulated decay gamma must be non-decreasing");
        }
    }

    [[nodiscard]] const std::vector<Sample> &samples() const noexcept { return samples_; }
    [[nodiscard]] double t_max() const noexcept { return samples_.back().t; }

    [[nodiscard]] double gamma(double t) const {
        check_range(t);
        const auto k = segment(t);
        const auto &a = samples_[k];
        const auto &b = samples_[k + 1];
        return a.gamma + (b.gamma - a.gamma) * (t - a.t) / (b.t - a.t);
    }

    [[nodiscard]] double slope(double t) const {
        check_range(t);
        if (!(t > 0.0 && t < t_max()))
            throw RangeError("tabulated decay rate requested at or beyond the sampled boundary");
        const auto k = segment(t);
        if (t == samples_[k].t && k > 0) return 0.5 * (segment_slope(k - 1) + segment_slope(k));
        return segment_slope(k);
    }

  private:
    void check_range(double t) const {
        if (t < 0.0 || std::isnan(t)) throw DomainError("decay evaluated at negative time");
        if (t > t_max()) throw RangeError("tabulated decay evaluated beyond t = " + csv::format(t_max()));
    }

    /// Index k of the segment [t_k, t_{k+1}) holding t; the final knot maps onto the last segment.
    [[nodiscard]] std::size_t segment(double t) const {
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const Sample &s) { return v < s.t; });
        auto k = static_cast<std::size_t>(std::distance(samples_.begin(), it));
        return std::min(k == 0 ? 0 : k - 1, samples_.size() - 2);
    }

    [[nodiscard]] double segment_slope(std::size_t k) const {
        return (samples_[k + 1].gamma - samples_[k].gamma) / (samples_[k + 1].t - samples_[k].t);
    }

    std::vector<Sample> samples_;
};

/// Immutable decay model. Construct through the named factories, which validate.
class DecayModel {
  public:
    using Variant = std::variant<Markovian, Quadratic, Tabulated>;

    static DecayModel markovian(double rate) {
        check_coefficient(rate, "Markovian rate");
        return DecayModel(Markovian{rate});
    }

    static DecayModel quadratic(double coefficient) {
        check_coefficient(coefficient, "quadratic coefficient");
        return DecayModel(Quadratic{coefficient});
    }

    static DecayModel tabulated(std::vector<Tabulated::Sample> samples) {
        return DecayModel(Tabulated(std::move(samples)));
    }

    [[nodiscard]] const Variant &variant() const noexcept { return model_; }

    [[nodiscard]] bool is_markovian() const noexcept { return std::holds_alternative<Markovian>(model_); }
    [[nodiscard]] bool is_quadratic() const noexcept { return std::holds_alternative<Quadratic>(model_); }
    [[nodiscard]] bool is_tabulated() const noexcept { return std::holds_alternative<Tabulated>(model_); }

    /// Rate or coefficient for the closed-form families; NaN for tabulated models.
    [[nodiscard]] double coefficient() const noexcept {
        if (const auto *m = std::get_if<Markovian>(&model_)) return m->rate;
        if (const auto *q = std::get_if<Quadratic>(&model_)) return q->coefficient;
        return std::nan("");
    }

    [[nodiscard]] std::string describe() const {
        if (const auto *m = std::get_if<Markovian>(&model_)) return "markovian(" + csv::format(m->rate) + ")";
        if (const auto *q = std::get_if<Quadratic>(&model_))
            return "quadratic(" + csv::format(q->coefficient) + ")";
        return "tabulated(" + std::to_string(std::get<Tabulated>(model_).samples().size()) + " samples)";
    }

  private:
    explicit DecayModel(Variant v) : model_(std::move(v)) {}

    static void check_coefficient(double value, const char *what) {
        if (!std::isfinite(value) || value < 0.0)
            throw DomainError(std::string(what) + " must be finite and non-negative");
    }

    Variant model_;
};

namespace detail {
inline void check_time(double t) {
    if (!(t >= 0.0)) throw DomainError("decay evaluated at negative time");
    if (!std::isfinite(t)) throw DomainError("decay evaluated at non-finite time");
}
} // namespace detail

/// Decay exponent gamma(t) >= 0.
inline double gamma_at(const DecayModel &model, double t) {
    detail::check_time(t);
    return std::visit(
        [t](const auto &m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, Markovian>) return m.rate * t;
            else if constexpr (std::is_same_v<M, Quadratic>) return m.coefficient * t * t;
            else return m.gamma(t);
        },
        model.variant());
}

/// exp(-gamma(t)), the surviving fraction of single-qubit coherence.
inline double coherence_factor(const DecayModel &model, double t) { return std::exp(-gamma_at(model, t)); }

/// d(gamma)/dt. For tabulated models this is the active segment slope, or the
/// mean of the two adjacent slopes exactly at a knot.
inline double dgamma_dt(const DecayModel &model, double t) {
    detail::check_time(t);
    return std::visit(
        [t](const auto &m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, Markovian>) return m.rate;
            else if constexpr (std::is_same_v<M, Quadratic>) return 2.0 * m.coefficient * t;
            else return m.slope(t);
        },
        model.variant());
}

/// Loads a tabulated model from CSV with header `t,gamma`.
inline DecayModel load_tabulated_decay(std::istream &in) {
    const auto table = csv::read_table(in, {"t", "gamma"});
    std::vector<Tabulated::Sample> samples;
    samples.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto &row = table.rows[i];
        if (!samples.empty() && (row[0] <= samples.back().t || row[1] < samples.back().gamma))
            throw ParseError("non-monotone decay sample", table.line_numbers[i]);
        samples.push_back({row[0], row[1]});
    }
    try {
        return DecayModel::tabulated(std::move(samples));
    } catch (const InputError &e) {
        throw ParseError(e.what());
    }
}

inline DecayModel load_tabulated_decay_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return load_tabulated_decay(in);
}

} // namespace zenometry
