#pragma once

/**
 * @file
 * Beam-displacer (BD) pair realization of dephasing.
 *
 * A BD pair separates the two polarizations of a photon by a transverse
 * distance x0. Tracing out the spatial mode multiplies the polarization
 * coherence by the overlap F(x0) of the mode amplitude with its shifted copy.
 * The 2-D overlap of a separable mode factorizes, so everything here is 1-D
 * along the shift axis.
 */

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "zenometry/csv.hpp"
#include "zenometry/errors.hpp"

namespace zenometry {

/// Calcite thickness (mm) per mm of walk-off times sqrt(2). Calibration constant.
inline constexpr double kBdThicknessPerDisplacement = 9.4103;

/// Beam waist of the collimated Gaussian mode used in the calibration table, in mm.
inline constexpr double kCalibrationBeamWaistMm = 1.05;

class GaussianMode {
  public:
    explicit GaussianMode(double waist) : waist_(waist) {
        if (!std::isfinite(waist) || waist <= 0.0) throw DomainError("beam waist must be finite and positive");
    }
    [[nodiscard]] double waist() const noexcept { return waist_; }

  private:
    double waist_;
};

/// Geometry of one BD pair. Each crystal walks off by d; the two polarizations
/// end up sqrt(2) * d apart.
class BdPairGeometry {
  public:
    explicit BdPairGeometry(double per_bd_displacement) : d_(per_bd_displacement) {
        if (!(d_ >= 0.0) || !std::isfinite(d_)) throw DomainError("BD displacement must be non-negative");
    }
    [[nodiscard]] double per_bd_displacement() const noexcept { return d_; }
    [[nodiscard]] double total_separation() const noexcept { return std::sqrt(2.0) * d_; }

  private:
    double d_;
};

namespace detail {

/// Composite Simpson on a uniform grid; a 3/8 panel closes an odd interval count.
inline double simpson_uniform(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    const std::size_t intervals = n - 1;
    const std::size_t simpson_end = (intervals % 2 == 0) ? n - 1 : n - 4;
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) sum += f[i] + 4.0 * f[i + 1] + f[i + 2];
    sum *= h / 3.0;
    if (simpson_end != n - 1) {
        const std::size_t j = simpson_end;
        sum += 3.0 * h / 8.0 * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
    }
    return sum;
}

} // namespace detail

/// Real 1-D amplitude profile on a uniform grid, normalized so that the
/// integral of |amplitude|^2 is one.
class TabulatedMode {
  public:
    TabulatedMode(double x_start, double spacing, std::vector<double> amplitudes)
        : x_start_(x_start), spacing_(spacing), amplitude_(std::move(amplitudes)) {
        if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw DomainError("grid spacing must be positive");
        if (amplitude_.size() < 3) throw InputError("tabulated mode needs at least three samples");
        std::vector<double> intensity(amplitude_.size());
        for (std::size_t i = 0; i < amplitude_.size(); ++i) {
            if (!std::isfinite(amplitude_[i])) throw InputError("tabulated mode amplitudes must be finite");
            intensity[i] = amplitude_[i] * amplitude_[i];
        }
        const double norm = detail::simpson_uniform(intensity, spacing_);
        if (!(norm > 0.0)) throw InputError("tabulated mode has zero intensity");
        const double scale = 1.0 / std::sqrt(norm);
        for (auto &a : amplitude_) a *= scale;
    }

    /// Samples exp(-x^2 / w^2) on [-half_width, half_width]. Its shifted overlap
    /// is exactly exp(-x0^2 / (2 w^2)).
    static TabulatedMode gaussian(const GaussianMode &mode, double half_width, std::size_t points) {
        if (points < 3) throw InputError("need at least three grid points");
        const double h = 2.0 * half_width / static_cast<double>(points - 1);
        std::vector<double> amp(points);
        const double w = mode.waist();
        for (std::size_t i = 0; i < points; ++i) {
            const double x = -half_width + h * static_cast<double>(i);
            amp[i] = std::exp(-x * x / (w * w));
        }
        return TabulatedMode(-half_width, h, std::move(amp));
    }

    /// Loads `x,amplitude` CSV. Rows must be on a uniform, increasing grid.
    static TabulatedMode load(std::istream &in) {
        const auto table = csv::read_table(in, {"x", "amplitude"});
        if (table.rows.size() < 3) throw ParseError("tabulated mode needs at least three rows");
        const double x0 = table.rows[0][0];
        const double h = table.rows[1][0] - x0;
        if (!(h > 0.0)) throw ParseError("x must be increasing", table.line_numbers[1]);
        std::vector<double> amp;
        amp.reserve(table.rows.size());
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const double expected = x0 + h * static_cast<double>(i);
            if (std::abs(table.rows[i][0] - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
                throw ParseError("x grid is not uniform", table.line_numbers[i]);
            amp.push_back(table.rows[i][1]);
        }
        return TabulatedMode(x0, h, std::move(amp));
    }

    [[nodiscard]] double x_start() const noexcept { return x_start_; }
    [[nodiscard]] double spacing() const noexcept { return spacing_; }
    [[nodiscard]] double support_width() const noexcept {
        return spacing_ * static_cast<double>(amplitude_.size() - 1);
    }
    [[nodiscard]] const std::vector<double> &amplitudes() const noexcept { return amplitude_; }

    /// Linear interpolation; zero outside the sampled support.
    [[nodiscard]] double amplitude_at(double x) const {
        const double u = (x - x_start_) / spacing_;
        if (u < 0.0 || u > static_cast<double>(amplitude_.size() - 1)) return 0.0;
        const auto i = static_cast<std::size_t>(u);
        if (i + 1 >= amplitude_.size()) return amplitude_.back();
        const double frac = u - static_cast<double>(i);
        return amplitude_[i] + frac * (amplitude_[i + 1] - amplitude_[i]);
    }

  private:
    double x_start_;
    double spacing_;
    std::vector<double> amplitude_;
};

/// Total polarization separation produced by a BD pair of calcite thickness ell (mm).
inline double displacement_from_thickness(double thickness_mm) {
    if (!(thickness_mm >= 0.0)) throw DomainError("BD thickness must be non-negative");
    return std::sqrt(2.0) * thickness_mm / kBdThicknessPerDisplacement;
}

/// Closed-form overlap exp(-x0^2 / (2 w^2)) of a Gaussian mode with its shifted copy.
inline double overlap_gaussian(double separation, const GaussianMode &mode) {
    if (!(separation >= 0.0)) throw DomainError("separation must be non-negative");
    const double w = mode.waist();
    return std::exp(-separation * separation / (2.0 * w * w));
}

/// Quadrature of the shifted autocorrelation of a tabulated mode.
inline double overlap_numeric(const TabulatedMode &mode, double separation) {
    if (!std::isfinite(separation) || std::abs(separation) > mode.support_width())
        throw RangeError("shift exceeds the sampled support of the mode");
    const auto &amp = mode.amplitudes();
    std::vector<double> integrand(amp.size());
    for (std::size_t i = 0; i < amp.size(); ++i) {
        const double x = mode.x_start() + mode.spacing() * static_cast<double>(i);
        integrand[i] = amp[i] * mode.amplitude_at(x - separation);
    }
    return detail::simpson_uniform(integrand, mode.spacing());
}

/// Simulated interrogation time t = x0 / w realized by a separation x0.
///
/// Combined with overlap_gaussian the channel realizes exp(-t^2 / 2), i.e.
/// a quadratic decay with coefficient 1/2 in these units.
inline double effective_time(double separation, const GaussianMode &mode) {
    if (!(separation >= 0.0)) throw DomainError("separation must be non-negative");
    return separation / mode.waist();
}

inline std::vector<double> predicted_table_visibilities(std::span<const BdPairGeometry> geometries,
                                                        const GaussianMode &mode) {
    if (geometries.empty()) throw InputError("no BD geometries given");
    std::vector<double> out;
    out.reserve(geometries.size());
    for (const auto &g : geometries) out.push_back(overlap_gaussian(g.total_separation(), mode));
    return out;
}

/// One measured column of the BD calibration table: per-BD displacement and
/// the intensities behind the |+><+| and |-><-| projectors.
struct CalibrationRow {
    double per_bd_displacement;
    double intensity_plus;
    double intensity_minus;

    [[nodiscard]] double measured_visibility() const {
        return (intensity_plus - intensity_minus) / (intensity_plus + intensity_minus);
    }
};

/// Loads the calibration fixture (`d_per_bd,intensity_plus,intensity_minus`).
inline std::vector<CalibrationRow> load_calibration_table(std::istream &in) {
    const auto table = csv::read_table(in, {"d_per_bd", "intensity_plus", "intensity_minus"});
    std::vector<CalibrationRow> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto &r = table.rows[i];
        if (r[0] < 0.0 || r[1] < 0.0 || r[2] < 0.0 || r[1] + r[2] <= 0.0)
            throw ParseError("calibration values must be non-negative with positive total intensity",
                             table.line_numbers[i]);
        rows.push_back({r[0], r[1], r[2]});
    }
    if (rows.empty()) throw ParseError("calibration table has no rows");
    return rows;
}

inline std::vector<CalibrationRow> load_calibration_table_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return load_calibration_table(in);
    } catch (const ParseError &e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace zenometry
