#pragma once

/**
 * @file
 * GHZ and product probes under phase accumulation and parallel dephasing.
 *
 * Two routes compute the parity signal <X^{(x)N}>:
 *  - a closed form, valid for any N, and
 *  - a dense density-matrix oracle that applies the phase gate and the
 *    single-qubit dephasing Kraus pair literally, capped at kOracleMaxQubits.
 *
 * Phase convention: each qubit acquires the relative phase theta = omega * t
 * between |0> and |1> through diag(e^{-i theta/2}, e^{+i theta/2}), so the
 * GHZ fringe oscillates as cos(N theta).
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "zenometry/csv.hpp"
#include "zenometry/decay_models.hpp"
#include "zenometry/errors.hpp"

namespace zenometry {

inline constexpr int kOracleMaxQubits = 12;

enum class Strategy { Ghz, Product };

inline std::string to_string(Strategy s) { return s == Strategy::Ghz ? "ghz" : "product"; }

inline Strategy parse_strategy(const std::string &text) {
    if (text == "ghz" || text == "GHZ") return Strategy::Ghz;
    if (text == "product") return Strategy::Product;
    throw InputError("unknown strategy '" + text + "' (expected ghz or product)");
}

/// Probe strategy, qubit count and preparation visibility V0 = <P_x> at t = 0.
class ProbeSpec {
  public:
    ProbeSpec(Strategy strategy, int qubits, double visibility = 1.0)
        : strategy_(strategy), qubits_(qubits), visibility_(visibility) {
        if (qubits < 1) throw DomainError("probe needs at least one qubit");
        if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in [0, 1]");
    }

    [[nodiscard]] Strategy strategy() const noexcept { return strategy_; }
    [[nodiscard]] int qubits() const noexcept { return qubits_; }
    [[nodiscard]] double visibility() const noexcept { return visibility_; }

    /// Fringe multiplicity k in cos(k theta): N for GHZ, 1 for each product qubit.
    [[nodiscard]] int fringe_order() const noexcept { return strategy_ == Strategy::Ghz ? qubits_ : 1; }

  private:
    Strategy strategy_;
    int qubits_;
    double visibility_;
};

/// <P_x> as a function of the accumulated single-qubit phase theta = omega * t.
inline double parity_at_phase(const ProbeSpec &spec, const DecayModel &model, double theta, double t) {
    const int k = spec.fringe_order();
    return spec.visibility() * std::exp(-k * gamma_at(model, t)) * std::cos(k * theta);
}

/// Closed-form parity expectation: V0 e^{-N gamma(t)} cos(N omega t) for GHZ,
/// V0 e^{-gamma(t)} cos(omega t) for one qubit of a product ensemble.
inline double parity_expectation_analytic(const ProbeSpec &spec, const DecayModel &model, double omega, double t) {
    return parity_at_phase(spec, model, omega * t, t);
}

using ComplexMatrix = Eigen::MatrixXcd;

/// Hermitian, unit-trace, positive semidefinite operator on N qubits.
/// Basis index bit k (LSB first) is the state of qubit k.
class DensityMatrix {
  public:
    static constexpr double kTraceTolerance = 1e-12;
    static constexpr double kHermitianTolerance = 1e-12;
    static constexpr double kEigenTolerance = 1e-10;

    /// Validating constructor.
    static DensityMatrix from_matrix(ComplexMatrix rho) {
        if (rho.rows() != rho.cols() || rho.rows() < 2 || !std::has_single_bit(static_cast<std::uint64_t>(rho.rows())))
            throw InputError("density matrix must be square with power-of-two dimension");
        const int n = std::countr_zero(static_cast<std::uint64_t>(rho.rows()));
        if (n > kOracleMaxQubits) throw CapacityError("density matrix exceeds the oracle qubit limit");
        if (std::abs(rho.trace() - std::complex<double>(1.0, 0.0)) > kTraceTolerance)
            throw InputError("density matrix trace differs from one");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance)
            throw InputError("density matrix is not Hermitian");
        DensityMatrix dm(std::move(rho), n);
        if (dm.min_eigenvalue() < -kEigenTolerance) throw InputError("density matrix is not positive semidefinite");
        return dm;
    }

    [[nodiscard]] int qubits() const noexcept { return qubits_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return rho_.rows(); }
    [[nodiscard]] const ComplexMatrix &matrix() const noexcept { return rho_; }

    [[nodiscard]] double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho_, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

    /// Debug export: one `row,col,re,im` line per entry.
    void write_csv(std::ostream &out) const {
        out << "row,col,re,im\n";
        for (Eigen::Index r = 0; r < rho_.rows(); ++r)
            for (Eigen::Index c = 0; c < rho_.cols(); ++c)
                out << r << ',' << c << ',' << csv::format(rho_(r, c).real()) << ','
                    << csv::format(rho_(r, c).imag()) << '\n';
    }

  private:
    DensityMatrix(ComplexMatrix rho, int qubits) : rho_(std::move(rho)), qubits_(qubits) {}

    friend DensityMatrix make_density_matrix_unchecked(ComplexMatrix rho, int qubits);

    ComplexMatrix rho_;
    int qubits_;
};

/// For operations that are legal channels by construction.
inline DensityMatrix make_density_matrix_unchecked(ComplexMatrix rho, int qubits) {
    return DensityMatrix(std::move(rho), qubits);
}

/// GHZ state mixed with white noise: v^{N/2} |GHZ><GHZ| + (1 - v^{N/2}) I / 2^N.
struct WhiteNoiseGhzParams {
    int qubits = 1;
    double fusion_visibility = 1.0;

    [[nodiscard]] double state_visibility() const { return std::pow(fusion_visibility, 0.5 * qubits); }
};

inline DensityMatrix ghz_density_matrix(const WhiteNoiseGhzParams &params) {
    if (params.qubits < 1) throw DomainError("GHZ state needs at least one qubit");
    if (params.qubits > kOracleMaxQubits)
        throw CapacityError("GHZ oracle limited to " + std::to_string(kOracleMaxQubits) + " qubits");
    if (!(params.fusion_visibility >= 0.0 && params.fusion_visibility <= 1.0))
        throw DomainError("fusion visibility must lie in [0, 1]");
    const Eigen::Index dim = Eigen::Index{1} << params.qubits;
    const double vis = params.state_visibility();
    ComplexMatrix rho = ComplexMatrix::Identity(dim, dim) * ((1.0 - vis) / static_cast<double>(dim));
    const Eigen::Index all = dim - 1;
    rho(0, 0) += 0.5 * vis;
    rho(0, all) += 0.5 * vis;
    rho(all, 0) += 0.5 * vis;
    rho(all, all) += 0.5 * vis;
    return make_density_matrix_unchecked(std::move(rho), params.qubits);
}

/// Applies the per-qubit phase gate and dephasing channel for time t.
///
/// The dephasing is the Kraus pair K0 = sqrt((1 + e^{-gamma})/2) I,
/// K1 = sqrt((1 - e^{-gamma})/2) Z on every qubit.
inline DensityMatrix evolve_oracle(const DensityMatrix &dm, const DecayModel &model, double omega, double t) {
    if (dm.qubits() > kOracleMaxQubits) throw CapacityError("oracle qubit limit exceeded");
    const double decay = coherence_factor(model, t);
    const double theta = omega * t;
    const Eigen::Index dim = dm.dimension();

    Eigen::VectorXcd phase(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        std::complex<double> u(1.0, 0.0);
        for (int q = 0; q < dm.qubits(); ++q)
            u *= std::polar(1.0, ((i >> q) & 1) ? 0.5 * theta : -0.5 * theta);
        phase(i) = u;
    }
    ComplexMatrix rho = phase.asDiagonal() * dm.matrix() * phase.conjugate().asDiagonal();

    const double p0 = 0.5 * (1.0 + decay);
    const double p1 = 0.5 * (1.0 - decay);
    Eigen::VectorXcd z(dim);
    for (int q = 0; q < dm.qubits(); ++q) {
        for (Eigen::Index i = 0; i < dim; ++i) z(i) = ((i >> q) & 1) ? -1.0 : 1.0;
        ComplexMatrix flipped = z.asDiagonal() * rho * z.asDiagonal();
        rho = p0 * rho + p1 * flipped;
    }
    return make_density_matrix_unchecked(std::move(rho), dm.qubits());
}

/// Tr(rho X^{(x)N}).
inline double parity_expectation_dm(const DensityMatrix &dm) {
    const Eigen::Index dim = dm.dimension();
    const Eigen::Index mask = dim - 1;
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index a = 0; a < dim; ++a) acc += dm.matrix()(a, a ^ mask);
    return acc.real();
}

/// Two-setting GHZ witness: W = 3 - 2[(S_1 + I)/2 + prod_k (S_k + I)/2] with
/// S_1 = X^{(x)N} and S_k = Z_{k-1} Z_k. The Z-stabilizer product projects onto
/// span{|0...0>, |1...1>}.
inline double witness_from_expectations(double parity_x, double p_all_zero, double p_all_one) {
    return 3.0 - 2.0 * (0.5 * (parity_x + 1.0) + p_all_zero + p_all_one);
}

inline double witness_expectation(const DensityMatrix &dm) {
    if (dm.qubits() < 2) throw DomainError("entanglement witness needs at least two qubits");
    const Eigen::Index all = dm.dimension() - 1;
    return witness_from_expectations(parity_expectation_dm(dm), dm.matrix()(0, 0).real(),
                                     dm.matrix()(all, all).real());
}

/// Lower bound (1 - <W>)/2 on the GHZ fidelity, clamped to [0, 1].
inline double fidelity_bound(double witness_value) {
    if (!(witness_value >= -1.0 && witness_value <= 3.0))
        throw DomainError("witness expectation must lie in [-1, 3]");
    return std::clamp(0.5 * (1.0 - witness_value), 0.0, 1.0);
}

} // namespace zenometry
