#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "zenometry/estimation.hpp"

using namespace zenometry;

namespace {
const double kSqrtE = std::sqrt(std::numbers::e);
}

TEST(Estimation, OptimalTime) {
    EXPECT_DOUBLE_EQ(optimal_time(DecayModel::quadratic(1.0), 1), 0.5);
    EXPECT_NEAR(optimal_time(DecayModel::quadratic(1.0), 6), 0.204124, 1e-6);
    EXPECT_NEAR(optimal_time(DecayModel::markovian(std::exp(-0.5)), 2), 0.412180, 1e-6);
    EXPECT_THROW(optimal_time(DecayModel::quadratic(0.0), 2), NoOptimumError);
    EXPECT_THROW(optimal_time(DecayModel::quadratic(1.0), 0), DomainError);
}

// A finely tabulated t^2 has its optimum where the closed form puts it.
TEST(Estimation, TabulatedOptimalTime) {
    std::vector<Tabulated::Sample> s;
    for (int i = 0; i <= 4000; ++i) {
        const double t = 0.001 * i;
        s.push_back({t, t * t});
    }
    const auto tab = DecayModel::tabulated(s);
    for (int n : {1, 3, 6}) EXPECT_NEAR(optimal_time(tab, n), std::sqrt(1.0 / (4.0 * n)), 1e-3);
    EXPECT_THROW(optimal_time(DecayModel::tabulated({{0.0, 0.0}, {0.1, 0.0001}}), 1), NoOptimumError);
}

// Brute-force minimization of the closed form agrees with optimal_time.
TEST(Estimation, OptimalTimeMinimizesResolution) {
    for (const auto &m : {DecayModel::quadratic(1.3), DecayModel::markovian(0.4)}) {
        for (int n : {1, 2, 5}) {
            const ProbeSpec spec(Strategy::Ghz, n);
            const double t0 = optimal_time(m, n);
            const double best = sensitivity_closed_form(spec, m, t0);
            for (double f : {0.9, 0.99, 1.01, 1.1}) EXPECT_GT(sensitivity_closed_form(spec, m, f * t0), best);
        }
    }
}

TEST(Estimation, ClosedFormExamples) {
    EXPECT_NEAR(sensitivity_closed_form(ProbeSpec(Strategy::Ghz, 1), DecayModel::markovian(1.0), 0.5), 2 * std::numbers::e, 1e-12);
    EXPECT_NEAR(sensitivity_closed_form(ProbeSpec(Strategy::Ghz, 4), DecayModel::quadratic(1.0), 0.25), 2 * kSqrtE / 8, 1e-12);
    EXPECT_NEAR(sensitivity_closed_form(ProbeSpec(Strategy::Product, 4), DecayModel::quadratic(1.0), 0.5), 2 * kSqrtE / 4, 1e-12);
    const auto q = DecayModel::quadratic(1.0);
    const double t = optimal_time(q, 2);
    EXPECT_NEAR(sensitivity_closed_form(ProbeSpec(Strategy::Ghz, 2, 0.9781), q, t),
                sensitivity_closed_form(ProbeSpec(Strategy::Ghz, 2), q, t) / (0.9781 * 0.9781), 1e-12);
    EXPECT_THROW(sensitivity_closed_form(ProbeSpec(Strategy::Ghz, 2), q, 0.0), DegenerateError);
    EXPECT_THROW(sensitivity_closed_form(ProbeSpec(Strategy::Ghz, 2, 0.0), q, 0.3), DegenerateError);
}

TEST(Estimation, FitRecoversNoiselessModel) {
    const auto grid = theta_grid(25);
    const ProbeSpec spec(Strategy::Ghz, 3, 0.8);
    const auto data = synthetic_fringe(spec, DecayModel::quadratic(1.0), 0.0, grid);
    const auto fit = fit_fringe(data);
    EXPECT_NEAR(fit.amplitude, 0.8, 1e-10);
    EXPECT_NEAR(fit.phase, 0.0, 1e-10);
    EXPECT_LE(fit.iterations, kFitIterationCap);
}

TEST(Estimation, FitPhaseOffset) {
    FringeDataset d;
    d.qubits = 2;
    for (double th : theta_grid(30)) d.points.push_back({th, 0, 0, 0.6 * std::cos(2 * th - 0.7), 1e-3});
    const auto fit = fit_fringe(d);
    EXPECT_NEAR(fit.amplitude, 0.6, 1e-10);
    EXPECT_NEAR(fit.phase, -0.7, 1e-10);
    // negative amplitude start is folded into the phase
    for (auto &p : d.points) p.estimate = -p.estimate;
    const auto flipped = fit_fringe(d);
    EXPECT_NEAR(flipped.amplitude, 0.6, 1e-10);
    EXPECT_NEAR(std::cos(flipped.phase), std::cos(-0.7 + std::numbers::pi), 1e-9);
}

TEST(Estimation, FitOnSampledData) {
    const ProbeSpec spec(Strategy::Ghz, 1, 0.9776);
    const auto data = sample_fringe(spec, DecayModel::quadratic(1.0), 0.0, theta_grid(25), 1000000, 3);
    EXPECT_NEAR(fit_fringe(data).amplitude, 0.9776, 0.002);
}

TEST(Estimation, FitSkipsMissingPoint) {
    const ProbeSpec spec(Strategy::Ghz, 2, 0.9);
    auto data = sample_fringe(spec, DecayModel::quadratic(1.0), 0.2, theta_grid(25), 100000, 8);
    data.points[7].n_plus = data.points[7].n_total = 0;
    fill_from_counts(data.points[7], 1.0);
    const auto fit = fit_fringe(data);
    EXPECT_EQ(fit.residuals.size(), 24u);
    EXPECT_NEAR(fit.amplitude, 0.9 * std::exp(-2 * 0.04), 0.01);
}

TEST(Estimation, FitRejectsThinData) {
    FringeDataset d;
    d.qubits = 1;
    for (double th : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}) d.points.push_back({th, 0, 0, std::cos(th), 1e-3});
    EXPECT_THROW(fit_fringe(d), InputError);
    d.points.resize(4);
    EXPECT_THROW(fit_fringe(d), InputError);
}

TEST(Estimation, StencilExamples) {
    EXPECT_NEAR(stencil_derivative([](double x) { return x * x; }, 0.3, 0.1), 0.6, 1e-15);
    const double h = std::numbers::pi / 24;
    EXPECT_LE(std::abs(stencil_derivative([](double x) { return std::cos(x); }, std::numbers::pi / 2, h) + 1.0), std::pow(h, 4) / 30);
    EXPECT_LE(std::abs(stencil_derivative([](double x) { return std::cos(6 * x); }, std::numbers::pi / 12, h) + 6.0),
              std::pow(6.0, 5) * std::pow(h, 4) / 30);
    EXPECT_THROW(stencil_derivative(StencilSamples{1, 2, 3, 4}, 0.0), DomainError);
}

TEST(Estimation, StencilExactOnQuartics) {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double a0 = c(gen), a1 = c(gen), a2 = c(gen), a3 = c(gen), a4 = c(gen), x = c(gen);
        const double h = 0.01 + 0.2 * std::abs(c(gen));
        const auto f = [&](double u) { return a0 + u * (a1 + u * (a2 + u * (a3 + u * a4))); };
        const double exact = a1 + x * (2 * a2 + x * (3 * a3 + x * 4 * a4));
        EXPECT_NEAR(stencil_derivative(f, x, h), exact, 1e-12 * std::max(1.0, std::abs(exact)) * 10);
    }
}

TEST(Estimation, StencilGridsHitWorkingPoints) {
    // every stencil phase lands on or is merged into the default grid
    for (int n = 1; n <= 6; ++n) {
        const auto grid = with_stencil_phases(theta_grid(25), n, default_stencil_step(n));
        for (double p : stencil_phases(n, default_stencil_step(n))) {
            bool found = false;
            for (double g : grid) found = found || std::abs(g - p) < 1e-9;
            EXPECT_TRUE(found);
        }
    }
    // pi/24 is already on the 25-point grid, so N = 1..4 and 6 need no extra points
    for (int n : {1, 2, 3, 4, 6}) EXPECT_EQ(with_stencil_phases(theta_grid(25), n, default_stencil_step(n)).size(), 25u);
}

TEST(Estimation, ChainRule) {
    const double a = std::exp(-4 * 0.0625);
    EXPECT_DOUBLE_EQ(derivative_wrt_omega(-4 * a, 0.25), -4 * a * 0.25);
    EXPECT_EQ(derivative_wrt_omega(0.0, 0.7), 0.0);
    const ProbeSpec spec(Strategy::Ghz, 1);
    const auto r = closed_form_result(spec, DecayModel::quadratic(1.0));
    EXPECT_NEAR(std::abs(r.derivative), 0.389400, 1e-6);
}

TEST(Estimation, SensitivityFromFringeBothMethods) {
    const auto q = DecayModel::quadratic(1.0);
    for (int n : {1, 4}) {
        const ProbeSpec spec(Strategy::Ghz, n);
        const double t = optimal_time(q, n);
        const auto grid = with_stencil_phases(theta_grid(25), n, default_stencil_step(n));
        const auto data = synthetic_fringe(spec, q, t, grid);
        const auto fit = sensitivity_from_fringe(data, t, DerivativeMethod::Fit);
        const double ideal = std::sqrt(double(n)) / (2 * kSqrtE);
        EXPECT_NEAR(fit.fisher_per_photon, ideal, 1e-9);
        const auto st = sensitivity_from_fringe(data, t, DerivativeMethod::Stencil);
        EXPECT_NEAR(st.fisher_per_photon, ideal, 1e-2 * ideal);
    }
    EXPECT_NEAR(closed_form_result(ProbeSpec(Strategy::Ghz, 4), q).fisher_per_photon, 0.60653, 1e-5);
    EXPECT_NEAR(closed_form_result(ProbeSpec(Strategy::Ghz, 1), q).fisher_per_photon, 0.30327, 1e-5);
}

TEST(Estimation, StencilNeedsItsPhases) {
    const ProbeSpec spec(Strategy::Ghz, 5);
    const auto q = DecayModel::quadratic(1.0);
    const auto data = synthetic_fringe(spec, q, 0.2, theta_grid(7));
    EXPECT_THROW(sensitivity_from_fringe(data, 0.2, DerivativeMethod::Stencil), InputError);
}

TEST(Estimation, ProductStrategySql) {
    const auto q = DecayModel::quadratic(1.0);
    for (int n : {1, 3, 6}) {
        const ProbeSpec spec(Strategy::Product, n);
        const double t = optimal_time(q, 1);
        const auto r = sensitivity_from_fringe(synthetic_fringe(spec, q, t, theta_grid(25)), t, DerivativeMethod::Fit);
        EXPECT_NEAR(r.fisher_per_photon, 1 / (2 * kSqrtE), 1e-9);
    }
}

TEST(Estimation, MonteCarloScale) {
    const auto q = DecayModel::quadratic(1.0);
    const ProbeSpec spec(Strategy::Ghz, 2);
    const double t = optimal_time(q, 2);
    const auto grid = theta_grid(25);
    const auto d1 = sample_fringe(spec, q, t, grid, 1000000, 77);
    const auto e1 = monte_carlo_errorbar(d1, t, 1000, 5);
    EXPECT_LE(e1.fisher, 0.005);
    EXPECT_EQ(e1.trials_used, 1000);

    const auto d2 = sample_fringe(spec, q, t, grid, 2000000, 77);
    const auto e2 = monte_carlo_errorbar(d2, t, 1000, 5);
    EXPECT_NEAR(e2.fisher / e1.fisher, 1 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));

    const auto again = monte_carlo_errorbar(d1, t, 1000, 5);
    EXPECT_EQ(again.fisher, e1.fisher);
    EXPECT_EQ(*again.amplitude, *e1.amplitude);
    EXPECT_THROW(monte_carlo_errorbar(d1, t, 50, 5), InputError);
}

TEST(Estimation, MonteCarloMatchesPropagatedError) {
    // For one fitted amplitude the bootstrap spread matches the fit covariance.
    const auto q = DecayModel::quadratic(1.0);
    const ProbeSpec spec(Strategy::Ghz, 3, 0.9);
    const double t = optimal_time(q, 3);
    const auto data = sample_fringe(spec, q, t, theta_grid(25), 500000, 31);
    const auto fit = fit_fringe(data);
    const auto e = monte_carlo_errorbar(data, t, 400, 2);
    EXPECT_NEAR(*e.amplitude, std::sqrt(fit.covariance(0, 0)), 0.2 * std::sqrt(fit.covariance(0, 0)));
}

TEST(Estimation, NoiseSubtract) {
    FringeDataset d;
    d.points.push_back({0.0, 0, 0, 0.45, 0.01});
    const auto s = noise_subtract(d, 0.9);
    EXPECT_NEAR(s.points[0].estimate, 0.5, 1e-15);
    EXPECT_NEAR(s.points[0].stderr_, 0.01 / 0.9, 1e-15);
    const auto same = noise_subtract(d, 1.0);
    EXPECT_EQ(same.points[0].estimate, 0.45);
    EXPECT_THROW(noise_subtract(d, 0.0), DomainError);

    d.points[0].estimate = 0.95;
    EXPECT_TRUE(noise_subtract(d, 0.9).points[0].clamped);
}

TEST(Estimation, NoiseSubtractRecoversDecay) {
    const auto q = DecayModel::quadratic(1.0);
    for (int n : {2, 5}) {
        const ProbeSpec spec(Strategy::Ghz, n, 0.85);
        const double t = optimal_time(q, n);
        const auto data = sample_fringe(spec, q, t, theta_grid(25), 1000000, 90 + n);
        const auto fit = fit_fringe(noise_subtract(data, 0.85));
        EXPECT_NEAR(fit.amplitude, std::exp(-n * gamma_at(q, t)), 4 * std::sqrt(fit.covariance(0, 0)));
    }
}

// Fringe data sampled on any grid satisfies the dataset invariants, and
// the fitted amplitude never leaves its bound.
TEST(Estimation, PropertyRandomFringes) {
    std::mt19937_64 gen(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        const int n = 1 + static_cast<int>(u(gen) * 6);
        const ProbeSpec spec(Strategy::Ghz, n, 0.6 + 0.4 * u(gen));
        const auto q = DecayModel::quadratic(0.5 + u(gen));
        const double t = optimal_time(q, n) * (0.5 + u(gen));
        const auto data = sample_fringe(spec, q, t, theta_grid(15 + static_cast<std::size_t>(u(gen) * 30)), 20000, i);
        EXPECT_NO_THROW(data.validate());
        const auto fit = fit_fringe(data);
        EXPECT_LE(fit.amplitude, kFitMaxAmplitude);
        EXPECT_GT(fit.phase, -std::numbers::pi);
        EXPECT_LE(fit.phase, std::numbers::pi);
    }
}
