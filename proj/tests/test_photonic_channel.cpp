#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "zenometry/photonic_channel.hpp"

using namespace zenometry;

TEST(PhotonicChannel, DisplacementFromThickness) {
    EXPECT_EQ(displacement_from_thickness(0.0), 0.0);
    EXPECT_NEAR(displacement_from_thickness(9.4103), std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(displacement_from_thickness(4.70515), 0.707107, 1e-6);
    EXPECT_THROW(displacement_from_thickness(-1.0), DomainError);
}

TEST(PhotonicChannel, GaussianOverlap) {
    const GaussianMode mode(1.05);
    EXPECT_EQ(overlap_gaussian(0.0, mode), 1.0);
    EXPECT_NEAR(overlap_gaussian(1.0465, mode), 0.6086, 1e-4);
    EXPECT_NEAR(overlap_gaussian(1.05, mode), std::exp(-0.5), 1e-15);
    EXPECT_THROW(GaussianMode(0.0), DomainError);
}

TEST(PhotonicChannel, EffectiveTime) {
    const GaussianMode mode(1.05);
    EXPECT_EQ(effective_time(0.0, mode), 0.0);
    EXPECT_DOUBLE_EQ(effective_time(1.05, mode), 1.0);
    EXPECT_NEAR(effective_time(displacement_from_thickness(9.4103), mode), 1.34687, 1e-5);
    // the channel realizes exp(-t^2/2)
    for (double x0 : {0.2, 0.9, 2.1}) EXPECT_NEAR(overlap_gaussian(x0, mode), std::exp(-0.5 * std::pow(effective_time(x0, mode), 2)), 1e-15);
}

TEST(PhotonicChannel, NumericOverlapMatchesClosedForm) {
    const GaussianMode mode(1.05);
    const auto tab = TabulatedMode::gaussian(mode, 6.0 * 1.05, 4096);
    EXPECT_NEAR(overlap_numeric(tab, 0.0), 1.0, 1e-6);
    EXPECT_NEAR(overlap_numeric(tab, 1.0465), 0.6086, 1e-3);
    for (double x0 = 0.0; x0 < 3.0; x0 += 0.25) EXPECT_NEAR(overlap_numeric(tab, x0), overlap_gaussian(x0, mode), 1e-3);
    EXPECT_THROW(overlap_numeric(tab, 20.0), RangeError);
}

// Rectangle of width L: autocorrelation is the triangle 1 - |x0|/L.
TEST(PhotonicChannel, TopHatTriangle) {
    const double L = 2.0;
    const std::size_t n = 2001;
    const double h = 2.0 * L / static_cast<double>(n - 1);
    std::vector<double> amp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -L + h * static_cast<double>(i);
        amp[i] = std::abs(x) <= L / 2 + 1e-12 ? 1.0 : 0.0;
    }
    const TabulatedMode top(-L, h, amp);
    EXPECT_NEAR(overlap_numeric(top, 0.0), 1.0, 1e-3);
    EXPECT_NEAR(overlap_numeric(top, L / 2), 0.5, 1e-3);
    EXPECT_NEAR(overlap_numeric(top, L / 4), 0.75, 1e-3);
}

TEST(PhotonicChannel, LoadModeCsv) {
    std::ostringstream csv;
    csv << "x,amplitude\n";
    for (int i = -200; i <= 200; ++i) {
        const double x = 0.03 * i;
        csv << x << ',' << std::exp(-x * x) << '\n';
    }
    std::istringstream in(csv.str());
    const auto mode = TabulatedMode::load(in);
    EXPECT_NEAR(overlap_numeric(mode, 1.0), std::exp(-0.5), 1e-3);

    std::istringstream uneven("x,amplitude\n0,1\n0.1,1\n0.3,1\n");
    try {
        TabulatedMode::load(uneven);
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(PhotonicChannel, CalibrationTable) {
    const auto rows = load_calibration_table_file(ZENOMETRY_DATA_DIR "/bd_calibration.csv");
    ASSERT_EQ(rows.size(), 8u);
    std::vector<BdPairGeometry> g;
    for (const auto &r : rows) g.emplace_back(r.per_bd_displacement);
    const auto pred = predicted_table_visibilities(g, GaussianMode(kCalibrationBeamWaistMm));

    EXPECT_NEAR(pred[0], 0.9511, 1e-4);
    EXPECT_NEAR(rows[0].measured_visibility(), 0.9448, 1e-4);
    EXPECT_NEAR(pred[3], 0.6086, 1e-4);
    EXPECT_NEAR(rows[3].measured_visibility(), 0.6053, 1e-4);
    EXPECT_NEAR(pred[7], 0.0566, 2e-4); // printed value carries rounding of x0
    EXPECT_NEAR(rows[7].measured_visibility(), 0.0574, 1e-4);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_LE(std::abs(pred[i] - rows[i].measured_visibility()), 0.05);
}

TEST(PhotonicChannel, CalibrationParseErrors) {
    std::istringstream bad("d_per_bd,intensity_plus,intensity_minus\n0.2,4.0,0.1\n0.3,abc,0.2\n");
    try {
        load_calibration_table(bad);
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream short_row("d_per_bd,intensity_plus,intensity_minus\n0.2,4.0\n");
    EXPECT_THROW(load_calibration_table(short_row), ParseError);
    EXPECT_THROW(predicted_table_visibilities({}, GaussianMode(1.0)), InputError);
}
