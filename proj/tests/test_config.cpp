#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "zenometry/config.hpp"

using namespace zenometry;

namespace {

ExperimentConfig parse(const std::string &text) {
    std::istringstream in(text);
    return parse_config(in, ZENOMETRY_DATA_DIR "/..");
}

std::string failing_field(const std::string &text) {
    try {
        parse(text);
    } catch (const ConfigError &e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST(Config, Defaults) {
    const auto c = parse("");
    EXPECT_EQ(c.qubits, (std::vector<int>{1, 2, 3, 4, 5, 6}));
    EXPECT_EQ(c.theta_count, 25u);
    EXPECT_EQ(c.strategy, Strategy::Ghz);
    EXPECT_EQ(c.decay.kind, "quadratic");
    EXPECT_FALSE(c.seed.has_value());
    EXPECT_THROW((void)c.require_seed(), ConfigError);
}

TEST(Config, ParsesValues) {
    const auto c = parse(
        "[experiment]\n"
        "strategy = product\n"
        "qubits = 1-3, 5\n"
        "decay = markovian\n"
        "decay_coefficient = 0.5\n"
        "seed = 18446744073709551615\n"
        "visibilities = 0.9, 0.8, 0.7, 0.6\n"
        "method = stencil\n"
        "mode = montecarlo\n"
        "[witness]\n"
        "witness_value = -0.7052\n");
    EXPECT_EQ(c.strategy, Strategy::Product);
    EXPECT_EQ(c.qubits, (std::vector<int>{1, 2, 3, 5}));
    EXPECT_TRUE(c.decay.build().is_markovian());
    EXPECT_EQ(*c.seed, 18446744073709551615ULL);
    EXPECT_EQ(c.visibility_for(3), 0.6);
    EXPECT_EQ(c.method, DerivativeMethod::Stencil);
    EXPECT_EQ(c.mode, RunMode::MonteCarlo);
    EXPECT_EQ(*c.witness_value, -0.7052);
}

TEST(Config, FusionVisibilityPerN) {
    const auto c = parse("[experiment]\nqubits = 2, 4\nfusion_visibility = 0.9\n");
    EXPECT_NEAR(c.visibility_for(0), 0.9, 1e-15);
    EXPECT_NEAR(c.visibility_for(1), 0.81, 1e-15);
}

TEST(Config, ValidationNamesField) {
    EXPECT_EQ(failing_field("[experiment]\nqubits = 0\n"), "experiment.qubits");
    EXPECT_EQ(failing_field("[experiment]\nshots_per_setting = many\n"), "experiment.shots_per_setting");
    EXPECT_EQ(failing_field("[experiment]\nseed = -4\n"), "experiment.seed");
    EXPECT_EQ(failing_field("[experiment]\ncolour = red\n"), "experiment.colour");
    EXPECT_EQ(failing_field("[plotting]\nwidth = 3\n"), "plotting.width");
    EXPECT_EQ(failing_field("[experiment]\nstrategy = bell\n"), "experiment.strategy");
    EXPECT_EQ(failing_field("[experiment]\nqubits = 1,2\nvisibilities = 0.9\n"), "experiment.visibilities");
    EXPECT_EQ(failing_field("[experiment]\ndecay = tabulated\ndecay_csv = nope.csv\n"), "experiment.decay_csv");
    EXPECT_EQ(failing_field("[experiment]\ntrials = 10\n"), "experiment.trials");
    EXPECT_EQ(failing_field("[experiment]\nmode = fast\n"), "experiment.mode");
    EXPECT_EQ(failing_field("[witness]\nqubits = 1\n"), "witness.qubits");
    EXPECT_EQ(failing_field("[witness]\nparity_x = 0.9\n"), "witness.parity_x");
    EXPECT_EQ(failing_field("[noise_sweep]\nfusion_visibilities = 0.9, 1.2\n"), "noise_sweep.fusion_visibilities");
    EXPECT_EQ(failing_field("[experiment\nqubits = 1\n"), "config");
}

TEST(Config, RoundTripIsIdempotent) {
    const std::string text =
        "[experiment]\nqubits = 2-4\nseed = 7\nfusion_visibility = 0.95\nomega_true = 1.5\n"
        "[noise_sweep]\nfusion_visibilities = 1, 0.99\n[witness]\nparity_x = 0.7\np_all_zero = 0.4\np_all_one = 0.41\n";
    const auto once = serialize_config(parse(text));
    const auto twice = serialize_config(parse(once));
    EXPECT_EQ(once, twice);
    EXPECT_EQ(config_hash(parse(once)), config_hash(parse(text)));
    EXPECT_NE(config_hash(parse(text)), config_hash(parse("[experiment]\nseed = 8\n")));
}

TEST(Config, TabulatedDecayFromFile) {
    const auto dir = std::filesystem::temp_directory_path() / "zenometry_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "decay.csv");
        out << "t,gamma\n0,0\n1,0.3\n2,0.8\n";
    }
    std::istringstream in("[experiment]\ndecay = tabulated\ndecay_csv = decay.csv\n");
    const auto c = parse_config(in, dir);
    EXPECT_NEAR(gamma_at(c.decay.build(c.base_dir), 1.5), 0.55, 1e-15);
    std::filesystem::remove_all(dir);
}
