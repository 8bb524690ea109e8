// zenometry command-line front end.
//
//   zenometry <subcommand> [--config file.ini] [--out dir] [--seed u64] [--mode analytic|montecarlo]
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 runtime failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "zenometry/commands.hpp"
#include "zenometry/config.hpp"
#include "zenometry/errors.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

using Runner = std::function<zenometry::commands::json(const zenometry::ExperimentConfig &,
                                                       const std::filesystem::path &)>;

} // namespace

int main(int argc, char **argv) {
    namespace zc = zenometry::commands;

    CLI::App app{"GHZ and product-probe frequency metrology under dephasing"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string mode;
    bool quiet = false;

    const std::map<std::string, std::pair<std::string, Runner>> commands{
        {"fringe", {"sample parity fringes per N and fit amplitude and phase", zc::run_fringe}},
        {"scaling", {"resolution versus N with reference bounds and slope fits", zc::run_scaling}},
        {"compare-markovian", {"relative resolution of quadratic over Markovian decay", zc::run_compare_markovian}},
        {"noise-sweep", {"white-noise GHZ resolution up to large N", zc::run_noise_sweep}},
        {"witness", {"GHZ witness expectation and fidelity bound", zc::run_witness}},
        {"channel-calibration", {"BD calibration table: predicted versus measured visibility", zc::run_channel_calibration}},
    };

    for (const auto &[name, entry] : commands) {
        auto *sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides experiment.output_dir)");
        sub->add_option("--seed", seed, "random seed (overrides experiment.seed)");
        sub->add_option("--mode", mode, "analytic or montecarlo")->check(CLI::IsMember({"analytic", "montecarlo"}));
        sub->add_flag("-q,--quiet", quiet, "do not print the summary");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitValidation;
    }

    const auto *chosen = app.get_subcommands().front();
    const auto &runner = commands.at(chosen->get_name()).second;

    try {
        auto config = config_path.empty() ? zenometry::ExperimentConfig{} : zenometry::parse_config_file(config_path);
        if (seed) config.seed = *seed;
        if (!mode.empty()) config.mode = zenometry::parse_run_mode(mode);
        const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(config.output_dir) : std::filesystem::path(out_dir);
        const auto summary = runner(config, dir);
        if (!quiet) std::cout << summary.dump(2) << '\n';
    } catch (const zenometry::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const zenometry::ParseError &e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const zenometry::InputError &e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const zenometry::DomainError &e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
