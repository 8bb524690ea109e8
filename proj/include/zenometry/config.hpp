#pragma once

/**
 * @file
 * Experiment configuration: a flat, typed INI file.
 *
 *     [experiment]        common probe, decay and sampling settings
 *     [compare_markovian] calibration of the two decay models
 *     [noise_sweep]       fusion visibilities and the largest N
 *     [witness]           state or measured expectations
 *     [channel_calibration] BD table fixture and beam waist
 *
 * Unknown sections or keys are rejected. Validation failures name the field
 * as `section.key`.
 */

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "zenometry/csv.hpp"
#include "zenometry/decay_models.hpp"
#include "zenometry/errors.hpp"
#include "zenometry/estimation.hpp"
#include "zenometry/photonic_channel.hpp"
#include "zenometry/probes.hpp"

namespace zenometry {

/// Invalid configuration value; `field()` is the offending `section.key`.
class ConfigError : public InputError {
  public:
    ConfigError(const std::string &field, const std::string &what)
        : InputError(field + ": " + what), field_(field) {}
    [[nodiscard]] const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

enum class RunMode { Analytic, MonteCarlo };

inline std::string to_string(RunMode m) { return m == RunMode::Analytic ? "analytic" : "montecarlo"; }

inline RunMode parse_run_mode(const std::string &text) {
    if (text == "analytic") return RunMode::Analytic;
    if (text == "montecarlo") return RunMode::MonteCarlo;
    throw InputError("unknown mode '" + text + "' (expected analytic or montecarlo)");
}

struct DecaySpec {
    std::string kind = "quadratic"; ///< markovian | quadratic | tabulated
    double coefficient = 1.0;
    std::string csv_path; ///< tabulated only; relative to the config directory

    [[nodiscard]] DecayModel build(const std::filesystem::path &base_dir = {}) const {
        if (kind == "markovian") return DecayModel::markovian(coefficient);
        if (kind == "quadratic") return DecayModel::quadratic(coefficient);
        if (kind == "tabulated") return load_tabulated_decay_file(resolve(base_dir, csv_path).string());
        throw ConfigError("experiment.decay", "unknown decay kind '" + kind + "'");
    }

    static std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
        const std::filesystem::path path(p);
        return path.is_absolute() || base.empty() ? path : base / path;
    }
};

struct ExperimentConfig {
    // [experiment]
    Strategy strategy = Strategy::Ghz;
    std::vector<int> qubits{1, 2, 3, 4, 5, 6};
    DecaySpec decay;
    std::optional<double> omega_true;
    std::optional<double> interrogation_time; ///< default: the optimal time per N
    std::int64_t shots_per_setting = 1000000;
    std::size_t theta_count = 25;
    double theta_min = 0.0;
    double theta_max = std::numbers::pi;
    int trials = 200;
    std::optional<std::uint64_t> seed;
    std::vector<double> visibilities; ///< V0 per entry of `qubits`
    std::optional<double> fusion_visibility;
    DerivativeMethod method = DerivativeMethod::Fit;
    RunMode mode = RunMode::Analytic;
    std::string output_dir = "out";

    // [compare_markovian]
    double markovian_rate = std::exp(-0.5);
    double quadratic_coefficient = 1.0;

    // [noise_sweep]
    std::vector<double> sweep_visibilities{1.0, 0.99, 0.95, 0.9};
    int sweep_max_qubits = 1000;

    // [witness]
    int witness_qubits = 6;
    std::optional<double> witness_fusion_visibility;
    std::optional<double> witness_value;
    std::optional<double> witness_parity_x;
    std::optional<double> witness_p_all_zero;
    std::optional<double> witness_p_all_one;

    // [channel_calibration]
    std::string calibration_fixture = "data/bd_calibration.csv";
    double beam_waist_mm = kCalibrationBeamWaistMm;

    /// Directory used to resolve relative paths; not serialized.
    std::filesystem::path base_dir;

    /// V0 for the i-th entry of `qubits`.
    [[nodiscard]] double visibility_for(std::size_t index) const {
        if (!visibilities.empty()) return visibilities.at(index);
        if (fusion_visibility) return std::pow(*fusion_visibility, 0.5 * qubits.at(index));
        return 1.0;
    }

    [[nodiscard]] std::uint64_t require_seed() const {
        if (!seed) throw ConfigError("experiment.seed", "a seed is required for sampling");
        return *seed;
    }
};

namespace detail {

inline std::string join(const std::vector<double> &values) {
    std::string out;
    for (double v : values) out += (out.empty() ? "" : ",") + csv::format(v);
    return out;
}

inline std::string join(const std::vector<int> &values) {
    std::string out;
    for (int v : values) out += (out.empty() ? "" : ",") + std::to_string(v);
    return out;
}

class ConfigReader {
  public:
    explicit ConfigReader(const boost::property_tree::ptree &tree) : tree_(tree) {}

    [[nodiscard]] std::optional<std::string> raw(const std::string &section, const std::string &key) {
        seen_.insert(section + "." + key);
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto value = sec->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
        if (!value) return std::nullopt;
        return std::string(csv::trim(*value));
    }

    template <class T>
    std::optional<T> number(const std::string &section, const std::string &key) {
        const auto text = raw(section, key);
        if (!text) return std::nullopt;
        return parse_number<T>(*text, section + "." + key);
    }

    template <class T>
    static T parse_number(std::string_view text, const std::string &field) {
        T value{};
        const auto *end = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(text.data(), end, value);
        if (text.empty() || ec != std::errc{} || ptr != end)
            throw ConfigError(field, "expected a number, got '" + std::string(text) + "'");
        if constexpr (std::is_floating_point_v<T>)
            if (!std::isfinite(value)) throw ConfigError(field, "value must be finite");
        return value;
    }

    std::optional<std::vector<double>> number_list(const std::string &section, const std::string &key) {
        const auto text = raw(section, key);
        if (!text) return std::nullopt;
        std::vector<double> out;
        if (text->empty()) return out;
        for (auto item : csv::split(*text)) out.push_back(parse_number<double>(item, section + "." + key));
        return out;
    }

    /// Comma list of integers and inclusive ranges such as `1-6,8`.
    std::optional<std::vector<int>> int_list(const std::string &section, const std::string &key) {
        const auto text = raw(section, key);
        if (!text) return std::nullopt;
        const std::string field = section + "." + key;
        std::vector<int> out;
        for (auto item : csv::split(*text)) {
            const auto dash = item.find('-', 1);
            if (dash == std::string_view::npos) {
                out.push_back(parse_number<int>(item, field));
                continue;
            }
            const int lo = parse_number<int>(csv::trim(item.substr(0, dash)), field);
            const int hi = parse_number<int>(csv::trim(item.substr(dash + 1)), field);
            if (hi < lo) throw ConfigError(field, "descending range '" + std::string(item) + "'");
            for (int n = lo; n <= hi; ++n) out.push_back(n);
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto &[section, child] : tree_) {
            if (child.empty() && !child.data().empty())
                throw ConfigError(section, "key outside of any section");
            for (const auto &[key, value] : child) {
                (void)value;
                if (!seen_.count(section + "." + key)) throw ConfigError(section + "." + key, "unknown key");
            }
        }
    }

  private:
    const boost::property_tree::ptree &tree_;
    std::set<std::string> seen_;
};

} // namespace detail

/// Parses and validates a configuration. `base_dir` resolves relative file
/// references and is checked for their existence.
inline ExperimentConfig parse_config(std::istream &in, const std::filesystem::path &base_dir = {}) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError("config", std::string("line ") + std::to_string(e.line()) + ": " + e.message());
    }
    detail::ConfigReader r(tree);
    ExperimentConfig c;
    c.base_dir = base_dir;
    const std::string ex = "experiment";

    if (auto v = r.raw(ex, "strategy")) {
        try {
            c.strategy = parse_strategy(*v);
        } catch (const InputError &e) {
            throw ConfigError("experiment.strategy", e.what());
        }
    }
    if (auto v = r.int_list(ex, "qubits")) c.qubits = *v;
    if (auto v = r.raw(ex, "decay")) c.decay.kind = *v;
    if (auto v = r.number<double>(ex, "decay_coefficient")) c.decay.coefficient = *v;
    if (auto v = r.raw(ex, "decay_csv")) c.decay.csv_path = *v;
    c.omega_true = r.number<double>(ex, "omega_true");
    c.interrogation_time = r.number<double>(ex, "interrogation_time");
    if (auto v = r.number<std::int64_t>(ex, "shots_per_setting")) c.shots_per_setting = *v;
    if (auto v = r.number<std::size_t>(ex, "theta_count")) c.theta_count = *v;
    if (auto v = r.number<double>(ex, "theta_min")) c.theta_min = *v;
    if (auto v = r.number<double>(ex, "theta_max")) c.theta_max = *v;
    if (auto v = r.number<int>(ex, "trials")) c.trials = *v;
    c.seed = r.number<std::uint64_t>(ex, "seed");
    if (auto v = r.number_list(ex, "visibilities")) c.visibilities = *v;
    c.fusion_visibility = r.number<double>(ex, "fusion_visibility");
    if (auto v = r.raw(ex, "method")) {
        if (*v == "fit") c.method = DerivativeMethod::Fit;
        else if (*v == "stencil") c.method = DerivativeMethod::Stencil;
        else throw ConfigError("experiment.method", "expected fit or stencil, got '" + *v + "'");
    }
    if (auto v = r.raw(ex, "mode")) {
        try {
            c.mode = parse_run_mode(*v);
        } catch (const InputError &e) {
            throw ConfigError("experiment.mode", e.what());
        }
    }
    if (auto v = r.raw(ex, "output_dir")) c.output_dir = *v;

    if (auto v = r.number<double>("compare_markovian", "markovian_rate")) c.markovian_rate = *v;
    if (auto v = r.number<double>("compare_markovian", "quadratic_coefficient")) c.quadratic_coefficient = *v;

    if (auto v = r.number_list("noise_sweep", "fusion_visibilities")) c.sweep_visibilities = *v;
    if (auto v = r.number<int>("noise_sweep", "max_qubits")) c.sweep_max_qubits = *v;

    if (auto v = r.number<int>("witness", "qubits")) c.witness_qubits = *v;
    c.witness_fusion_visibility = r.number<double>("witness", "fusion_visibility");
    c.witness_value = r.number<double>("witness", "witness_value");
    c.witness_parity_x = r.number<double>("witness", "parity_x");
    c.witness_p_all_zero = r.number<double>("witness", "p_all_zero");
    c.witness_p_all_one = r.number<double>("witness", "p_all_one");

    if (auto v = r.raw("channel_calibration", "fixture")) c.calibration_fixture = *v;
    if (auto v = r.number<double>("channel_calibration", "beam_waist_mm")) c.beam_waist_mm = *v;

    r.reject_unknown();

    // Validation.
    if (c.qubits.empty()) throw ConfigError("experiment.qubits", "qubit range must be non-empty");
    for (int n : c.qubits)
        if (n < 1) throw ConfigError("experiment.qubits", "qubit counts must be at least one");
    if (c.decay.kind != "markovian" && c.decay.kind != "quadratic" && c.decay.kind != "tabulated")
        throw ConfigError("experiment.decay", "expected markovian, quadratic or tabulated");
    if (c.decay.kind == "tabulated") {
        if (c.decay.csv_path.empty()) throw ConfigError("experiment.decay_csv", "tabulated decay needs a CSV path");
        if (!std::filesystem::exists(DecaySpec::resolve(base_dir, c.decay.csv_path)))
            throw ConfigError("experiment.decay_csv", "file '" + c.decay.csv_path + "' does not exist");
    } else if (!(c.decay.coefficient >= 0.0)) {
        throw ConfigError("experiment.decay_coefficient", "must be non-negative");
    }
    if (c.interrogation_time && !(*c.interrogation_time >= 0.0))
        throw ConfigError("experiment.interrogation_time", "must be non-negative");
    if (c.shots_per_setting < 1) throw ConfigError("experiment.shots_per_setting", "must be at least one");
    if (c.theta_count < 5) throw ConfigError("experiment.theta_count", "must be at least five");
    if (!(c.theta_max > c.theta_min)) throw ConfigError("experiment.theta_max", "must exceed theta_min");
    if (c.trials < kMinMonteCarloTrials)
        throw ConfigError("experiment.trials", "must be at least " + std::to_string(kMinMonteCarloTrials));
    if (!c.visibilities.empty()) {
        if (c.visibilities.size() != c.qubits.size())
            throw ConfigError("experiment.visibilities", "need one visibility per qubit count");
        for (double v : c.visibilities)
            if (!(v > 0.0 && v <= 1.0)) throw ConfigError("experiment.visibilities", "values must lie in (0, 1]");
        if (c.fusion_visibility)
            throw ConfigError("experiment.fusion_visibility", "give either visibilities or fusion_visibility");
    }
    if (c.fusion_visibility && !(*c.fusion_visibility > 0.0 && *c.fusion_visibility <= 1.0))
        throw ConfigError("experiment.fusion_visibility", "must lie in (0, 1]");
    if (!(c.markovian_rate > 0.0)) throw ConfigError("compare_markovian.markovian_rate", "must be positive");
    if (!(c.quadratic_coefficient > 0.0))
        throw ConfigError("compare_markovian.quadratic_coefficient", "must be positive");
    if (c.sweep_visibilities.empty()) throw ConfigError("noise_sweep.fusion_visibilities", "must be non-empty");
    for (double v : c.sweep_visibilities)
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError("noise_sweep.fusion_visibilities", "values must lie in (0, 1]");
    if (c.sweep_max_qubits < 1) throw ConfigError("noise_sweep.max_qubits", "must be at least one");
    if (c.witness_qubits < 2) throw ConfigError("witness.qubits", "witness needs at least two qubits");
    if (c.witness_fusion_visibility && !(*c.witness_fusion_visibility >= 0.0 && *c.witness_fusion_visibility <= 1.0))
        throw ConfigError("witness.fusion_visibility", "must lie in [0, 1]");
    const int triple = (c.witness_parity_x ? 1 : 0) + (c.witness_p_all_zero ? 1 : 0) + (c.witness_p_all_one ? 1 : 0);
    if (triple != 0 && triple != 3)
        throw ConfigError("witness.parity_x", "parity_x, p_all_zero and p_all_one must be given together");
    if (!(c.beam_waist_mm > 0.0)) throw ConfigError("channel_calibration.beam_waist_mm", "must be positive");
    return c;
}

inline ExperimentConfig parse_config_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
    return parse_config(in, path.parent_path());
}

/// Canonical text: every field in a fixed order, optional fields only when set.
inline std::string serialize_config(const ExperimentConfig &c) {
    std::ostringstream out;
    const auto opt = [&out](const char *key, const std::optional<double> &v) {
        if (v) out << key << " = " << csv::format(*v) << '\n';
    };
    out << "[experiment]\n";
    out << "strategy = " << to_string(c.strategy) << '\n';
    out << "qubits = " << detail::join(c.qubits) << '\n';
    out << "decay = " << c.decay.kind << '\n';
    out << "decay_coefficient = " << csv::format(c.decay.coefficient) << '\n';
    if (!c.decay.csv_path.empty()) out << "decay_csv = " << c.decay.csv_path << '\n';
    opt("omega_true", c.omega_true);
    opt("interrogation_time", c.interrogation_time);
    out << "shots_per_setting = " << c.shots_per_setting << '\n';
    out << "theta_count = " << c.theta_count << '\n';
    out << "theta_min = " << csv::format(c.theta_min) << '\n';
    out << "theta_max = " << csv::format(c.theta_max) << '\n';
    out << "trials = " << c.trials << '\n';
    if (c.seed) out << "seed = " << *c.seed << '\n';
    if (!c.visibilities.empty()) out << "visibilities = " << detail::join(c.visibilities) << '\n';
    opt("fusion_visibility", c.fusion_visibility);
    out << "method = " << to_string(c.method) << '\n';
    out << "mode = " << to_string(c.mode) << '\n';
    out << "output_dir = " << c.output_dir << '\n';
    out << "\n[compare_markovian]\n";
    out << "markovian_rate = " << csv::format(c.markovian_rate) << '\n';
    out << "quadratic_coefficient = " << csv::format(c.quadratic_coefficient) << '\n';
    out << "\n[noise_sweep]\n";
    out << "fusion_visibilities = " << detail::join(c.sweep_visibilities) << '\n';
    out << "max_qubits = " << c.sweep_max_qubits << '\n';
    out << "\n[witness]\n";
    out << "qubits = " << c.witness_qubits << '\n';
    opt("fusion_visibility", c.witness_fusion_visibility);
    opt("witness_value", c.witness_value);
    opt("parity_x", c.witness_parity_x);
    opt("p_all_zero", c.witness_p_all_zero);
    opt("p_all_one", c.witness_p_all_one);
    out << "\n[channel_calibration]\n";
    out << "fixture = " << c.calibration_fixture << '\n';
    out << "beam_waist_mm = " << csv::format(c.beam_waist_mm) << '\n';
    return out.str();
}

/// FNV-1a over the canonical serialization.
inline std::uint64_t config_hash(const ExperimentConfig &c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace zenometry
