#pragma once

/**
 * @file
 * Reproduction subcommands. Each one is a pure function of the configuration,
 * its fixtures and the seed: it writes CSV tables plus a `<name>_summary.json`
 * into the output directory and returns the summary.
 */

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zenometry/analysis.hpp"
#include "zenometry/config.hpp"
#include "zenometry/csv.hpp"
#include "zenometry/decay_models.hpp"
#include "zenometry/estimation.hpp"
#include "zenometry/fringe.hpp"
#include "zenometry/photonic_channel.hpp"
#include "zenometry/probes.hpp"
#include "zenometry/random.hpp"

namespace zenometry::commands {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace detail {

inline std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

/// Audit row: `# seed=<seed> config_hash=<hash>`.
inline std::string header_comment(const ExperimentConfig &c) {
    std::string line = "#";
    if (c.seed) line += " seed=" + std::to_string(*c.seed);
    return line + " config_hash=" + hex(config_hash(c)) + "\n";
}

inline void write_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

inline void write_summary(const fs::path &dir, const std::string &name, const json &summary) {
    write_file(dir / (name + "_summary.json"), summary.dump(2) + "\n");
}

inline json base_summary(const std::string &command, const ExperimentConfig &c) {
    json j;
    j["command"] = command;
    j["config_hash"] = hex(config_hash(c));
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

/// Independent seed for the i-th work item of a run.
inline std::uint64_t item_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return mix64(mix64(seed ^ tag) + index);
}

inline std::string fmt(double v) { return csv::format(v); }

inline std::vector<double> phase_grid(const ExperimentConfig &c, const ProbeSpec &spec) {
    auto grid = theta_grid(c.theta_count, c.theta_min, c.theta_max);
    if (c.method == DerivativeMethod::Stencil)
        grid = with_stencil_phases(std::move(grid), spec.fringe_order(), default_stencil_step(spec.qubits()));
    return grid;
}

inline double interrogation_time(const ExperimentConfig &c, const ProbeSpec &spec, const DecayModel &model) {
    return c.interrogation_time.value_or(optimal_time(model, spec.fringe_order()));
}

inline json sensitivity_json(const SensitivityResult &r) {
    json j;
    j["N"] = r.qubits;
    j["strategy"] = to_string(r.strategy);
    j["t_opt"] = r.t_opt;
    j["parity"] = r.parity;
    j["derivative"] = r.derivative;
    j["d2omegaT"] = r.d2omega_t;
    j["fisher"] = r.fisher_per_photon;
    if (r.amplitude) j["amplitude"] = *r.amplitude;
    if (r.errors) {
        json e;
        if (r.errors->amplitude) e["amplitude"] = *r.errors->amplitude;
        e["derivative"] = r.errors->derivative;
        e["d2omegaT"] = r.errors->d2omega_t;
        e["fisher"] = r.errors->fisher;
        e["trials_used"] = r.errors->trials_used;
        e["trials_dropped"] = r.errors->trials_dropped;
        j["stderr"] = e;
    }
    return j;
}

inline json fit_json(const ScalingFit &f) {
    return json{{"slope", f.slope},
                {"slope_stderr", f.slope_stderr},
                {"intercept", f.intercept},
                {"intercept_stderr", f.intercept_stderr}};
}

} // namespace detail

/// `N,strategy,t_opt,d2omegaT,fisher,stderr_fisher` rows.
inline std::string sensitivity_csv(const std::vector<SensitivityResult> &rows) {
    std::string out = "N,strategy,t_opt,d2omegaT,fisher,stderr_fisher\n";
    for (const auto &r : rows)
        out += std::to_string(r.qubits) + "," + to_string(r.strategy) + "," + detail::fmt(r.t_opt) + "," +
               detail::fmt(r.d2omega_t) + "," + detail::fmt(r.fisher_per_photon) + "," +
               detail::fmt(r.errors ? r.errors->fisher : 0.0) + "\n";
    return out;
}

/// Fringe per N at its interrogation time, with the fitted amplitude and phase.
inline json run_fringe(const ExperimentConfig &c, const fs::path &out_dir) {
    const auto seed = c.require_seed();
    fs::create_directories(out_dir);
    const auto model = c.decay.build(c.base_dir);
    json summary = detail::base_summary("fringe", c);
    json items = json::array();
    for (std::size_t i = 0; i < c.qubits.size(); ++i) {
        const ProbeSpec spec(c.strategy, c.qubits[i], c.visibility_for(i));
        const double t = detail::interrogation_time(c, spec, model);
        const auto grid = detail::phase_grid(c, spec);
        const auto data = sample_fringe(spec, model, t, grid, c.shots_per_setting,
                                        detail::item_seed(seed, streams::fringe, i));
        std::ostringstream csv_text;
        csv_text << detail::header_comment(c);
        write_fringe_csv(csv_text, data);
        const std::string file = "fringe_N" + std::to_string(spec.qubits()) + ".csv";
        detail::write_file(out_dir / file, csv_text.str());

        json item;
        item["N"] = spec.qubits();
        item["file"] = file;
        item["t"] = t;
        item["visibility"] = spec.visibility();
        item["expected_amplitude"] = spec.visibility() * std::exp(-spec.fringe_order() * gamma_at(model, t));
        const auto fit = fit_fringe(data);
        item["amplitude"] = fit.amplitude;
        item["amplitude_stderr"] = std::sqrt(fit.covariance(0, 0));
        item["phase"] = fit.phase;
        item["phase_stderr"] = std::sqrt(fit.covariance(1, 1));
        if (c.omega_true) item["parity_at_omega_true"] = fit.value_at(*c.omega_true * t, spec.fringe_order());
        items.push_back(item);
    }
    summary["fringes"] = items;
    detail::write_summary(out_dir, "fringe", summary);
    return summary;
}

/// Resolution versus N, reference bounds and log-log slope fits for raw and
/// noise-subtracted series.
inline json run_scaling(const ExperimentConfig &c, const fs::path &out_dir) {
    if (c.qubits.size() < 3) throw ConfigError("experiment.qubits", "scaling needs at least three qubit counts");
    fs::create_directories(out_dir);
    const auto model = c.decay.build(c.base_dir);
    std::vector<SensitivityResult> raw, subtracted;
    for (std::size_t i = 0; i < c.qubits.size(); ++i) {
        const ProbeSpec spec(c.strategy, c.qubits[i], c.visibility_for(i));
        if (c.mode == RunMode::Analytic) {
            raw.push_back(closed_form_result(spec, model));
            subtracted.push_back(closed_form_result(ProbeSpec(c.strategy, c.qubits[i], 1.0), model));
            continue;
        }
        const auto seed = c.require_seed();
        const double t = detail::interrogation_time(c, spec, model);
        const auto data = sample_fringe(spec, model, t, detail::phase_grid(c, spec), c.shots_per_setting,
                                        detail::item_seed(seed, streams::fringe, i));
        const auto mc_seed = detail::item_seed(seed, streams::bootstrap, i);
        auto r = sensitivity_from_fringe(data, t, c.method);
        r.errors = monte_carlo_errorbar(data, t, c.trials, mc_seed, c.method);
        raw.push_back(r);
        const auto clean = noise_subtract(data, spec.visibility());
        auto s = sensitivity_from_fringe(clean, t, c.method);
        s.errors = monte_carlo_errorbar(clean, t, c.trials, mc_seed, c.method);
        subtracted.push_back(s);
    }

    const auto points = [](const std::vector<SensitivityResult> &rs) {
        std::vector<ScalingPoint> pts;
        for (const auto &r : rs) pts.push_back({double(r.qubits), r.d2omega_t, r.errors ? r.errors->d2omega_t : 0.0});
        return pts;
    };
    const auto raw_fit = scaling_fit(points(raw));
    const auto sub_fit = scaling_fit(points(subtracted));

    // Bounds anchored at this decay model's ideal single-qubit resolution.
    const double anchor = closed_form_result(ProbeSpec(c.strategy, 1, 1.0), model).d2omega_t;
    std::string bounds = "N,value,bound_sql,bound_zl,bound_hl,beats_sql\n";
    for (const auto &r : raw) {
        const auto b = bounds_with_anchor(r.qubits, anchor);
        bounds += std::to_string(r.qubits) + "," + detail::fmt(r.d2omega_t) + "," + detail::fmt(b.sql) + "," +
                  detail::fmt(b.zeno) + "," + detail::fmt(b.heisenberg) + "," +
                  (r.d2omega_t < b.sql ? "true" : "false") + "\n";
    }

    const std::string header = detail::header_comment(c);
    detail::write_file(out_dir / "scaling.csv", header + sensitivity_csv(raw));
    detail::write_file(out_dir / "scaling_subtracted.csv", header + sensitivity_csv(subtracted));
    detail::write_file(out_dir / "bounds.csv", header + bounds);

    json summary = detail::base_summary("scaling", c);
    summary["mode"] = to_string(c.mode);
    summary["method"] = to_string(c.method);
    summary["decay"] = model.describe();
    summary["fit_raw"] = detail::fit_json(raw_fit);
    summary["fit_subtracted"] = detail::fit_json(sub_fit);
    json rows = json::array();
    for (const auto &r : raw) rows.push_back(detail::sensitivity_json(r));
    summary["raw"] = rows;
    rows = json::array();
    for (const auto &r : subtracted) rows.push_back(detail::sensitivity_json(r));
    summary["subtracted"] = rows;
    detail::write_summary(out_dir, "scaling", summary);
    return summary;
}

/// Relative resolution r^2 of the quadratic over the Markovian model, GHZ probes.
inline json run_compare_markovian(const ExperimentConfig &c, const fs::path &out_dir) {
    fs::create_directories(out_dir);
    const auto nm = DecayModel::quadratic(c.quadratic_coefficient);
    const auto m = DecayModel::markovian(c.markovian_rate);
    std::string table = "N,r2,r2_stderr,sqrt_n\n";
    json rows = json::array();
    for (std::size_t i = 0; i < c.qubits.size(); ++i) {
        const int n = c.qubits[i];
        double r2 = 0.0;
        double r2_err = 0.0;
        if (c.mode == RunMode::Analytic) {
            r2 = relative_resolution(n, nm, m);
        } else {
            const auto seed = c.require_seed();
            const ProbeSpec spec(Strategy::Ghz, n, c.visibility_for(i));
            const auto measure = [&](const DecayModel &model, std::uint64_t tag) {
                const double t = optimal_time(model, n);
                const auto data = sample_fringe(spec, model, t, detail::phase_grid(c, spec), c.shots_per_setting,
                                                detail::item_seed(seed, tag, i));
                auto r = sensitivity_from_fringe(data, t, c.method);
                r.errors = monte_carlo_errorbar(data, t, c.trials, detail::item_seed(seed, tag ^ streams::bootstrap, i),
                                                c.method);
                return r;
            };
            const auto r_nm = measure(nm, 0x6e6dULL);
            const auto r_m = measure(m, 0x6dULL);
            r2 = r_m.d2omega_t / r_nm.d2omega_t;
            const double rel_nm = r_nm.errors->d2omega_t / r_nm.d2omega_t;
            const double rel_m = r_m.errors->d2omega_t / r_m.d2omega_t;
            r2_err = r2 * std::sqrt(rel_nm * rel_nm + rel_m * rel_m);
        }
        table += std::to_string(n) + "," + detail::fmt(r2) + "," + detail::fmt(r2_err) + "," +
                 detail::fmt(std::sqrt(double(n))) + "\n";
        rows.push_back(json{{"N", n}, {"r2", r2}, {"r2_stderr", r2_err}, {"sqrt_n", std::sqrt(double(n))}});
    }
    detail::write_file(out_dir / "relative_resolution.csv", detail::header_comment(c) + table);
    json summary = detail::base_summary("compare-markovian", c);
    summary["mode"] = to_string(c.mode);
    summary["markovian"] = m.describe();
    summary["non_markovian"] = nm.describe();
    summary["rows"] = rows;
    detail::write_summary(out_dir, "compare_markovian", summary);
    return summary;
}

/// White-noise GHZ resolution for N = 1..max_qubits at each fusion visibility.
inline json run_noise_sweep(const ExperimentConfig &c, const fs::path &out_dir) {
    fs::create_directories(out_dir);
    std::vector<int> ns(static_cast<std::size_t>(c.sweep_max_qubits));
    for (int i = 0; i < c.sweep_max_qubits; ++i) ns[static_cast<std::size_t>(i)] = i + 1;
    json sweeps = json::array();
    for (double v : c.sweep_visibilities) {
        const auto sweep = noise_sweep(v, ns, c.quadratic_coefficient);
        std::string table = "N,value,bound_sql,bound_zl,bound_hl,beats_sql\n";
        for (const auto &r : sweep.rows)
            table += std::to_string(r.qubits) + "," + detail::fmt(r.ghz) + "," + detail::fmt(r.sql) + "," +
                     detail::fmt(r.zeno) + "," + detail::fmt(r.heisenberg) + "," + (r.beats_sql ? "true" : "false") +
                     "\n";
        const std::string file = "noise_sweep_v" + detail::fmt(v) + ".csv";
        detail::write_file(out_dir / file, detail::header_comment(c) + table);
        json item{{"fusion_visibility", v}, {"file", file}};
        if (sweep.crossing) item["crossing"] = *sweep.crossing;
        else item["crossing"] = nullptr;
        sweeps.push_back(item);
    }
    json summary = detail::base_summary("noise-sweep", c);
    summary["quadratic_coefficient"] = c.quadratic_coefficient;
    summary["sweeps"] = sweeps;
    detail::write_summary(out_dir, "noise_sweep", summary);
    return summary;
}

/// Witness expectation and fidelity bound from a supplied value, supplied
/// two-setting expectations, or the white-noise GHZ oracle.
inline json run_witness(const ExperimentConfig &c, const fs::path &out_dir) {
    fs::create_directories(out_dir);
    json summary = detail::base_summary("witness", c);
    double w = 0.0;
    if (c.witness_value) {
        summary["source"] = "supplied witness value";
        w = *c.witness_value;
    } else if (c.witness_parity_x) {
        summary["source"] = "supplied expectations";
        w = witness_from_expectations(*c.witness_parity_x, *c.witness_p_all_zero, *c.witness_p_all_one);
    } else {
        const WhiteNoiseGhzParams params{c.witness_qubits, c.witness_fusion_visibility.value_or(1.0)};
        summary["source"] = "white-noise GHZ oracle";
        summary["N"] = params.qubits;
        summary["fusion_visibility"] = params.fusion_visibility;
        w = witness_expectation(ghz_density_matrix(params));
    }
    summary["witness"] = w;
    summary["fidelity_bound"] = fidelity_bound(w);
    summary["genuinely_entangled"] = w < 0.0;
    detail::write_summary(out_dir, "witness", summary);
    return summary;
}

/// Predicted versus measured visibilities for the BD calibration table.
inline json run_channel_calibration(const ExperimentConfig &c, const fs::path &out_dir) {
    fs::create_directories(out_dir);
    const auto rows = load_calibration_table_file(DecaySpec::resolve(c.base_dir, c.calibration_fixture).string());
    const GaussianMode mode(c.beam_waist_mm);
    const auto tab = TabulatedMode::gaussian(mode, 6.0 * mode.waist(), 4096);
    std::vector<BdPairGeometry> geometries;
    for (const auto &r : rows) geometries.emplace_back(r.per_bd_displacement);
    const auto predicted = predicted_table_visibilities(geometries, mode);

    std::string table = "d_per_bd,x0,t_eff,v_pred,v_numeric,v_meas,residual\n";
    double max_residual = 0.0;
    double max_quadrature_gap = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double x0 = geometries[i].total_separation();
        const double numeric = overlap_numeric(tab, x0);
        const double measured = rows[i].measured_visibility();
        const double residual = measured - predicted[i];
        max_residual = std::max(max_residual, std::abs(residual));
        max_quadrature_gap = std::max(max_quadrature_gap, std::abs(numeric - predicted[i]));
        table += detail::fmt(rows[i].per_bd_displacement) + "," + detail::fmt(x0) + "," +
                 detail::fmt(effective_time(x0, mode)) + "," + detail::fmt(predicted[i]) + "," +
                 detail::fmt(numeric) + "," + detail::fmt(measured) + "," + detail::fmt(residual) + "\n";
    }
    detail::write_file(out_dir / "channel_calibration.csv", detail::header_comment(c) + table);
    json summary = detail::base_summary("channel-calibration", c);
    summary["beam_waist_mm"] = c.beam_waist_mm;
    summary["rows"] = rows.size();
    summary["max_abs_residual"] = max_residual;
    summary["max_quadrature_gap"] = max_quadrature_gap;
    detail::write_summary(out_dir, "channel_calibration", summary);
    return summary;
}

} // namespace zenometry::commands
