// gridfreq — regional frequency dynamics and security-constraint toolchain.
//
// Subcommands wire the library end to end: integrate a post-fault scenario
// (simulate), evaluate the aggregate closed form (coi), solve the two-region
// rational transfer functions (analytic2), regress oscillation and
// energy-integral models over a simulation sweep (fit), synthesize the linear
// security constraints from those models (constraints), and check a generated
// set against fresh simulations (validate).
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure,
// 4 validation found a feasible-but-insecure point.

#include "gridfreq/coi_analytic.hpp"
#include "gridfreq/constraint_gen.hpp"
#include "gridfreq/dynamics_sim.hpp"
#include "gridfreq/errors.hpp"
#include "gridfreq/grid_model.hpp"
#include "gridfreq/laplace_two_region.hpp"
#include "gridfreq/mode_fit.hpp"
#include "gridfreq/textdoc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace gridfreq;

namespace {

constexpr const char* kVersion = "gridfreq 0.1.0";

// Record of one invocation: what ran, on which inputs, and what it wrote.
// Reruns of the same command line must reproduce every listed file byte for
// byte, so the manifest doubles as a reproducibility receipt.
struct RunManifest {
    std::string command;
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write(const std::string& path) const {
        nlohmann::json j;
        j["command"] = command;
        j["config"] = config;
        if (seed_set) j["seed"] = seed;
        j["outputs"] = outputs;
        j["version"] = kVersion;
        std::chrono::duration<double> wall = std::chrono::steady_clock::now() - started;
        j["wall_clock_s"] = wall.count();
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot write manifest '" + path + "'");
        os << j.dump(2) << "\n";
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    return os;
}

FaultSpec required_fault(const SystemModel& sys, const std::string& config) {
    if (!sys.fault)
        throw ConfigError(config + ": needs a [fault] section for this command");
    return *sys.fault;
}

Limits required_limits(const SystemModel& sys, const std::string& config) {
    if (!sys.limits)
        throw ConfigError(config + ": needs a [limits] section for this command");
    return *sys.limits;
}

std::string fmt(double x) { return format_double(x); }

// ---- simulate --------------------------------------------------------------

int cmd_simulate(const std::string& config, double dt, double t_end, const std::string& out,
                 RunManifest& manifest) {
    SystemModel sys = load_system(config);
    FaultSpec fault = required_fault(sys, config);
    FrequencyTrace trace = simulate(sys, fault, dt, t_end);
    {
        std::ofstream os = open_out(out);
        write_trace_csv(trace, os);
    }
    manifest.outputs.push_back(out);

    TraceMetrics m = trace_metrics(trace, sys.T_g);
    std::cout << "simulated " << trace.samples() << " samples over " << fmt(t_end)
              << " s (dt = " << fmt(dt) << " s)\n";
    for (Eigen::Index i = 0; i < Eigen::Index(trace.region_ids.size()); ++i) {
        std::cout << "region " << trace.region_ids[i] << ": max |rocof| "
                  << fmt(m.rocof_max_abs(i)) << " Hz/s, nadir " << fmt(m.nadir(i)) << " Hz at "
                  << fmt(m.nadir_time(i)) << " s\n";
    }
    std::cout << "weighted deviation at t_end: " << fmt(m.qss) << " Hz\n";
    std::cout << "import conservation error: " << fmt(import_conservation_error(trace)) << "\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

// ---- coi -------------------------------------------------------------------

int cmd_coi(const std::string& config, const std::string& out, int samples,
            RunManifest& manifest) {
    SystemModel sys = load_system(config);
    FaultSpec fault = required_fault(sys, config);
    CoiParams p = aggregate(sys, fault);
    if (samples < 2) throw ConfigError("--samples must be at least 2");

    {
        std::ofstream os = open_out(out);
        os << "t,df\n";
        for (int k = 0; k < samples; ++k) {
            double t = p.T_g * k / (samples - 1);
            os << fmt(t) << "," << fmt(coi_frequency(p, t)) << "\n";
        }
    }
    manifest.outputs.push_back(out);

    CoiNadir nd = coi_nadir(p);
    std::cout << "aggregate: H " << fmt(p.H) << " MW*s, D' " << fmt(p.D_prime) << " MW/Hz, R "
              << fmt(p.R) << " MW, loss " << fmt(p.P_L) << " MW\n";
    std::cout << "initial rocof: " << fmt(coi_frequency_derivative(p, 0.0)) << " Hz/s\n";
    std::cout << "nadir: " << fmt(nd.nadir) << " Hz at " << fmt(nd.t_star) << " s\n";
    std::cout << "settled deviation (R - P_L)/D': " << fmt((p.R - p.P_L) / p.D_prime) << " Hz\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

// ---- analytic2 -------------------------------------------------------------

int cmd_analytic2(const std::string& config, const std::string& out, int samples,
                  RunManifest& manifest) {
    SystemModel sys = load_system(config);
    FaultSpec fault = required_fault(sys, config);
    if (sys.regions.size() != 2) throw ConfigError("analytic2 requires exactly 2 regions");
    if (samples < 2) throw ConfigError("--samples must be at least 2");

    std::array<RationalLaplace, 2> rl = build_laplace_solution(sys, fault);
    std::array<PartialFractions, 2> pf{partial_fractions(rl[0]), partial_fractions(rl[1])};
    std::array<TimeDomainSolution, 2> td{time_domain_solution(pf[0]),
                                         time_domain_solution(pf[1])};

    bool oscillatory = td[0].roots.conjugate_pair;
    std::cout << "root structure: "
              << (oscillatory ? "one real root and a complex-conjugate pair"
                              : "three real roots (no oscillatory mode)")
              << "\n";
    for (const std::complex<double>& z : td[0].roots.roots)
        std::cout << "  root " << fmt(z.real()) << (z.imag() >= 0 ? " + " : " - ")
                  << fmt(std::abs(z.imag())) << "i\n";

    if (oscillatory) {
        CoiParams p = aggregate(sys, fault);
        for (int i = 0; i < 2; ++i) {
            ModeExtraction mx = extract_modes(pf[i], p);
            std::cout << "region " << sys.regions[i].id << ": a " << fmt(mx.mode.a) << " 1/s, A "
                      << fmt(mx.mode.A) << " Hz, omega " << fmt(mx.mode.omega) << " rad/s, phi "
                      << fmt(mx.mode.phi) << " rad, C " << fmt(mx.mode.C) << " Hz\n";
            std::cout << "  aggregate-term gap over [0, T_g]: " << fmt(mx.coi_term_gap)
                      << " Hz\n";
        }
    }

    {
        std::ofstream os = open_out(out);
        os << "t,df_" << sys.regions[0].id << ",df_" << sys.regions[1].id << "\n";
        for (int k = 0; k < samples; ++k) {
            double t = sys.T_g * k / (samples - 1);
            os << fmt(t) << "," << fmt(td[0](t)) << "," << fmt(td[1](t)) << "\n";
        }
    }
    manifest.outputs.push_back(out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

// ---- fit -------------------------------------------------------------------

int cmd_fit(const std::string& config, const std::string& sweep_path,
            const std::string& out_models, const std::string& out_samples,
            std::optional<std::uint64_t> seed, RunManifest& manifest) {
    SystemModel sys = load_system(config);
    SweepSpec spec = load_sweep_spec(sweep_path);
    if (seed) spec.seed = *seed;
    manifest.seed = spec.seed;
    manifest.seed_set = true;

    SweepResult sweep = run_sweep(spec, sys);
    std::size_t total = sweep.samples.size() + sweep.excluded.size();
    std::cout << "sweep: " << total << " draws, " << sweep.samples.size() << " simulated, "
              << sweep.excluded.size() << " excluded (seed " << spec.seed << ")\n";
    for (const SweepExclusion& ex : sweep.excluded)
        std::cout << "  excluded draw " << ex.index << ": " << ex.reason << "\n";

    std::map<std::string, LinearModel> rocof = regress_rocof_term(sweep);
    std::map<std::string, LinearModel> integrals = regress_energy_integrals(sweep);
    std::vector<LinearModel> models;
    for (const auto& [key, m] : rocof) models.push_back(m);
    for (const auto& [key, m] : integrals) models.push_back(m);

    double worst_rms = 0.0;
    std::string worst_target;
    for (const LinearModel& m : models)
        if (m.rms >= worst_rms) {
            worst_rms = m.rms;
            worst_target = m.target;
        }
    std::cout << "models: " << models.size() << " fitted (" << rocof.size()
              << " initial-slope, " << integrals.size() << " energy-integral)\n";
    if (!models.empty())
        std::cout << "worst training rms: " << worst_target << " = " << fmt(worst_rms) << "\n";

    // closed-form cross-check of the fitted oscillation term, where it applies
    std::size_t checked = 0, close = 0;
    for (const SamplePoint& s : sweep.samples)
        for (const auto& [id, gap] : s.oscillation_check) {
            ++checked;
            if (gap <= 0.02) ++close;
        }
    if (checked > 0)
        std::cout << "oscillation cross-check: " << close << "/" << checked
                  << " fitted amplitudes within 2% of the rational solution\n";

    save_models(out_models, models);
    manifest.outputs.push_back(out_models);
    {
        std::ofstream os = open_out(out_samples);
        write_samples_csv(os, sweep);
    }
    manifest.outputs.push_back(out_samples);
    std::cout << "wrote " << out_models << ", " << out_samples << "\n";

    if (double(sweep.excluded.size()) > 0.01 * double(total)) {
        std::cerr << "error: " << sweep.excluded.size() << "/" << total
                  << " draws failed to simulate (more than 1%)\n";
        return 3;
    }
    return 0;
}

// ---- constraints -----------------------------------------------------------

int cmd_constraints(const std::string& config, const std::string& models_path, int grid_points,
                    const std::vector<std::string>& freeze, const std::string& out,
                    const std::string& out_lp, RunManifest& manifest) {
    SystemModel sys = load_system(config);
    FaultSpec fault = required_fault(sys, config);
    Limits limits = required_limits(sys, config);
    std::vector<LinearModel> models = load_models(models_path);
    if (grid_points < 1) throw ConfigError("--grid-points must be at least 1");

    // The k<j> model keys are positional, so a shorter grid than the models
    // were trained on would silently bind the wrong times. Demand a match.
    int trained = 0;
    for (const LinearModel& m : models)
        if (m.target.rfind("intf_", 0) == 0) {
            std::size_t kpos = m.target.rfind("_k");
            trained = std::max(trained, std::stoi(m.target.substr(kpos + 2)) + 1);
        }
    if (trained > 0 && grid_points != trained)
        throw ConfigError(models_path + ": models cover a " + std::to_string(trained) +
                          "-point nadir grid; pass --grid-points " + std::to_string(trained) +
                          " or refit with a matching time_grid");

    std::vector<double> grid;
    for (int j = 1; j <= grid_points; ++j) grid.push_back(sys.T_g * j / grid_points);

    GenOptions opt;
    opt.freeze.insert(freeze.begin(), freeze.end());
    ConstraintSet set = generate_constraints(sys, fault, models, limits, grid, opt);

    std::cout << "generated " << set.rocof.size() << " rocof + " << set.nadir.size()
              << " conditional nadir blocks + 1 qss (grid of " << set.time_grid.size()
              << " over (0, " << fmt(sys.T_g) << "] s)\n";
    std::cout << "decision symbols:";
    for (const std::string& s : set.decision_symbols) std::cout << " " << s;
    std::cout << "\n";
    for (const std::string& w : set.warnings) std::cout << "warning: " << w << "\n";

    save_constraints(out, set);
    manifest.outputs.push_back(out);
    if (!out_lp.empty()) {
        std::ofstream os = open_out(out_lp);
        write_constraints_lp(os, set);
        manifest.outputs.push_back(out_lp);
        std::cout << "wrote " << out << ", " << out_lp << "\n";
    } else {
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

// ---- validate ----------------------------------------------------------------

int cmd_validate(const std::string& config, const std::string& constraints_path,
                 const std::string& sweep_path, const std::string& out,
                 std::optional<std::uint64_t> seed, RunManifest& manifest) {
    SystemModel sys = load_system(config);
    ConstraintSet set = load_constraints(constraints_path);
    SweepSpec spec = load_sweep_spec(sweep_path);
    if (seed) spec.seed = *seed;
    manifest.seed = spec.seed;
    manifest.seed_set = true;

    ConservativenessReport rep = validate_constraints(set, spec, sys);
    std::cout << "validation sweep: " << rep.n_points << " points (seed " << spec.seed << ")\n";
    std::cout << "feasible under the constraint set: " << rep.n_feasible << "\n";
    std::cout << "feasible but insecure in simulation: " << rep.n_violations
              << " (rate " << fmt(rep.violation_rate) << ")\n";
    std::cout << "simulation-secure: " << rep.n_secure << ", of which rejected: "
              << rep.n_secure_rejected << " (over-conservativeness "
              << fmt(rep.over_conservativeness) << ")\n";
    auto worst = [](const std::vector<double>& v) {
        double m = std::numeric_limits<double>::infinity();
        for (double x : v) m = std::min(m, x);
        return m;
    };
    if (rep.n_feasible > 0) {
        std::cout << "smallest feasible margin: rocof " << fmt(worst(rep.rocof_margin))
                  << " Hz/s, nadir " << fmt(worst(rep.nadir_margin)) << " Hz, qss "
                  << fmt(worst(rep.qss_margin)) << " Hz\n";
    }
    for (const std::string& v : rep.violations) std::cout << "violation: " << v << "\n";

    if (!out.empty()) {
        TextDoc doc;
        DocSection sec;
        sec.name = "report";
        sec.set("n_points", DocValue::of(double(rep.n_points)));
        sec.set("n_feasible", DocValue::of(double(rep.n_feasible)));
        sec.set("n_violations", DocValue::of(double(rep.n_violations)));
        sec.set("n_secure", DocValue::of(double(rep.n_secure)));
        sec.set("n_secure_rejected", DocValue::of(double(rep.n_secure_rejected)));
        sec.set("violation_rate", DocValue::of(rep.violation_rate));
        sec.set("over_conservativeness", DocValue::of(rep.over_conservativeness));
        sec.set("rocof_margin", DocValue::list(rep.rocof_margin));
        sec.set("nadir_margin", DocValue::list(rep.nadir_margin));
        sec.set("qss_margin", DocValue::list(rep.qss_margin));
        sec.set("violations", DocValue::list(rep.violations));
        doc.sections.push_back(sec);
        save_textdoc(doc, out);
        manifest.outputs.push_back(out);
        std::cout << "wrote " << out << "\n";
    }
    return rep.n_violations > 0 ? 4 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"regional frequency dynamics and linear security constraints"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt = app.add_option("--seed", seed_value, "override the sweep seed");
    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "write a JSON run manifest here");

    std::string config, sweep_path, models_path, constraints_path;
    double dt = 1e-3, t_end = 30.0;
    int samples = 1001, grid_points = 10;
    std::string out_trace = "trace.csv", out_coi = "coi.csv", out_analytic = "analytic2.csv";
    std::string out_models = "models.toml", out_samples = "samples.csv";
    std::string out_constraints = "constraints.toml", out_lp, out_report;
    std::vector<std::string> freeze;

    CLI::App* c_sim = app.add_subcommand("simulate", "integrate a post-fault scenario");
    c_sim->add_option("config", config, "system description")->required();
    c_sim->add_option("--dt", dt, "integration step, s");
    c_sim->add_option("--t-end", t_end, "horizon, s");
    c_sim->add_option("--out", out_trace, "trace CSV path");

    CLI::App* c_coi = app.add_subcommand("coi", "closed-form aggregate response");
    c_coi->add_option("config", config, "system description")->required();
    c_coi->add_option("--out", out_coi, "aggregate trace CSV path");
    c_coi->add_option("--samples", samples, "points over [0, T_g]");

    CLI::App* c_ana = app.add_subcommand("analytic2", "two-region rational solution");
    c_ana->add_option("config", config, "system description")->required();
    c_ana->add_option("--out", out_analytic, "closed-form trace CSV path");
    c_ana->add_option("--samples", samples, "points over [0, T_g]");

    CLI::App* c_fit = app.add_subcommand("fit", "sweep simulations and regress models");
    c_fit->add_option("config", config, "base system description")->required();
    c_fit->add_option("sweep", sweep_path, "sweep description")->required();
    c_fit->add_option("--out-models", out_models, "fitted model file");
    c_fit->add_option("--out-samples", out_samples, "sample table CSV");

    CLI::App* c_gen = app.add_subcommand("constraints", "synthesize security constraints");
    c_gen->add_option("config", config, "system description")->required();
    c_gen->add_option("models", models_path, "fitted model file")->required();
    c_gen->add_option("--grid-points", grid_points, "nadir time-grid density over (0, T_g]");
    c_gen->add_option("--freeze", freeze, "decision symbols to fold at current values");
    c_gen->add_option("--out", out_constraints, "constraint file");
    c_gen->add_option("--out-lp", out_lp, "flat inequality listing");

    CLI::App* c_val = app.add_subcommand("validate", "check constraints against simulation");
    c_val->add_option("config", config, "base system description")->required();
    c_val->add_option("constraints", constraints_path, "constraint file")->required();
    c_val->add_option("sweep", sweep_path, "validation sweep description")->required();
    c_val->add_option("--out", out_report, "report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunManifest manifest;
    manifest.config = config;
    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) {
        seed = seed_value;
        manifest.seed = seed_value;
        manifest.seed_set = true;
    }

    int rc = 0;
    try {
        if (app.got_subcommand(c_sim)) {
            manifest.command = "simulate";
            rc = cmd_simulate(config, dt, t_end, out_trace, manifest);
        } else if (app.got_subcommand(c_coi)) {
            manifest.command = "coi";
            rc = cmd_coi(config, out_coi, samples, manifest);
        } else if (app.got_subcommand(c_ana)) {
            manifest.command = "analytic2";
            rc = cmd_analytic2(config, out_analytic, samples, manifest);
        } else if (app.got_subcommand(c_fit)) {
            manifest.command = "fit";
            rc = cmd_fit(config, sweep_path, out_models, out_samples, seed, manifest);
        } else if (app.got_subcommand(c_gen)) {
            manifest.command = "constraints";
            rc = cmd_constraints(config, models_path, grid_points, freeze, out_constraints,
                                 out_lp, manifest);
        } else if (app.got_subcommand(c_val)) {
            manifest.command = "validate";
            rc = cmd_validate(config, constraints_path, sweep_path, out_report, seed, manifest);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }

    if (!manifest_path.empty()) {
        try {
            manifest.write(manifest_path);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }
    return rc;
}
