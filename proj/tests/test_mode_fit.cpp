#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridfreq/coi_analytic.hpp"
#include "gridfreq/errors.hpp"
#include "gridfreq/mode_fit.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

using namespace gridfreq;

namespace {

SystemModel two_regions(double H1, double H2, double Dp1, double Dp2, double R1, double R2,
                        double X = 100.0) {
    SystemModel sys;
    RegionParams a, b;
    a.id = "EN";
    a.H = H1;
    a.P_D = 1e4;
    a.D = Dp1 / a.P_D;
    a.R = R1;
    b.id = "SC";
    b.H = H2;
    b.P_D = 1e4;
    b.D = Dp2 / b.P_D;
    b.R = R2;
    sys.regions = {a, b};
    Line ln;
    ln.from = "EN";
    ln.to = "SC";
    ln.V_from = 400;
    ln.V_to = 400;
    ln.X = X;
    ln.has_angles = true;
    sys.lines = {ln};
    finalize_system(sys);
    return sys;
}

double wrapped_gap(double x, double y) {
    return std::abs(std::remainder(x - y, 2.0 * std::numbers::pi));
}

// hand-built sample cloud for the regression unit tests
std::vector<SamplePoint> synthetic_samples(int n, double (*f)(double, double), double noise_amp) {
    std::vector<SamplePoint> out;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ux(-2.0, 3.0), un(-1.0, 1.0);
    for (int k = 0; k < n; ++k) {
        SamplePoint pt;
        pt.index = k;
        double x1 = ux(rng), x2 = ux(rng);
        pt.features["x1"] = x1;
        pt.features["x2"] = x2;
        pt.features["x3"] = 7.5; // constant across the cloud
        pt.targets["y"] = f(x1, x2) + noise_amp * un(rng);
        out.push_back(pt);
    }
    return out;
}

} // namespace

TEST_CASE("damped-sinusoid fit recovers in-class signals to 1e-6") {
    struct Case {
        double a, A, w, phi, C;
    };
    for (const Case& c : {Case{0.35, 0.18, 2.2, 0.8, -0.05}, Case{0.05, 0.02, 0.45, -2.5, 0.01},
                          Case{1.2, 0.5, 6.0, 3.0, 0.0}}) {
        int n = 2001;
        Eigen::VectorXd t(n), y(n);
        for (int i = 0; i < n; ++i) {
            t[i] = 10.0 * i / (n - 1);
            y[i] = c.A * std::exp(-c.a * t[i]) * std::sin(c.w * t[i] + c.phi) + c.C;
        }
        SinusoidFit fit = fit_damped_sinusoid(t, y);
        CHECK(fit.converged);
        CHECK(std::abs(fit.mode.a - c.a) <= 1e-6);
        CHECK(std::abs(fit.mode.A - c.A) <= 1e-6);
        CHECK(std::abs(fit.mode.omega - c.w) <= 1e-6);
        CHECK(wrapped_gap(fit.mode.phi, c.phi) <= 1e-6);
        CHECK(std::abs(fit.mode.C - c.C) <= 1e-6);
        CHECK(fit.rms <= 1e-9);
    }
}

TEST_CASE("damped-sinusoid fit: degenerate channels") {
    int n = 64;
    Eigen::VectorXd t(n), zero = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) t[i] = 0.1 * i;

    SinusoidFit flat = fit_damped_sinusoid(t, zero);
    CHECK(flat.converged);
    CHECK(flat.mode.A == 0.0);

    Eigen::VectorXd offset = Eigen::VectorXd::Constant(n, -0.125);
    SinusoidFit off = fit_damped_sinusoid(t, offset);
    CHECK(off.converged);
    CHECK(off.mode.A == 0.0);
    CHECK(off.mode.C == doctest::Approx(-0.125).epsilon(1e-12));

    CHECK_THROWS_AS(fit_damped_sinusoid(t.head(4), zero.head(4)), ConfigError);
    CHECK_THROWS_AS(fit_damped_sinusoid(t, zero.head(10)), ConfigError);
}

TEST_CASE("fit on a simulated residual matches the closed-form mode within 2%") {
    SystemModel sys = two_regions(7e4, 1.4e4, 800, 300, 1500, 400);
    FaultSpec fault{"SC", 1200.0};
    FrequencyTrace tr = simulate(sys, fault, 1e-3, 30.0);

    int win = int(std::llround(sys.T_g / 1e-3)) + 1;
    Eigen::VectorXd fw = tr.weighted_mean();
    CoiParams coi = aggregate(sys, fault);
    auto rl = build_laplace_solution(sys, fault);
    ModeExtraction me0 = extract_modes(partial_fractions(rl[0]), coi);
    ModeExtraction me1 = extract_modes(partial_fractions(rl[1]), coi);
    std::complex<double> zbar = (sys.regions[0].H * me0.pair_residue +
                                 sys.regions[1].H * me1.pair_residue) /
                                (sys.regions[0].H + sys.regions[1].H);

    const ModeExtraction* me[2] = {&me0, &me1};
    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd y = tr.df.col(i).head(win) - fw.head(win);
        SinusoidFit fit = fit_damped_sinusoid(tr.t.head(win), y);
        CHECK(fit.converged);
        CHECK(std::abs(fit.mode.a - me[i]->mode.a) <= 0.02 * me[i]->mode.a);
        CHECK(std::abs(fit.mode.omega - me[i]->mode.omega) <= 0.02 * me[i]->mode.omega);
        double ana_A = 2.0 * std::abs(me[i]->pair_residue - zbar);
        CHECK(std::abs(fit.mode.A - ana_A) <= 0.02 * ana_A);
    }
}

TEST_CASE("degenerate one-point sweep equals a direct simulation") {
    SystemModel sys = two_regions(5e4, 1.5e4, 700, 300, 1200, 400);
    sys.fault = FaultSpec{"SC", 900.0};

    SweepSpec spec;
    spec.count = 1;
    spec.ranges["H_EN"] = {5e4, 5e4};
    spec.ranges["P_L"] = {900.0, 900.0};
    spec.seed = 3;
    SweepResult res = run_sweep(spec, sys);
    REQUIRE(res.samples.size() == 1);
    REQUIRE(res.excluded.empty());
    const SamplePoint& pt = res.samples[0];

    FrequencyTrace tr = simulate(sys, *sys.fault, spec.dt, spec.t_end);
    TraceMetrics tm = trace_metrics(tr, sys.T_g);
    CHECK(pt.targets.at("nadir_EN") == tm.nadir[0]);
    CHECK(pt.targets.at("nadir_SC") == tm.nadir[1]);
    CHECK(pt.targets.at("rocof_SC") == tm.rocof_max_abs[1]);
    CHECK(pt.targets.at("qss") == tm.qss);
    for (int j = 0; j < 10; ++j) {
        int idx = int(std::llround(res.time_grid[j] / spec.dt));
        CHECK(pt.targets.at("intf_EN_k" + std::to_string(j)) == tr.int_df(idx, 0));
        CHECK(pt.targets.at("intf_SC_k" + std::to_string(j)) == tr.int_df(idx, 1));
    }
    CHECK(pt.features.at("H_EN") == 5e4);
    CHECK(pt.features.at("P_L") == 900.0);
    CHECK(pt.features.at("fault_SC") == 1.0);
    CHECK(pt.features.at("P_L_over_H_fault") == doctest::Approx(900.0 / 1.5e4).epsilon(1e-15));

    // double integral of the tie difference, recomputed directly
    double acc = 0.0;
    int upto = int(std::llround(res.time_grid[2] / spec.dt));
    for (int s = 1; s <= upto; ++s)
        acc += 0.5 * spec.dt *
               ((tr.int_df(s - 1, 0) - tr.int_df(s - 1, 1)) + (tr.int_df(s, 0) - tr.int_df(s, 1)));
    CHECK(pt.targets.at("dd_EN_SC_k2") == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("identical seeds reproduce the sample stream bit-for-bit") {
    SystemModel sys = two_regions(6e4, 1.2e4, 600, 250, 1000, 300);
    sys.fault = FaultSpec{"EN", 1000.0};

    SweepSpec spec;
    spec.count = 12;
    spec.seed = 99;
    spec.ranges["H_EN"] = {3e4, 9e4};
    spec.ranges["R_SC"] = {200, 900};
    spec.ranges["P_L"] = {500, 1500};
    spec.fault_regions = {"EN", "SC"};

    SweepResult a = run_sweep(spec, sys);
    SweepResult b = run_sweep(spec, sys);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].features == b.samples[k].features);
        CHECK(a.samples[k].targets == b.samples[k].targets);
    }
}

TEST_CASE("latin-hypercube sweep cross-checks against the closed form") {
    SystemModel sys = two_regions(6e4, 1.5e4, 600, 250, 1200, 400);
    sys.fault = FaultSpec{"SC", 1000.0};

    SweepSpec spec;
    spec.count = 40;
    spec.seed = 2024;
    spec.ranges["H_EN"] = {3e4, 9e4};
    spec.ranges["H_SC"] = {8e3, 2e4};
    spec.ranges["Dp_EN"] = {400, 900};
    spec.ranges["Dp_SC"] = {150, 400};
    spec.ranges["R_EN"] = {800, 2000};
    spec.ranges["R_SC"] = {200, 800};
    spec.ranges["P_L"] = {600, 1500};

    SweepResult res = run_sweep(spec, sys);
    REQUIRE(res.samples.size() == 40);
    CHECK(res.excluded.empty());

    int checks = 0, close = 0, converged = 0;
    for (const SamplePoint& pt : res.samples) {
        if (pt.fits_converged) ++converged;
        for (const auto& [id, gap] : pt.oscillation_check) {
            ++checks;
            if (gap <= 0.02) ++close;
        }
    }
    CHECK(converged >= 38);
    CHECK(checks >= 76);
    CHECK(double(close) >= 0.95 * checks);

    // latin-hypercube stratification: each varying feature fills its range
    for (const auto& [key, range] : spec.ranges) {
        double lo = 1e300, hi = -1e300;
        for (const SamplePoint& pt : res.samples) {
            lo = std::min(lo, pt.features.at(key));
            hi = std::max(hi, pt.features.at(key));
        }
        CHECK(lo < range.lo + 1.5 * (range.hi - range.lo) / 40);
        CHECK(hi > range.hi - 1.5 * (range.hi - range.lo) / 40);
    }
}

TEST_CASE("grid scheme lays samples on lattice cell centres") {
    SystemModel sys = two_regions(5e4, 1.5e4, 600, 250, 1000, 400);
    sys.fault = FaultSpec{"SC", 800.0};

    SweepSpec spec;
    spec.scheme = "grid";
    spec.count = 4;
    spec.ranges["H_EN"] = {4e4, 8e4};
    spec.ranges["R_SC"] = {400, 800};
    spec.fault_regions = {"EN", "SC"};
    SweepResult res = run_sweep(spec, sys);
    REQUIRE(res.samples.size() == 4);

    std::vector<double> h, r;
    for (const SamplePoint& pt : res.samples) {
        h.push_back(pt.features.at("H_EN"));
        r.push_back(pt.features.at("R_SC"));
    }
    CHECK(h == std::vector<double>{5e4, 7e4, 5e4, 7e4});
    CHECK(r == std::vector<double>{500, 500, 700, 700});
    CHECK(res.samples[0].features.at("fault_EN") == 1.0);
    CHECK(res.samples[1].features.at("fault_SC") == 1.0);
    CHECK(res.samples[2].features.at("fault_EN") == 1.0);
}

TEST_CASE("diverging draws are excluded with a report") {
    SystemModel sys = two_regions(5e4, 1.5e4, 600, 250, 1000, 400);
    sys.fault = FaultSpec{"SC", 800.0};
    sys.regions[0].D = -500.0; // destabilised after validation, on purpose

    SweepSpec spec;
    spec.count = 3;
    spec.ranges["P_L"] = {800, 800};
    SweepResult res = run_sweep(spec, sys);
    CHECK(res.samples.empty());
    REQUIRE(res.excluded.size() == 3);
    CHECK(res.excluded[0].reason.find("diverged") != std::string::npos);
}

TEST_CASE("sweep validation rejects malformed specs") {
    SystemModel sys = two_regions(5e4, 1.5e4, 600, 250, 1000, 400);
    sys.fault = FaultSpec{"SC", 800.0};

    SweepSpec bad;
    bad.count = 0;
    CHECK_THROWS_AS(run_sweep(bad, sys), ConfigError);

    SweepSpec spec;
    spec.count = 2;
    spec.ranges["H_XX"] = {1e4, 2e4};
    CHECK_THROWS_WITH_AS(run_sweep(spec, sys), doctest::Contains("H_XX"), ConfigError);

    spec.ranges.clear();
    spec.ranges["H_EN"] = {9e4, 3e4};
    CHECK_THROWS_WITH_AS(run_sweep(spec, sys), doctest::Contains("inverted"), ConfigError);

    spec.ranges.clear();
    spec.ranges["H_EN"] = {100.0, 3e4}; // below the accepted envelope
    CHECK_THROWS_WITH_AS(run_sweep(spec, sys), doctest::Contains("accepted bounds"), ConfigError);

    spec.ranges.clear();
    spec.scheme = "sobol";
    CHECK_THROWS_AS(run_sweep(spec, sys), ConfigError);
    spec.scheme = "grid";

    spec.t_end = 5.0; // shorter than the ramp window
    CHECK_THROWS_AS(run_sweep(spec, sys), ConfigError);
    spec.t_end = 30.0;

    spec.time_grid = {2.0, 11.0};
    CHECK_THROWS_AS(run_sweep(spec, sys), ConfigError);
    spec.time_grid = {2.0, 2.0};
    CHECK_THROWS_AS(run_sweep(spec, sys), ConfigError);
    spec.time_grid.clear();

    spec.fault_regions = {"WL"};
    CHECK_THROWS_AS(run_sweep(spec, sys), ConfigError);
    spec.fault_regions.clear();

    SystemModel no_fault = two_regions(5e4, 1.5e4, 600, 250, 1000, 400);
    CHECK_THROWS_WITH_AS(run_sweep(spec, no_fault), doctest::Contains("loss location"),
                         ConfigError);
}

TEST_CASE("linear fit is exact on in-class targets and folds constants") {
    auto f = [](double x1, double x2) { return 3.0 + 2.0 * x1 - 0.5 * x2; };
    std::vector<SamplePoint> samples = synthetic_samples(60, f, 0.0);
    LinearModel m = fit_linear_model(samples, {"x1", "x2", "x3"}, "y", 7);

    CHECK(m.features == std::vector<std::string>{"x1", "x2"});
    CHECK(m.intercept == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m.coef[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.coef[1] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(m.rms <= 1e-9);
    CHECK(m.offset_upper <= 1e-9);
    CHECK(m.offset_lower >= -1e-9);
    CHECK(m.ranges.at("x3").lo == 7.5);
    CHECK(m.ranges.at("x3").hi == 7.5);

    std::map<std::string, double> pt{{"x1", 1.0}, {"x2", 2.0}};
    CHECK(m.predict(pt) == doctest::Approx(4.0).epsilon(1e-12));
    std::map<std::string, double> missing{{"x1", 1.0}};
    CHECK_THROWS_AS(m.predict(missing), ConfigError);

    CHECK(m.covers({{"x1", 0.0}, {"x2", 0.0}, {"x3", 7.5}}));
    CHECK(!m.covers({{"x1", 5.0}, {"x2", 0.0}}));
    CHECK(!m.covers({{"x3", 8.0}}));
}

TEST_CASE("conservative offsets bound every training sample") {
    auto f = [](double x1, double x2) { return 1.0 + x1 * x1 - 0.3 * x2 * x1; }; // not in class
    std::vector<SamplePoint> samples = synthetic_samples(80, f, 0.05);
    LinearModel m = fit_linear_model(samples, {"x1", "x2"}, "y", 7);

    CHECK(m.offset_upper > 0.0);
    CHECK(m.offset_lower < 0.0);
    for (const SamplePoint& pt : samples) {
        double pred = m.predict(pt.features);
        CHECK(pred + m.offset_upper >= pt.targets.at("y") - 1e-12);
        CHECK(pred + m.offset_lower <= pt.targets.at("y") + 1e-12);
        CHECK(std::abs(pt.targets.at("y") - pred) <= m.max_abs + 1e-12);
    }
}

TEST_CASE("regression preconditions: sample starvation and collinearity") {
    auto f = [](double x1, double x2) { return x1 + x2; };
    std::vector<SamplePoint> starved = synthetic_samples(25, f, 0.0);
    CHECK_THROWS_WITH_AS(fit_linear_model(starved, {"x1", "x2"}, "y", 0),
                         doctest::Contains("10 per coefficient"), ConfigError);

    std::vector<SamplePoint> collinear = synthetic_samples(80, f, 0.01);
    for (SamplePoint& pt : collinear) pt.features["x2"] = 2.0 * pt.features["x1"];
    CHECK_THROWS_AS(fit_linear_model(collinear, {"x1", "x2"}, "y", 0), NumericError);

    std::vector<SamplePoint> none;
    CHECK_THROWS_AS(fit_linear_model(none, {"x1"}, "y", 0), ConfigError);
}

TEST_CASE("rocof-term regression covers each region and keeps its promise") {
    SystemModel sys = two_regions(6e4, 1.5e4, 600, 250, 1200, 400);
    sys.fault = FaultSpec{"SC", 1000.0};

    SweepSpec spec;
    spec.count = 130;
    spec.seed = 11;
    spec.ranges["H_EN"] = {3e4, 9e4};
    spec.ranges["H_SC"] = {8e3, 2e4};
    spec.ranges["R_EN"] = {800, 2000};
    spec.ranges["P_L"] = {600, 1500};
    SweepResult res = run_sweep(spec, sys);
    REQUIRE(res.samples.size() == 130);

    std::map<std::string, LinearModel> models = regress_rocof_term(res);
    REQUIRE(models.count("EN"));
    REQUIRE(models.count("SC"));
    for (const auto& [id, m] : models) {
        CHECK(m.target == "Aomega_" + id);
        CHECK(m.n == 130);
        for (const SamplePoint& pt : res.samples)
            CHECK(m.predict(pt.features) + m.offset_upper >= pt.targets.at(m.target) - 1e-12);
    }
}

TEST_CASE("a zero-size loss zeroes every integral target and the fitted models") {
    SystemModel sys = two_regions(6e4, 1.5e4, 600, 250, 1200, 400);
    sys.fault = FaultSpec{"SC", 0.0}; // response never activates

    SweepSpec spec;
    spec.count = 40;
    spec.seed = 4;
    spec.ranges["H_EN"] = {3e4, 9e4};
    SweepResult res = run_sweep(spec, sys);
    REQUIRE(res.samples.size() == 40);

    for (const SamplePoint& pt : res.samples)
        for (const auto& [key, value] : pt.targets) CHECK(value == 0.0);

    std::map<std::string, LinearModel> models = regress_energy_integrals(res);
    CHECK(models.size() == 30); // 2 regions × 10 grid times + 1 line × 10
    for (const auto& [key, m] : models) {
        CHECK(std::abs(m.intercept) <= 1e-12);
        CHECK(m.offset_upper <= 1e-12);
        CHECK(m.offset_lower >= -1e-12);
    }
}

TEST_CASE("model files round-trip exactly") {
    SystemModel sys = two_regions(6e4, 1.5e4, 600, 250, 1200, 400);
    sys.fault = FaultSpec{"SC", 1000.0};
    SweepSpec spec;
    spec.count = 80;
    spec.seed = 8;
    spec.ranges["H_EN"] = {3e4, 9e4};
    // the faulted region's inertia must vary too, else P_L/H_fault is an
    // exact multiple of P_L and the regression rightly rejects the basis
    spec.ranges["H_SC"] = {8e3, 2e4};
    spec.ranges["P_L"] = {600, 1500};
    SweepResult res = run_sweep(spec, sys);
    std::map<std::string, LinearModel> rocof = regress_rocof_term(res);

    std::vector<LinearModel> models;
    for (const auto& [id, m] : rocof) models.push_back(m);
    std::string path = "mode_fit_models_roundtrip.toml";
    save_models(path, models);
    std::vector<LinearModel> back = load_models(path);

    REQUIRE(back.size() == models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        CHECK(back[i].target == models[i].target);
        CHECK(back[i].features == models[i].features);
        REQUIRE(back[i].coef.size() == models[i].coef.size());
        for (int c = 0; c < models[i].coef.size(); ++c)
            CHECK(back[i].coef[c] == models[i].coef[c]);
        CHECK(back[i].intercept == models[i].intercept);
        CHECK(back[i].offset_upper == models[i].offset_upper);
        CHECK(back[i].offset_lower == models[i].offset_lower);
        CHECK(back[i].rms == models[i].rms);
        CHECK(back[i].max_abs == models[i].max_abs);
        CHECK(back[i].n == models[i].n);
        CHECK(back[i].seed == models[i].seed);
        REQUIRE(back[i].ranges.size() == models[i].ranges.size());
        for (const auto& [key, range] : models[i].ranges) {
            CHECK(back[i].ranges.at(key).lo == range.lo);
            CHECK(back[i].ranges.at(key).hi == range.hi);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("sample CSV carries every feature and target column") {
    SystemModel sys = two_regions(6e4, 1.5e4, 600, 250, 1200, 400);
    sys.fault = FaultSpec{"SC", 1000.0};
    SweepSpec spec;
    spec.count = 3;
    spec.ranges["P_L"] = {600, 1500};
    SweepResult res = run_sweep(spec, sys);

    std::ostringstream os;
    write_samples_csv(os, res);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header.find("index") == 0);
    CHECK(header.find("H_EN") != std::string::npos);
    CHECK(header.find("Aomega_SC") != std::string::npos);
    CHECK(header.find("dd_EN_SC_k9") != std::string::npos);
    CHECK(header.find("fits_converged") != std::string::npos);
    int rows = 0;
    for (std::string line; std::getline(is, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("sweep-spec files parse with defaults and validation") {
    std::string text = "[sweep]\n"
                       "count = 25\n"
                       "seed = 7\n"
                       "fault_regions = [\"EN\", \"SC\"]\n"
                       "\n"
                       "[[range]]\n"
                       "name = \"H_EN\"\n"
                       "lo = 30000\n"
                       "hi = 90000\n"
                       "\n"
                       "[[range]]\n"
                       "name = \"P_L\"\n"
                       "lo = 600\n"
                       "hi = 1500\n";
    SweepSpec spec = parse_sweep_spec(parse_textdoc(text, "inline"));
    CHECK(spec.count == 25);
    CHECK(spec.seed == 7);
    CHECK(spec.scheme == "latin_hypercube");
    CHECK(spec.dt == 1e-3);
    CHECK(spec.t_end == 30.0);
    CHECK(spec.fault_regions == std::vector<std::string>{"EN", "SC"});
    CHECK(spec.ranges.at("H_EN").lo == 30000);
    CHECK(spec.ranges.at("P_L").hi == 1500);

    CHECK_THROWS_WITH_AS(parse_sweep_spec(parse_textdoc("[other]\nx = 1\n", "inline")),
                         doctest::Contains("[sweep]"), ConfigError);
    CHECK_THROWS_AS(parse_sweep_spec(parse_textdoc("[sweep]\ncount = 2.5\n", "inline")),
                    ConfigError);
    std::string dup = "[sweep]\ncount = 5\n[[range]]\nname = \"P_L\"\nlo = 600\nhi = 700\n"
                      "[[range]]\nname = \"P_L\"\nlo = 600\nhi = 800\n";
    CHECK_THROWS_WITH_AS(parse_sweep_spec(parse_textdoc(dup, "inline")),
                         doctest::Contains("twice"), ConfigError);
}
