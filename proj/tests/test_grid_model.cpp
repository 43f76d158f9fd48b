#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridfreq/errors.hpp"
#include "gridfreq/grid_model.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace gridfreq;

namespace {

std::string two_region_text(const std::string& extra = "") {
    return R"([system]
t_g = 10

[[region]]
id = "EN"
h = 1.0e5
d = 0.005
p_d = 2.0e4
r = 1500

[[region]]
id = "SC"
h = 1.5e4
d = 0.005
p_d = 4.0e3
r = 300

[[line]]
from = "EN"
to = "SC"
v_from = 400
v_to = 400
x = 100
delta_ss_from = 0
delta_ss_to = 0
)" + extra;
}

} // namespace

TEST_CASE("stiffness of an unloaded 400 kV / 100 ohm tie is 2*pi*1600 MW") {
    Line ln;
    ln.from = "a";
    ln.to = "b";
    ln.V_from = 400;
    ln.V_to = 400;
    ln.X = 100;
    ln.has_angles = true;
    ln.delta_ss_from = 0;
    ln.delta_ss_to = 0;
    CHECK(compute_stiffness(ln) == doctest::Approx(2 * std::numbers::pi * 1600.0).epsilon(1e-14));

    ln.delta_ss_from = 0.3; // cos shrinks the stiffness
    CHECK(compute_stiffness(ln) ==
          doctest::Approx(2 * std::numbers::pi * 1600.0 * std::cos(0.3)).epsilon(1e-14));

    ln.delta_ss_from = 1.6; // past quadrature: no restoring torque left
    CHECK_THROWS_AS(compute_stiffness(ln), ConfigError);
    ln.delta_ss_from = 0;
    ln.X = 0;
    CHECK_THROWS_AS(compute_stiffness(ln), ConfigError);
}

TEST_CASE("config parses into a validated model") {
    SystemModel sys = parse_system(two_region_text(), "mem");
    REQUIRE(sys.regions.size() == 2);
    CHECK(sys.T_g == 10.0);
    CHECK(sys.base_frequency == 50.0); // default
    CHECK(sys.index_of("SC") == 1);
    CHECK(sys.index_of("nope") == -1);
    CHECK(sys.regions[0].d_prime() == doctest::Approx(100.0));
    CHECK(sys.total_inertia() == doctest::Approx(1.15e5));
    CHECK(sys.total_d_prime() == doctest::Approx(120.0));
    CHECK(sys.total_pfr() == doctest::Approx(1800.0));
    REQUIRE(sys.lines.size() == 1);
    CHECK(sys.lines[0].T == doctest::Approx(2 * std::numbers::pi * 1600.0));

    Eigen::MatrixXd L = sys.stiffness_laplacian();
    CHECK(L(0, 0) == doctest::Approx(sys.lines[0].T));
    CHECK(L(0, 1) == doctest::Approx(-sys.lines[0].T));
    CHECK((L * Eigen::Vector2d::Ones()).norm() == doctest::Approx(0.0)); // rows sum to zero
}

TEST_CASE("validation failures name the offending field") {
    auto expect_config_error = [](const std::string& text, const std::string& needle) {
        try {
            parse_system(text, "mem");
            FAIL("expected a rejection containing '", needle, "'");
        } catch (const ConfigError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                          "message was: ", e.what());
        }
    };

    std::string bad_h = two_region_text();
    bad_h.replace(bad_h.find("h = 1.0e5"), 9, "h = -1e5 ");
    expect_config_error(bad_h, "region[0] (EN).h");

    std::string dup = two_region_text();
    dup.replace(dup.find("id = \"SC\""), 9, "id = \"EN\"");
    expect_config_error(dup, "duplicate region label");

    std::string bad_lim = two_region_text("\n[limits]\nrocof_max = 0.125\ndf_max = 0.5\ndf_ss_max = 0.8\n");
    expect_config_error(bad_lim, "df_ss_max");

    std::string bad_fault = two_region_text("\n[fault]\nregion = \"WA\"\np_l = 1000\n");
    expect_config_error(bad_fault, "fault.region");

    std::string missing = two_region_text();
    missing.erase(missing.find("p_d = 2.0e4"), 11);
    expect_config_error(missing, "region[0].p_d");

    // one line with angles, one without
    std::string mixed = two_region_text(R"(
[[region]]
id = "WA"
h = 5e3
d = 0.005
p_d = 1e3

[[line]]
from = "SC"
to = "WA"
v_from = 400
v_to = 275
x = 30
)");
    expect_config_error(mixed, "every line or on none");

    // disconnected region
    std::string island = two_region_text(R"(
[[region]]
id = "WA"
h = 5e3
d = 0.005
p_d = 1e3
)");
    expect_config_error(island, "not connected");
}

TEST_CASE("limits and fault sections are optional but validated") {
    std::string ok = two_region_text(
        "\n[limits]\nrocof_max = 0.125\ndf_max = 0.8\ndf_ss_max = 0.5\n"
        "\n[fault]\nregion = \"SC\"\np_l = 1000\n");
    SystemModel sys = parse_system(ok, "mem");
    REQUIRE(sys.limits.has_value());
    CHECK(sys.limits->df_max == 0.8);
    REQUIRE(sys.fault.has_value());
    CHECK(sys.fault->region == "SC");
    CHECK(sys.fault->P_L == 1000.0);
}

TEST_CASE("angle solve balances flows against injections") {
    // star of three regions; slack angle pinned at the first region
    std::string text = R"([[region]]
id = "a"
h = 1e4
d = 0.005
p_d = 1e4
injection = 500

[[region]]
id = "b"
h = 1e4
d = 0.005
p_d = 1e4
injection = -200

[[region]]
id = "c"
h = 1e4
d = 0.005
p_d = 1e4
injection = -300

[[line]]
from = "a"
to = "b"
v_from = 400
v_to = 400
x = 80

[[line]]
from = "a"
to = "c"
v_from = 400
v_to = 275
x = 60
)";
    SystemModel sys = parse_system(text, "mem");
    REQUIRE(sys.lines.size() == 2);
    CHECK(sys.lines[0].delta_ss_from == 0.0); // slack

    // flow on a-b must equal what b consumes
    double b_ab = 400.0 * 400.0 / 80.0;
    double flow_ab = b_ab * (sys.lines[0].delta_ss_from - sys.lines[0].delta_ss_to);
    CHECK(flow_ab == doctest::Approx(200.0).epsilon(1e-12));
    double b_ac = 400.0 * 275.0 / 60.0;
    double flow_ac = b_ac * (sys.lines[1].delta_ss_from - sys.lines[1].delta_ss_to);
    CHECK(flow_ac == doctest::Approx(300.0).epsilon(1e-12));

    // stiffness reflects the solved angle gap
    double gap = sys.lines[0].delta_ss_from - sys.lines[0].delta_ss_to;
    CHECK(sys.lines[0].T == doctest::Approx(2 * std::numbers::pi * b_ab * std::cos(gap)));

    // unbalanced injections are rejected
    std::string bad = text;
    bad.replace(bad.find("injection = -300"), 16, "injection = -250");
    CHECK_THROWS_AS(parse_system(bad, "mem"), ConfigError);
}

TEST_CASE("explicit angles are honoured verbatim") {
    SystemModel sys = parse_system(two_region_text(), "mem");
    CHECK(sys.lines[0].delta_ss_from == 0.0);
    CHECK(sys.lines[0].delta_ss_to == 0.0);

    std::string tilted = two_region_text();
    tilted.replace(tilted.find("delta_ss_from = 0"), 17, "delta_ss_from = 0.2");
    SystemModel t = parse_system(tilted, "mem");
    CHECK(t.lines[0].T == doctest::Approx(2 * std::numbers::pi * 1600.0 * std::cos(0.2)));
}

TEST_CASE("export then parse reproduces the model exactly") {
    std::string text = two_region_text(
        "\n[limits]\nrocof_max = 0.125\ndf_max = 0.8\ndf_ss_max = 0.5\n"
        "\n[fault]\nregion = \"SC\"\np_l = 1234.5678901234567\n");
    SystemModel a = parse_system(text, "mem");
    SystemModel b = parse_system(export_config(a), "export");

    REQUIRE(a.regions.size() == b.regions.size());
    for (size_t i = 0; i < a.regions.size(); ++i) {
        CHECK(a.regions[i].id == b.regions[i].id);
        CHECK(a.regions[i].H == b.regions[i].H);
        CHECK(a.regions[i].D == b.regions[i].D);
        CHECK(a.regions[i].P_D == b.regions[i].P_D);
        CHECK(a.regions[i].R == b.regions[i].R);
    }
    REQUIRE(a.lines.size() == b.lines.size());
    CHECK(a.lines[0].T == b.lines[0].T); // bit-identical through the round trip
    CHECK(a.fault->P_L == b.fault->P_L);
}

TEST_CASE("random dense networks solve with tiny residuals") {
    std::mt19937_64 rng(7);
    auto unif = [&](double lo, double hi) {
        return lo + (hi - lo) * (double(rng() >> 11) * 0x1p-53);
    };
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + int(rng() % 4);
        SystemModel sys;
        for (int i = 0; i < n; ++i) {
            RegionParams r;
            r.id = "r" + std::to_string(i);
            r.H = unif(5e3, 1.5e5);
            r.D = unif(0.001, 0.01);
            r.P_D = unif(1e3, 5e4);
            sys.regions.push_back(r);
        }
        // ring + random chords keeps it connected
        for (int i = 0; i < n; ++i) {
            Line ln;
            ln.from = sys.regions[i].id;
            ln.to = sys.regions[(i + 1) % n].id;
            ln.V_from = 400;
            ln.V_to = 400;
            ln.X = unif(20, 200);
            if (n > 2 || i == 0) sys.lines.push_back(ln);
        }
        double acc = 0;
        for (int i = 0; i + 1 < n; ++i) {
            double inj = unif(-400, 400);
            sys.regions[i].injection = inj;
            acc += inj;
        }
        sys.regions[n - 1].injection = -acc;

        finalize_system(sys);
        for (const auto& ln : sys.lines) CHECK(ln.T > 0);

        Eigen::VectorXd inj(n);
        for (int i = 0; i < n; ++i) inj[i] = sys.regions[i].injection;
        Eigen::VectorXd angles = solve_steady_state_angles(sys, inj);
        CHECK(angles[0] == 0.0);
    }
}
