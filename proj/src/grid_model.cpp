#include "gridfreq/grid_model.hpp"
#include "gridfreq/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace gridfreq {

int SystemModel::index_of(const std::string& id) const {
    for (size_t i = 0; i < regions.size(); ++i)
        if (regions[i].id == id) return static_cast<int>(i);
    return -1;
}

double SystemModel::total_inertia() const {
    double h = 0;
    for (const auto& r : regions) h += r.H;
    return h;
}

double SystemModel::total_d_prime() const {
    double d = 0;
    for (const auto& r : regions) d += r.d_prime();
    return d;
}

double SystemModel::total_pfr() const {
    double r = 0;
    for (const auto& g : regions) r += g.R;
    return r;
}

Eigen::MatrixXd SystemModel::stiffness_laplacian() const {
    const auto n = static_cast<Eigen::Index>(regions.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const auto& ln : lines) {
        int i = index_of(ln.from), j = index_of(ln.to);
        L(i, i) += ln.T;
        L(j, j) += ln.T;
        L(i, j) -= ln.T;
        L(j, i) -= ln.T;
    }
    return L;
}

double compute_stiffness(const Line& line) {
    if (line.X <= 0)
        throw ConfigError("line " + line.from + "-" + line.to + ".x: non-positive reactance");
    if (!line.has_angles)
        throw ConfigError("line " + line.from + "-" + line.to + ": missing steady-state angles");
    double gap = line.delta_ss_from - line.delta_ss_to;
    double T = 2.0 * std::numbers::pi * (line.V_from * line.V_to / line.X) * std::cos(gap);
    if (T <= 0)
        throw ConfigError("line " + line.from + "-" + line.to +
                          ": steady-state angle separation leaves no synchronising stiffness (|δi-δj| ≥ π/2)");
    return T;
}

Eigen::VectorXd solve_steady_state_angles(const SystemModel& sys, const Eigen::VectorXd& injections) {
    const auto n = static_cast<Eigen::Index>(sys.regions.size());
    if (injections.size() != n)
        throw ConfigError("angle solve: injection vector size does not match region count");

    double imbalance = injections.sum();
    double scale = std::max(1.0, injections.cwiseAbs().maxCoeff());
    if (std::abs(imbalance) > 1e-6 * scale)
        throw ConfigError("angle solve: unbalanced injections (sum = " + format_double(imbalance) + " MW)");

    if (n == 1) return Eigen::VectorXd::Zero(1);

    // Susceptance-weighted Laplacian, b_ij = V_i·V_j / X_ij (MW/rad).
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (const auto& ln : sys.lines) {
        int i = sys.index_of(ln.from), j = sys.index_of(ln.to);
        double b = ln.V_from * ln.V_to / ln.X;
        B(i, i) += b;
        B(j, j) += b;
        B(i, j) -= b;
        B(j, i) -= b;
    }

    // Slack at region 0: drop its row/column, solve the reduced system.
    Eigen::MatrixXd Br = B.bottomRightCorner(n - 1, n - 1);
    Eigen::VectorXd pr = injections.tail(n - 1);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Br);
    if (!lu.isInvertible())
        throw ConfigError("angle solve: singular network matrix (is the line graph connected?)");
    Eigen::VectorXd angles = Eigen::VectorXd::Zero(n);
    angles.tail(n - 1) = lu.solve(pr);

    Eigen::VectorXd residual = B * angles - injections;
    if (residual.cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw NumericError("angle solve: flow balance residual above 1e-9 MW");
    return angles;
}

namespace {

void check_positive(double v, const std::string& path) {
    if (!(v > 0)) throw ConfigError(path + ": non-positive value (" + format_double(v) + ")");
}

void check_nonnegative(double v, const std::string& path) {
    if (v < 0) throw ConfigError(path + ": negative value (" + format_double(v) + ")");
}

void check_connected(const SystemModel& sys) {
    const size_t n = sys.regions.size();
    if (n <= 1) return;
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        int at = stack.back();
        stack.pop_back();
        for (const auto& ln : sys.lines) {
            int i = sys.index_of(ln.from), j = sys.index_of(ln.to);
            int other = (i == at) ? j : (j == at ? i : -1);
            if (other >= 0 && !seen[other]) {
                seen[other] = 1;
                stack.push_back(other);
            }
        }
    }
    for (size_t i = 0; i < n; ++i)
        if (!seen[i])
            throw ConfigError("region " + sys.regions[i].id + ": not connected to the rest of the line graph");
}

} // namespace

void finalize_system(SystemModel& sys) {
    if (sys.regions.empty()) throw ConfigError("config: at least one [[region]] is required");
    check_positive(sys.T_g, "system.t_g");
    check_positive(sys.base_frequency, "system.base_frequency");

    std::set<std::string> ids;
    for (size_t i = 0; i < sys.regions.size(); ++i) {
        const auto& r = sys.regions[i];
        std::string path = "region[" + std::to_string(i) + "] (" + r.id + ")";
        if (r.id.empty()) throw ConfigError(path + ".id: empty region label");
        if (!ids.insert(r.id).second) throw ConfigError(path + ".id: duplicate region label");
        check_positive(r.H, path + ".h");
        check_positive(r.P_D, path + ".p_d");
        check_nonnegative(r.D, path + ".d");
        check_nonnegative(r.R, path + ".r");
        check_nonnegative(r.EFR, path + ".efr");
        check_nonnegative(r.EFR_delay, path + ".efr_delay");
        check_nonnegative(r.P_L, path + ".p_l");
    }

    for (size_t i = 0; i < sys.lines.size(); ++i) {
        auto& ln = sys.lines[i];
        std::string path = "line[" + std::to_string(i) + "] (" + ln.from + "-" + ln.to + ")";
        if (sys.index_of(ln.from) < 0) throw ConfigError(path + ".from: unknown region '" + ln.from + "'");
        if (sys.index_of(ln.to) < 0) throw ConfigError(path + ".to: unknown region '" + ln.to + "'");
        if (ln.from == ln.to) throw ConfigError(path + ": line endpoints must differ");
        check_positive(ln.V_from, path + ".v_from");
        check_positive(ln.V_to, path + ".v_to");
        if (!(ln.X > 0)) throw ConfigError(path + ".x: non-positive reactance");
    }
    check_connected(sys);

    // Steady-state angles: either every line carries them in the config, or we
    // compute all of them from the pre-fault injections (mixing is ambiguous).
    size_t with_angles = 0;
    for (const auto& ln : sys.lines)
        if (ln.has_angles) ++with_angles;
    if (with_angles != 0 && with_angles != sys.lines.size())
        throw ConfigError("config: steady-state angles must be given on every line or on none");

    if (with_angles == 0 && !sys.lines.empty()) {
        Eigen::VectorXd inj(static_cast<Eigen::Index>(sys.regions.size()));
        for (size_t i = 0; i < sys.regions.size(); ++i) inj[static_cast<Eigen::Index>(i)] = sys.regions[i].injection;
        Eigen::VectorXd angles = solve_steady_state_angles(sys, inj);
        for (auto& ln : sys.lines) {
            ln.delta_ss_from = angles[sys.index_of(ln.from)];
            ln.delta_ss_to = angles[sys.index_of(ln.to)];
            ln.has_angles = true;
        }
    }

    for (size_t i = 0; i < sys.lines.size(); ++i) {
        auto& ln = sys.lines[i];
        double gap = std::abs(ln.delta_ss_from - ln.delta_ss_to);
        if (gap >= std::numbers::pi / 2)
            throw ConfigError("line[" + std::to_string(i) + "] (" + ln.from + "-" + ln.to +
                              "): steady-state angle separation " + format_double(gap) +
                              " rad is outside the linearisation range (< π/2)");
        ln.T = compute_stiffness(ln);
    }

    if (sys.limits) {
        check_positive(sys.limits->rocof_max, "limits.rocof_max");
        check_positive(sys.limits->df_max, "limits.df_max");
        check_positive(sys.limits->df_ss_max, "limits.df_ss_max");
        if (sys.limits->df_ss_max > sys.limits->df_max)
            throw ConfigError("limits.df_ss_max: must not exceed limits.df_max");
    }

    if (sys.fault) {
        if (sys.index_of(sys.fault->region) < 0)
            throw ConfigError("fault.region: unknown region '" + sys.fault->region + "'");
        // Note: a zero-size fault is accepted (useful for equilibrium checks);
        // analyses that need a strict loss say so at their own entry points.
        check_nonnegative(sys.fault->P_L, "fault.p_l");
    }
}

SystemModel parse_system(std::string_view text, const std::string& origin) {
    TextDoc doc = parse_textdoc(text, origin);
    SystemModel sys;

    if (const DocSection* s = doc.find_one("system")) {
        sys.T_g = s->get_number_or("t_g", 10.0);
        sys.base_frequency = s->get_number_or("base_frequency", 50.0);
    }

    auto region_secs = doc.find_all("region");
    for (size_t i = 0; i < region_secs.size(); ++i) {
        const DocSection* s = region_secs[i];
        std::string where = "region[" + std::to_string(i) + "]";
        RegionParams r;
        r.id = s->get_string("id", where);
        r.H = s->get_number("h", where);
        r.D = s->get_number("d", where);
        r.P_D = s->get_number("p_d", where);
        r.R = s->get_number_or("r", 0.0);
        r.EFR = s->get_number_or("efr", 0.0);
        r.EFR_delay = s->get_number_or("efr_delay", 0.0);
        r.P_L = s->get_number_or("p_l", 0.0);
        r.injection = s->get_number_or("injection", 0.0);
        sys.regions.push_back(std::move(r));
    }

    auto line_secs = doc.find_all("line");
    for (size_t i = 0; i < line_secs.size(); ++i) {
        const DocSection* s = line_secs[i];
        std::string where = "line[" + std::to_string(i) + "]";
        Line ln;
        ln.from = s->get_string("from", where);
        ln.to = s->get_string("to", where);
        ln.V_from = s->get_number("v_from", where);
        ln.V_to = s->get_number("v_to", where);
        ln.X = s->get_number("x", where);
        bool has_from = s->has("delta_ss_from"), has_to = s->has("delta_ss_to");
        if (has_from != has_to)
            throw ConfigError(where + ": give both delta_ss_from and delta_ss_to or neither");
        if (has_from) {
            ln.delta_ss_from = s->get_number("delta_ss_from", where);
            ln.delta_ss_to = s->get_number("delta_ss_to", where);
            ln.has_angles = true;
        }
        sys.lines.push_back(std::move(ln));
    }

    if (const DocSection* s = doc.find_one("limits")) {
        Limits lim;
        lim.rocof_max = s->get_number("rocof_max", "limits");
        lim.df_max = s->get_number("df_max", "limits");
        lim.df_ss_max = s->get_number("df_ss_max", "limits");
        sys.limits = lim;
    }

    if (const DocSection* s = doc.find_one("fault")) {
        FaultSpec f;
        f.region = s->get_string("region", "fault");
        f.P_L = s->get_number("p_l", "fault");
        sys.fault = f;
    }

    finalize_system(sys);
    return sys;
}

SystemModel load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system(buf.str(), path);
}

std::string export_config(const SystemModel& sys) {
    TextDoc doc;

    DocSection system;
    system.name = "system";
    system.set("t_g", DocValue::of(sys.T_g));
    system.set("base_frequency", DocValue::of(sys.base_frequency));
    doc.sections.push_back(system);

    for (const auto& r : sys.regions) {
        DocSection s;
        s.name = "region";
        s.is_array = true;
        s.set("id", DocValue::of(r.id));
        s.set("h", DocValue::of(r.H));
        s.set("d", DocValue::of(r.D));
        s.set("p_d", DocValue::of(r.P_D));
        s.set("r", DocValue::of(r.R));
        s.set("efr", DocValue::of(r.EFR));
        s.set("efr_delay", DocValue::of(r.EFR_delay));
        s.set("p_l", DocValue::of(r.P_L));
        s.set("injection", DocValue::of(r.injection));
        doc.sections.push_back(std::move(s));
    }

    for (const auto& ln : sys.lines) {
        DocSection s;
        s.name = "line";
        s.is_array = true;
        s.set("from", DocValue::of(ln.from));
        s.set("to", DocValue::of(ln.to));
        s.set("v_from", DocValue::of(ln.V_from));
        s.set("v_to", DocValue::of(ln.V_to));
        s.set("x", DocValue::of(ln.X));
        s.set("delta_ss_from", DocValue::of(ln.delta_ss_from));
        s.set("delta_ss_to", DocValue::of(ln.delta_ss_to));
        doc.sections.push_back(std::move(s));
    }

    if (sys.limits) {
        DocSection s;
        s.name = "limits";
        s.set("rocof_max", DocValue::of(sys.limits->rocof_max));
        s.set("df_max", DocValue::of(sys.limits->df_max));
        s.set("df_ss_max", DocValue::of(sys.limits->df_ss_max));
        doc.sections.push_back(std::move(s));
    }

    if (sys.fault) {
        DocSection s;
        s.name = "fault";
        s.set("region", DocValue::of(sys.fault->region));
        s.set("p_l", DocValue::of(sys.fault->P_L));
        doc.sections.push_back(std::move(s));
    }

    return render_textdoc(doc);
}

} // namespace gridfreq
