#include "gridfreq/constraint_gen.hpp"

#include "gridfreq/errors.hpp"
#include "gridfreq/textdoc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace gridfreq {

double LinearInequality::lhs(const std::map<std::string, double>& symbol_values) const {
    double acc = 0.0;
    for (const auto& [sym, c] : coeffs) {
        auto it = symbol_values.find(sym);
        if (it == symbol_values.end())
            throw ConfigError("inequality '" + name + "' needs symbol '" + sym + "'");
        acc += c * it->second;
    }
    return acc;
}

namespace {

bool is_decision(const std::string& name, const SystemModel& sys) {
    if (name == "P_L") return true;
    for (const RegionParams& r : sys.regions)
        if (name == "H_" + r.id || name == "R_" + r.id || name == "EFR_" + r.id) return true;
    return false;
}

// Accumulates one inequality's canonical left side: symbol terms plus the
// already-known constant part (which lands on the right side, negated).
struct Canon {
    std::map<std::string, double> coeffs;
    double constant = 0.0;

    void add(const std::string& sym, double c) {
        if (c != 0.0) coeffs[sym] += c;
    }

    LinearInequality finish(const std::string& name, const std::string& sense,
                            const std::string& units, double base_rhs) const {
        LinearInequality q;
        q.name = name;
        q.sense = sense;
        q.units = units;
        q.rhs = base_rhs - constant;
        for (const auto& [sym, c] : coeffs)
            if (c != 0.0) q.coeffs[sym] = c;
        return q;
    }
};

struct GenContext {
    const SystemModel& sys;
    const FaultSpec& fault;
    const GenOptions& opt;
    std::map<std::string, double> values; // current operating point, by feature name
    std::vector<std::string>* warnings = nullptr;
    std::set<std::string> warned; // one extrapolation note per model

    bool symbolic(const std::string& name) const {
        return is_decision(name, sys) && opt.freeze.count(name) == 0;
    }

    double value(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end())
            throw ConfigError("model feature '" + name + "' is not a parameter of this system");
        return it->second;
    }

    // Place c·<name> on the canonical left side. Decisions stay symbolic,
    // frozen decisions and plain parameters fold at their current values, and
    // the reciprocal features stay symbolic as derived symbols while any of
    // their inputs is still a decision.
    void place(Canon& canon, const std::string& name, double c) {
        if (c == 0.0) return;
        if (symbolic(name)) {
            canon.add(name, c);
            return;
        }
        if (is_decision(name, sys)) {
            canon.constant += c * value(name);
            return;
        }
        if (name.rfind("inv_H_", 0) == 0) {
            const std::string h = name.substr(4);
            if (symbolic(h))
                canon.add(name, c);
            else
                canon.constant += c / value(h);
            return;
        }
        if (name == "P_L_over_H_fault") {
            const std::string h = "H_" + fault.region;
            if (symbolic("P_L") || symbolic(h))
                canon.add(name, c);
            else
                canon.constant += c * value("P_L") / value(h);
            return;
        }
        canon.constant += c * value(name);
    }

    // Expand multiplier·model(features). The training offset is applied in
    // the direction that can only tighten the constraint: a positive
    // multiplier over-estimates the term, a negative one under-estimates it.
    void expand(Canon& canon, const LinearModel& m, double multiplier) {
        if (multiplier == 0.0) return;
        for (std::size_t c = 0; c < m.features.size(); ++c)
            place(canon, m.features[c], multiplier * m.coef[c]);
        const double offset = multiplier > 0 ? m.offset_upper : m.offset_lower;
        canon.constant += multiplier * (m.intercept + offset);
        if (warnings && !m.covers(values) && warned.insert(m.target).second)
            warnings->push_back("model '" + m.target +
                                "' is extrapolating: the operating point leaves its training "
                                "ranges");
    }
};

std::vector<double> default_grid(const SystemModel& sys) {
    std::vector<double> grid;
    for (int j = 1; j <= 10; ++j) grid.push_back(sys.T_g * j / 10.0);
    return grid;
}

const LinearModel& require_model(const std::map<std::string, LinearModel>& models,
                                 const std::string& key) {
    auto it = models.find(key);
    if (it == models.end()) throw ConfigError("no fitted model for '" + key + "'");
    return it->second;
}

} // namespace

std::vector<LinearInequality> rocof_constraints(const SystemModel& sys, const FaultSpec& fault,
                                                const std::map<std::string, LinearModel>& aomega_models,
                                                const Limits& limits, const GenOptions& opt,
                                                std::vector<std::string>* warnings) {
    GenContext ctx{sys, fault, opt, system_features(sys, fault), warnings};
    bool coi_frozen = !ctx.symbolic("P_L");
    for (const RegionParams& r : sys.regions)
        coi_frozen = coi_frozen && !ctx.symbolic("H_" + r.id);

    std::vector<LinearInequality> out;
    for (const RegionParams& r : sys.regions) {
        const LinearModel& model = require_model(aomega_models, r.id);
        Canon canon;
        if (coi_frozen)
            canon.constant += ctx.value("P_L") / (2.0 * sys.total_inertia());
        else
            canon.add("coi_rocof", 1.0);
        ctx.expand(canon, model, 1.0);
        out.push_back(canon.finish("rocof_" + r.id, "<=", "Hz/s", limits.rocof_max));
    }
    return out;
}

std::vector<ConditionalBlock> nadir_constraints(const SystemModel& sys, const FaultSpec& fault,
                                                const std::map<std::string, LinearModel>& integral_models,
                                                const Limits& limits,
                                                const std::vector<double>& time_grid,
                                                const GenOptions& opt,
                                                std::vector<std::string>* warnings) {
    if (sys.index_of(fault.region) < 0)
        throw ConfigError("fault region '" + fault.region + "' not in the system");
    std::vector<double> grid = time_grid.empty() ? default_grid(sys) : time_grid;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!(grid[j] > 0) || grid[j] > sys.T_g)
            throw ConfigError("nadir time grid must lie in (0, T_g]");
        if (j > 0 && grid[j] <= grid[j - 1])
            throw ConfigError("nadir time grid must be strictly ascending");
    }

    GenContext ctx{sys, fault, opt, system_features(sys, fault), warnings};
    const double sum_dp = sys.total_d_prime();

    std::vector<ConditionalBlock> out;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double tk = grid[j];
        const std::string kj = "_k" + std::to_string(j);
        ConditionalBlock block;
        block.t_k = tk;

        // delivered response at tk already covers the loss, net of the
        // damping relief the admissible deviation buys system-wide
        Canon g;
        for (const RegionParams& r : sys.regions) ctx.place(g, "R_" + r.id, tk / sys.T_g);
        ctx.place(g, "P_L", -1.0);
        g.constant += limits.df_max * sum_dp;
        block.guard = g.finish("nadir_guard" + kj, ">=", "MW", 0.0);

        // per-region energy balance at tk: what the region sheds (loss or
        // export) may not exceed the admissible inertia swing plus response,
        // damping and import credits
        for (const RegionParams& r : sys.regions) {
            const bool faulted = r.id == fault.region;
            Canon b;
            if (faulted) ctx.place(b, "P_L", tk);
            ctx.place(b, "H_" + r.id, -2.0 * limits.df_max);
            ctx.place(b, "R_" + r.id, -tk * tk / (2.0 * sys.T_g));
            if (tk > r.EFR_delay) {
                const double ramp = tk - r.EFR_delay;
                ctx.place(b, "EFR_" + r.id, -0.5 * ramp * ramp);
            }
            if (r.d_prime() > 0)
                ctx.expand(b, require_model(integral_models, "intf_" + r.id + kj), r.d_prime());
            for (const Line& ln : sys.lines) {
                if (ln.T == 0.0) continue;
                double mult = 0.0;
                if (ln.from == r.id) mult = ln.T;
                if (ln.to == r.id) mult = -ln.T;
                if (mult != 0.0)
                    ctx.expand(b, require_model(integral_models, "dd_" + ln.from + "_" + ln.to + kj),
                               mult);
            }
            block.body.push_back(b.finish("nadir_" + r.id + kj, "<=", "MW*s", 0.0));
        }
        out.push_back(std::move(block));
    }
    return out;
}

LinearInequality qss_constraint(const SystemModel& sys, const FaultSpec& fault,
                                const Limits& limits, const GenOptions& opt) {
    GenContext ctx{sys, fault, opt, system_features(sys, fault), nullptr};
    Canon c;
    for (const RegionParams& r : sys.regions) ctx.place(c, "R_" + r.id, 1.0);
    ctx.place(c, "P_L", -1.0);
    c.constant += limits.df_ss_max * sys.total_d_prime();
    return c.finish("qss", ">=", "MW", 0.0);
}

ConstraintSet generate_constraints(const SystemModel& sys, const FaultSpec& fault,
                                   const std::vector<LinearModel>& models, const Limits& limits,
                                   const std::vector<double>& time_grid, const GenOptions& opt) {
    std::map<std::string, LinearModel> aomega, integral;
    for (const LinearModel& m : models) {
        if (m.target.rfind("Aomega_", 0) == 0) aomega[m.target.substr(7)] = m;
        if (m.target.rfind("intf_", 0) == 0 || m.target.rfind("dd_", 0) == 0)
            integral[m.target] = m;
    }

    ConstraintSet set;
    set.limits = limits;
    set.time_grid = time_grid.empty() ? default_grid(sys) : time_grid;
    set.fault_region = fault.region;
    set.rocof = rocof_constraints(sys, fault, aomega, limits, opt, &set.warnings);
    set.nadir = nadir_constraints(sys, fault, integral, limits, set.time_grid, opt, &set.warnings);
    set.qss = qss_constraint(sys, fault, limits, opt);

    std::map<std::string, double> values = system_features(sys, fault);
    for (const RegionParams& r : sys.regions) set.region_ids.push_back(r.id);
    std::vector<std::string> candidates;
    for (const RegionParams& r : sys.regions) {
        candidates.push_back("H_" + r.id);
        candidates.push_back("R_" + r.id);
        candidates.push_back("EFR_" + r.id);
    }
    candidates.push_back("P_L");
    for (const std::string& name : candidates) {
        if (opt.freeze.count(name))
            set.frozen_values[name] = values.at(name);
        else
            set.decision_symbols.push_back(name);
    }

    // every derived symbol any inequality ended up using, with its recipe
    std::set<std::string> used;
    auto scan = [&](const LinearInequality& q) {
        for (const auto& [sym, c] : q.coeffs)
            if (sym == "coi_rocof" || sym == "P_L_over_H_fault" || sym.rfind("inv_H_", 0) == 0)
                used.insert(sym);
    };
    for (const LinearInequality& q : set.rocof) scan(q);
    for (const ConditionalBlock& blk : set.nadir) {
        scan(blk.guard);
        for (const LinearInequality& q : blk.body) scan(q);
    }
    scan(set.qss);
    for (const std::string& sym : used) {
        if (sym == "coi_rocof") {
            std::string hs;
            for (const RegionParams& r : sys.regions)
                hs += (hs.empty() ? "" : " + ") + ("H_" + r.id);
            set.derived_symbols.push_back("coi_rocof = P_L / (2*(" + hs + "))");
        } else if (sym == "P_L_over_H_fault") {
            set.derived_symbols.push_back("P_L_over_H_fault = P_L / H_" + fault.region);
        } else {
            set.derived_symbols.push_back(sym + " = 1 / " + sym.substr(4));
        }
    }

    std::uint64_t seed = models.empty() ? 0 : models.front().seed;
    set.provenance = "fitted models: " + std::to_string(models.size()) + ", sweep seed " +
                     std::to_string(seed);
    return set;
}

namespace {

// symbol resolution for evaluation: the candidate point first, then values
// frozen at generation; derived symbols are recomputed exactly
double resolve(const ConstraintSet& set, const std::map<std::string, double>& point,
               const std::string& sym) {
    auto base = [&](const std::string& name) -> double {
        auto it = point.find(name);
        if (it != point.end()) return it->second;
        auto fz = set.frozen_values.find(name);
        if (fz != set.frozen_values.end()) return fz->second;
        throw ConfigError("evaluation point is missing symbol '" + name + "'");
    };
    if (sym == "coi_rocof") {
        double h = 0.0;
        for (const std::string& id : set.region_ids) h += base("H_" + id);
        if (!(h > 0)) throw ConfigError("coi_rocof needs positive total inertia");
        return base("P_L") / (2.0 * h);
    }
    if (sym == "P_L_over_H_fault") return base("P_L") / base("H_" + set.fault_region);
    if (sym.rfind("inv_H_", 0) == 0) return 1.0 / base(sym.substr(4));
    return base(sym);
}

} // namespace

Evaluation evaluate(const ConstraintSet& set, const std::map<std::string, double>& point) {
    Evaluation ev;
    auto check = [&](const LinearInequality& q, bool strict_over) {
        double lhs = 0.0;
        for (const auto& [sym, c] : q.coeffs) lhs += c * resolve(set, point, sym);
        ev.slack[q.name] = q.rhs - lhs;
        bool ok;
        if (strict_over)
            ok = lhs > q.rhs;
        else if (q.sense == "<=")
            ok = lhs <= q.rhs;
        else
            ok = lhs >= q.rhs;
        ev.satisfied[q.name] = ok;
        return ok;
    };

    bool all = true;
    for (const LinearInequality& q : set.rocof) all = check(q, false) && all;
    all = check(set.qss, false) && all;
    for (std::size_t i = 0; i < set.nadir.size(); ++i)
        if (check(set.nadir[i].guard, true) && ev.active_block < 0) ev.active_block = int(i);
    if (!set.nadir.empty()) {
        if (ev.active_block < 0)
            all = false; // response cannot cover the loss by T_g at any grid time
        else
            for (const LinearInequality& q : set.nadir[ev.active_block].body)
                all = check(q, false) && all;
    }
    ev.feasible = all;
    return ev;
}

ConservativenessReport validate_constraints(const ConstraintSet& set, const SweepSpec& sweep,
                                            const SystemModel& base) {
    ConservativenessReport rep;
    if (sweep.count < 1) return rep;
    SweepSpec spec = sweep;
    spec.fit_modes = false; // metrics only; no per-sample sinusoid fits
    SweepResult res = run_sweep(spec, base);

    const Limits& lim = set.limits;
    const double tol = 1e-3;
    auto metric = [](const std::map<std::string, double>& m, const std::string& key) {
        auto it = m.find(key);
        if (it == m.end()) throw ConfigError("validation sample lacks '" + key + "'");
        return it->second;
    };

    for (const SamplePoint& pt : res.samples) {
        ++rep.n_points;
        Evaluation ev = evaluate(set, pt.features);

        double worst_rocof = 0.0, worst_nadir = 0.0, sum_r = 0.0, sum_dp = 0.0;
        for (const std::string& id : set.region_ids) {
            worst_rocof = std::max(worst_rocof, metric(pt.targets, "rocof_" + id));
            worst_nadir = std::max(worst_nadir, -metric(pt.targets, "nadir_" + id));
            sum_r += metric(pt.features, "R_" + id);
            sum_dp += metric(pt.features, "Dp_" + id);
        }
        // the settled deviation the trace is converging to; simulating far
        // past T_g only chases this value with a slow time constant
        const double qss_dev =
            std::abs(sum_r - metric(pt.features, "P_L")) / std::max(sum_dp, 1e-300);

        const bool secure =
            worst_rocof <= lim.rocof_max && worst_nadir <= lim.df_max && qss_dev <= lim.df_ss_max;
        if (secure) ++rep.n_secure;

        if (ev.feasible) {
            ++rep.n_feasible;
            rep.rocof_margin.push_back(lim.rocof_max - worst_rocof);
            rep.nadir_margin.push_back(lim.df_max - worst_nadir);
            rep.qss_margin.push_back(lim.df_ss_max - qss_dev);
            if (worst_rocof > lim.rocof_max + tol || worst_nadir > lim.df_max + tol ||
                qss_dev > lim.df_ss_max + tol) {
                ++rep.n_violations;
                rep.violations.push_back(
                    "sample " + std::to_string(pt.index) + ": accepted but simulated rocof " +
                    format_double(worst_rocof) + " Hz/s, nadir " + format_double(worst_nadir) +
                    " Hz, qss " + format_double(qss_dev) + " Hz");
            }
        } else if (secure) {
            ++rep.n_secure_rejected;
        }
    }
    rep.violation_rate = rep.n_feasible > 0 ? double(rep.n_violations) / rep.n_feasible : 0.0;
    rep.over_conservativeness =
        rep.n_secure > 0 ? double(rep.n_secure_rejected) / rep.n_secure : 0.0;
    return rep;
}

namespace {

void push_inequality(TextDoc& doc, const LinearInequality& q, const std::string& group, int block,
                     double t_k) {
    DocSection s;
    s.name = "inequality";
    s.is_array = true;
    s.set("name", DocValue::of(q.name));
    s.set("group", DocValue::of(group));
    s.set("block", DocValue::of(double(block)));
    s.set("t_k", DocValue::of(t_k));
    s.set("sense", DocValue::of(q.sense));
    s.set("units", DocValue::of(q.units));
    std::vector<std::string> symbols;
    std::vector<double> coeffs;
    for (const auto& [sym, c] : q.coeffs) {
        symbols.push_back(sym);
        coeffs.push_back(c);
    }
    s.set("symbols", DocValue::list(symbols));
    s.set("coeffs", DocValue::list(coeffs));
    s.set("rhs", DocValue::of(q.rhs));
    doc.sections.push_back(s);
}

LinearInequality read_inequality(const DocSection* s, const std::string& where) {
    LinearInequality q;
    q.name = s->get_string("name", where);
    q.sense = s->get_string("sense", where);
    if (q.sense != "<=" && q.sense != ">=")
        throw ConfigError(where + " '" + q.name + "': sense must be <= or >=");
    q.units = s->get_string("units", where);
    q.rhs = s->get_number("rhs", where);
    std::vector<std::string> symbols = s->get_string_list("symbols", where);
    std::vector<double> coeffs = s->get_number_list("coeffs", where);
    if (symbols.size() != coeffs.size())
        throw ConfigError(where + " '" + q.name + "': symbols/coeffs length mismatch");
    for (std::size_t i = 0; i < symbols.size(); ++i) q.coeffs[symbols[i]] = coeffs[i];
    return q;
}

} // namespace

void save_constraints(const std::string& path, const ConstraintSet& set) {
    TextDoc doc;
    doc.origin = path;
    DocSection head;
    head.name = "constraints";
    head.set("version", DocValue::of(1.0));
    head.set("fault_region", DocValue::of(set.fault_region));
    head.set("region_ids", DocValue::list(set.region_ids));
    head.set("time_grid", DocValue::list(set.time_grid));
    head.set("rocof_max", DocValue::of(set.limits.rocof_max));
    head.set("df_max", DocValue::of(set.limits.df_max));
    head.set("df_ss_max", DocValue::of(set.limits.df_ss_max));
    head.set("provenance", DocValue::of(set.provenance));
    head.set("decision_symbols", DocValue::list(set.decision_symbols));
    head.set("derived_symbols", DocValue::list(set.derived_symbols));
    head.set("warnings", DocValue::list(set.warnings));
    std::vector<std::string> fz_names;
    std::vector<double> fz_values;
    for (const auto& [name, value] : set.frozen_values) {
        fz_names.push_back(name);
        fz_values.push_back(value);
    }
    head.set("frozen_names", DocValue::list(fz_names));
    head.set("frozen_values", DocValue::list(fz_values));
    doc.sections.push_back(head);

    for (const LinearInequality& q : set.rocof) push_inequality(doc, q, "rocof", -1, 0.0);
    push_inequality(doc, set.qss, "qss", -1, 0.0);
    for (std::size_t i = 0; i < set.nadir.size(); ++i) {
        const ConditionalBlock& blk = set.nadir[i];
        push_inequality(doc, blk.guard, "nadir_guard", int(i), blk.t_k);
        for (const LinearInequality& q : blk.body)
            push_inequality(doc, q, "nadir_body", int(i), blk.t_k);
    }
    save_textdoc(doc, path);
}

ConstraintSet load_constraints(const std::string& path) {
    TextDoc doc = load_textdoc(path);
    const DocSection* head = doc.find_one("constraints");
    if (!head) throw ConfigError(doc.origin + ": missing [constraints] section");
    const std::string where = doc.origin + ": constraints";

    ConstraintSet set;
    set.fault_region = head->get_string("fault_region", where);
    set.region_ids = head->get_string_list("region_ids", where);
    set.time_grid = head->get_number_list("time_grid", where);
    set.limits.rocof_max = head->get_number("rocof_max", where);
    set.limits.df_max = head->get_number("df_max", where);
    set.limits.df_ss_max = head->get_number("df_ss_max", where);
    set.provenance = head->get_string("provenance", where);
    set.decision_symbols = head->get_string_list("decision_symbols", where);
    set.derived_symbols = head->get_string_list("derived_symbols", where);
    set.warnings = head->get_string_list("warnings", where);
    std::vector<std::string> fz_names = head->get_string_list("frozen_names", where);
    std::vector<double> fz_values = head->get_number_list("frozen_values", where);
    if (fz_names.size() != fz_values.size())
        throw ConfigError(where + ": frozen_names/frozen_values length mismatch");
    for (std::size_t i = 0; i < fz_names.size(); ++i) set.frozen_values[fz_names[i]] = fz_values[i];

    bool have_qss = false;
    for (const DocSection* s : doc.find_all("inequality")) {
        const std::string iw = doc.origin + ": inequality";
        const std::string group = s->get_string("group", iw);
        LinearInequality q = read_inequality(s, iw);
        if (group == "rocof") {
            set.rocof.push_back(std::move(q));
        } else if (group == "qss") {
            if (have_qss) throw ConfigError(iw + ": more than one qss inequality");
            set.qss = std::move(q);
            have_qss = true;
        } else if (group == "nadir_guard" || group == "nadir_body") {
            const int block = int(s->get_number("block", iw));
            if (block < 0) throw ConfigError(iw + " '" + q.name + "': bad block index");
            if (int(set.nadir.size()) <= block) set.nadir.resize(block + 1);
            set.nadir[block].t_k = s->get_number("t_k", iw);
            if (group == "nadir_guard")
                set.nadir[block].guard = std::move(q);
            else
                set.nadir[block].body.push_back(std::move(q));
        } else {
            throw ConfigError(iw + " '" + q.name + "': unknown group '" + group + "'");
        }
    }
    if (!have_qss) throw ConfigError(where + ": no qss inequality");
    for (std::size_t i = 0; i < set.nadir.size(); ++i) {
        if (set.nadir[i].guard.name.empty())
            throw ConfigError(where + ": block " + std::to_string(i) + " has no guard");
        if (i > 0 && set.nadir[i].t_k <= set.nadir[i - 1].t_k)
            throw ConfigError(where + ": block times must ascend");
    }
    return set;
}

namespace {

void write_terms(std::ostream& os, const LinearInequality& q) {
    os << q.name << ":";
    if (q.coeffs.empty()) os << " 0";
    for (const auto& [sym, c] : q.coeffs)
        os << (c < 0 ? " - " : " + ") << format_double(std::abs(c)) << " " << sym;
    os << " " << q.sense << " " << format_double(q.rhs) << "\n";
}

} // namespace

void write_constraints_lp(std::ostream& os, const ConstraintSet& set) {
    os << "\\ frequency-security constraints, loss in region " << set.fault_region << "\n";
    os << "\\ limits: |rocof| <= " << format_double(set.limits.rocof_max)
       << " Hz/s, |nadir| <= " << format_double(set.limits.df_max) << " Hz, |qss| <= "
       << format_double(set.limits.df_ss_max) << " Hz\n";
    os << "\\ " << set.provenance << "\n";
    if (!set.decision_symbols.empty()) {
        os << "\\ decision symbols:";
        for (const std::string& s : set.decision_symbols) os << " " << s;
        os << "\n";
    }
    for (const auto& [name, value] : set.frozen_values)
        os << "\\ frozen: " << name << " = " << format_double(value) << "\n";
    if (!set.derived_symbols.empty()) {
        os << "\\ derived symbols (nonlinear in the decisions; freeze or linearise downstream):\n";
        for (const std::string& d : set.derived_symbols) os << "\\   " << d << "\n";
    }
    for (const std::string& w : set.warnings) os << "\\ warning: " << w << "\n";

    for (const LinearInequality& q : set.rocof) write_terms(os, q);
    write_terms(os, set.qss);
    os << "\\ conditional nadir blocks form an if-else chain: enforce the bodies of the\n";
    os << "\\ first block whose guard holds strictly (reformulate with indicators/big-M)\n";
    for (std::size_t i = 0; i < set.nadir.size(); ++i) {
        const ConditionalBlock& blk = set.nadir[i];
        os << "\\ block " << i << " at t_k = " << format_double(blk.t_k)
           << " s, guard is strict (>):\n";
        write_terms(os, blk.guard);
        for (const LinearInequality& q : blk.body) write_terms(os, q);
    }
}

} // namespace gridfreq
