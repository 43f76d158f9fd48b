#pragma once

// Linear frequency-security constraints for scheduling optimisations.
//
// Three families are generated for a given system, loss scenario and set of
// fitted integral models:
//   rocof   per region:  P_L/(2·ΣH) + A_i·ω_i ≤ rocof_max, with A_i·ω_i
//           replaced by its linear regression expansion
//   nadir   conditional energy-balance blocks on a time grid over (0, T_g]:
//           if the delivered response at t_k already covers the loss (guard),
//           enforce per-region energy inequalities at t_k
//   qss     Σ R_i ≥ P_L − df_ss_max · Σ D'_i
//
// Decision symbols are H_<id>, R_<id>, EFR_<id> and P_L; everything else
// (damping, line stiffness, delays) folds into constants at the query
// system's values, and any decision can be frozen the same way. Three terms
// are nonlinear in the decisions and stay symbolic as *derived* symbols the
// evaluator computes exactly: coi_rocof = P_L/(2ΣH), inv_H_<id> = 1/H_<id>,
// and P_L_over_H_fault = P_L/H of the faulted region. Exports annotate them
// so downstream MILP tooling can freeze or linearise.
//
// Regression expansions carry their training offsets in the direction that
// preserves security: a term entering the canonical left side with positive
// multiplier takes offset_upper (over-estimate the burden), a negative
// multiplier takes offset_lower (under-estimate the credit).

#include "gridfreq/grid_model.hpp"
#include "gridfreq/mode_fit.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace gridfreq {

// One inequality in canonical form: Σ coeff_s · s  (sense)  rhs. Symbols are
// decision or derived names; all parameter terms are already folded into rhs.
struct LinearInequality {
    std::string name;
    std::map<std::string, double> coeffs;
    double rhs = 0.0;
    std::string sense = "<="; // "<=" or ">="
    std::string units;

    double lhs(const std::map<std::string, double>& symbol_values) const;
};

// One time-grid entry of the conditional nadir scheme: when the guard holds
// strictly, the body inequalities bound every region's deviation at t_k.
// Downstream semantics are an if-else chain: the first block whose guard
// holds is the one enforced.
struct ConditionalBlock {
    double t_k = 0.0;
    LinearInequality guard; // satisfied means lhs > rhs, strictly
    std::vector<LinearInequality> body;
};

struct ConstraintSet {
    std::vector<LinearInequality> rocof; // one per region
    std::vector<ConditionalBlock> nadir; // ascending t_k
    LinearInequality qss;

    Limits limits;
    std::vector<double> time_grid;
    std::string fault_region;
    std::vector<std::string> region_ids;
    std::vector<std::string> decision_symbols;        // still symbolic
    std::vector<std::string> derived_symbols;         // with their definitions
    std::map<std::string, double> frozen_values;      // folded decisions
    std::string provenance;                           // model file / seed note
    std::vector<std::string> warnings;                // e.g. extrapolation
};

// Symbols listed here are folded into constants at the query system's values
// instead of staying symbolic. Only H_<id>, R_<id>, EFR_<id>, P_L are ever
// symbolic; freezing anything else is a no-op.
struct GenOptions {
    std::set<std::string> freeze;
};

// Per-region RoCoF bounds. `aomega_models` is keyed by region id as returned
// by regress_rocof_term; a missing region throws ConfigError. Appends an
// extrapolation warning when the query point leaves a model's training box.
std::vector<LinearInequality> rocof_constraints(const SystemModel& sys, const FaultSpec& fault,
                                                const std::map<std::string, LinearModel>& aomega_models,
                                                const Limits& limits, const GenOptions& opt = {},
                                                std::vector<std::string>* warnings = nullptr);

// Conditional nadir blocks on `time_grid` (ascending, within (0, T_g]).
// `integral_models` is keyed by target name (intf_<id>_k<j>, dd_<a>_<b>_k<j>)
// as returned by regress_energy_integrals; models are required per grid index
// for every damped region and live line, and ConfigError names any gap.
std::vector<ConditionalBlock> nadir_constraints(const SystemModel& sys, const FaultSpec& fault,
                                                const std::map<std::string, LinearModel>& integral_models,
                                                const Limits& limits,
                                                const std::vector<double>& time_grid,
                                                const GenOptions& opt = {},
                                                std::vector<std::string>* warnings = nullptr);

// Aggregate frequency-response adequacy: Σ R_i ≥ P_L − df_ss_max·ΣD'.
LinearInequality qss_constraint(const SystemModel& sys, const FaultSpec& fault,
                                const Limits& limits, const GenOptions& opt = {});

// All three families plus the metadata needed to evaluate, export and
// regenerate. `models` holds both the A·ω models (target Aomega_<id>) and the
// integral models, as loaded from one model file.
ConstraintSet generate_constraints(const SystemModel& sys, const FaultSpec& fault,
                                   const std::vector<LinearModel>& models, const Limits& limits,
                                   const std::vector<double>& time_grid,
                                   const GenOptions& opt = {});

struct Evaluation {
    bool feasible = false;                 // rocof + qss + active nadir body all hold
    int active_block = -1;                 // first block whose guard holds; -1 = none
    std::map<std::string, bool> satisfied; // rocof, qss, guards, active-body entries
    std::map<std::string, double> slack;   // rhs − lhs, constraint units
};

// Numeric substitution of a candidate operating point. The point must supply
// every symbolic decision (ConfigError names the first gap); derived symbols
// are computed exactly from those values, falling back to frozen values for
// folded decisions. Guards resolve as an if-else chain: bodies of all blocks
// before the active one are ignored, and no true guard means the loss cannot
// be covered by T_g at all (infeasible).
Evaluation evaluate(const ConstraintSet& set, const std::map<std::string, double>& point);

struct ConservativenessReport {
    int n_points = 0;
    int n_feasible = 0;
    int n_violations = 0;       // feasible by the constraints, insecure in simulation
    int n_secure = 0;           // secure in simulation
    int n_secure_rejected = 0;  // secure but rejected by the constraints
    double violation_rate = 0.0;
    double over_conservativeness = 0.0;
    std::vector<std::string> violations;            // human-readable descriptions
    std::vector<double> rocof_margin, nadir_margin, qss_margin; // feasible points
};

// Soundness audit: sweep operating points, and for every point the
// constraints accept, check the simulated trace against the limits (1e-3
// absolute tolerance on each metric absorbs integration error). The
// steady-state check uses the balance value (ΣR − P_L)/ΣD' the trace settles
// to. Also reports how many simulation-secure points the constraints reject.
// A sweep with count < 1 yields an empty report.
ConservativenessReport validate_constraints(const ConstraintSet& set, const SweepSpec& sweep,
                                            const SystemModel& base);

// Structured-text round trip and a flat LP-style listing (guards exported as
// annotated comments for downstream big-M / indicator reformulation).
void save_constraints(const std::string& path, const ConstraintSet& set);
ConstraintSet load_constraints(const std::string& path);
void write_constraints_lp(std::ostream& os, const ConstraintSet& set);

} // namespace gridfreq
