#pragma once

// Sweep-and-regress pipeline: sample system parameters, simulate each draw,
// extract per-region oscillation and energy-integral targets, and fit linear
// models with conservative offsets for use in security constraints.
//
// Sampled quantities are keyed by name throughout:
//   H_<id>, Dp_<id>, R_<id>, EFR_<id>, EFR_delay_<id>   region fields
//   T_<from>_<to>                                        line stiffness
//   P_L                                                  lost infeed, MW
// plus derived features present on every sample:
//   fault_<id>        1 when the loss sits in that region, else 0
//   inv_H_<id>        1/H_i (MW·s)⁻¹
//   P_L_over_H_fault  P_L/H of the faulted region, 1/s
//
// Targets per sample: Aomega_<id> (fitted A·ω, Hz/s), intf_<id>_k<j>
// (∫Δf_i at grid time j, Hz·s, signed), dd_<from>_<to>_k<j> (double integral
// of Δf_from − Δf_to at grid time j, Hz·s², signed), nadir_<id>, rocof_<id>,
// qss. The feature/target streams are bit-reproducible for a given seed: all
// random numbers are pre-drawn from a single sequential mt19937_64 stream
// before any simulation runs.

#include "gridfreq/dynamics_sim.hpp"
#include "gridfreq/grid_model.hpp"
#include "gridfreq/laplace_two_region.hpp"
#include "gridfreq/textdoc.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gridfreq {

struct ParamRange {
    double lo = 0.0;
    double hi = 0.0; // hi == lo pins the parameter
};

struct SweepSpec {
    std::map<std::string, ParamRange> ranges;
    int count = 1;
    std::string scheme = "latin_hypercube"; // or "grid" (lattice cell centres)
    std::uint64_t seed = 0;
    std::vector<std::string> fault_regions; // loss locations to draw from; empty → base [fault]
    double dt = 1e-3;
    double t_end = 30.0;
    std::vector<double> time_grid; // integral sampling times; empty → 10 uniform over (0, T_g]
    // fit the per-region damped sinusoid (Aomega_* targets and the closed-form
    // cross-check); switch off for sweeps that only need trace metrics
    bool fit_modes = true;
};

struct SamplePoint {
    int index = 0;
    std::map<std::string, double> features;
    std::map<std::string, double> targets;
    // region id → |fitted A·ω − closed-form A·ω| / closed-form, filled only
    // when the two-region rational solution applies (2 regions, 1 line, no
    // EFR) and the sinusoid fit converged
    std::map<std::string, double> oscillation_check;
    bool fits_converged = true;
};

struct SweepExclusion {
    int index = 0;
    std::string reason;
};

struct SweepResult {
    std::vector<SamplePoint> samples;
    std::vector<SweepExclusion> excluded;
    std::vector<double> time_grid; // resolved grid the k<j> targets refer to
    std::uint64_t seed = 0;
    std::map<std::string, ParamRange> ranges;
};

// Simulate every draw of the spec against the base system. Draw order, and
// hence the sample stream, depends only on (spec, base); simulations run in
// parallel but land in index-ordered slots. Diverged draws are excluded and
// reported, not fatal. Throws ConfigError for malformed specs (unknown range
// keys, bounds outside the accepted envelope, missing fault location).
SweepResult run_sweep(const SweepSpec& spec, const SystemModel& base);

// The feature map of one concrete operating point, under the naming scheme
// above: every region/line parameter plus the derived fault indicators and
// reciprocal-inertia features. This is what each sweep sample records and
// what downstream model coverage checks evaluate against.
std::map<std::string, double> system_features(const SystemModel& sys, const FaultSpec& fault);

struct SinusoidFit {
    OscillationMode mode;
    double rms = 0.0;               // RMS of y − model, channel units
    double unmodelled_energy = 0.0; // ‖y − model‖² / ‖y‖², the energy share the
                                    // single fitted mode leaves unexplained
    int iterations = 0;
    bool converged = false;
};

// Least-squares fit of e^{−a·t}·A·sin(ω·t + φ) + C to one residual channel
// (a region's deviation from the inertia-weighted mean, sampled on [0, T_g]).
// Initial ω comes from the dominant discrete-spectrum peak, initial a from
// the log-envelope slope; Levenberg–Marquardt refines until the relative
// parameter step drops below 1e−8 (bounded iterations; non-convergence is
// reported via the flag, not thrown). An identically zero channel yields
// A = 0 immediately.
SinusoidFit fit_damped_sinusoid(const Eigen::VectorXd& t, const Eigen::VectorXd& y);

struct LinearModel {
    std::string target;                // target key this model predicts
    std::vector<std::string> features; // design columns, in order
    Eigen::VectorXd coef;              // aligned with `features`
    double intercept = 0.0;
    // prediction + offset_upper ≥ target on every training sample, and
    // prediction + offset_lower ≤ target likewise; which one a constraint
    // uses depends on whether it must over- or under-state the term
    double offset_upper = 0.0;
    double offset_lower = 0.0;
    double rms = 0.0;     // training residual RMS
    double max_abs = 0.0; // worst training residual magnitude
    int n = 0;            // training sample count
    std::uint64_t seed = 0;
    // observed training span of every candidate feature (including constant
    // ones that were folded into the intercept) — the extrapolation check
    std::map<std::string, ParamRange> ranges;

    double predict(const std::map<std::string, double>& point) const;
    // true when every trained feature of `point` lies inside the training
    // span (widened by `slack` relative)
    bool covers(const std::map<std::string, double>& point, double slack = 1e-9) const;
};

// Ordinary least squares of `target_key` on the candidate features.
// Constant columns fold into the intercept (their span is still recorded);
// needs ≥ 10 samples per remaining column and a full-rank design matrix.
LinearModel fit_linear_model(const std::vector<SamplePoint>& samples,
                             const std::vector<std::string>& candidate_features,
                             const std::string& target_key, std::uint64_t seed);

// per-region models of the oscillation RoCoF term A_i·ω_i, keyed by region id
std::map<std::string, LinearModel> regress_rocof_term(const SweepResult& sweep);

// one model per energy-integral target (every intf_*/dd_* key), keyed by target
std::map<std::string, LinearModel> regress_energy_integrals(const SweepResult& sweep);

// model-file round trip (structured text, one [[model]] section per model)
void save_models(const std::string& path, const std::vector<LinearModel>& models);
std::vector<LinearModel> load_models(const std::string& path);

// sample-table CSV: index column, then features and targets in key order
void write_samples_csv(std::ostream& os, const SweepResult& sweep);

// sweep-spec file: a [sweep] section plus one [[range]] section per parameter
SweepSpec parse_sweep_spec(const TextDoc& doc);
SweepSpec load_sweep_spec(const std::string& path);

} // namespace gridfreq
