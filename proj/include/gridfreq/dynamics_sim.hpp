#pragma once

// Fixed-step integration of the coupled regional swing model
//
//   2H_i·dΔf_i/dt + D'_i·Δf_i = FR_i(t) − P_L·[i = faulted] + ΔP_import_i(t)
//   ΔP_import_i(t) = −Σ_j T_ij·(∫Δf_i − ∫Δf_j)
//
// augmented with q_i = ∫Δf_i as extra states so the integro-differential
// system becomes a plain ODE. RK4, all-zero initial state.

#include "gridfreq/grid_model.hpp"

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace gridfreq {

struct FrequencyTrace {
    double dt = 0.0;    // s
    double t_end = 0.0; // s (an exact multiple of dt)
    std::vector<std::string> region_ids;
    Eigen::VectorXd t;         // sample times, s
    Eigen::MatrixXd df;        // samples × regions, Hz
    Eigen::MatrixXd dp_import; // samples × regions, MW
    Eigen::MatrixXd int_df;    // samples × regions, running ∫Δf_i dτ, Hz·s
    Eigen::VectorXd inertia;   // per-region H_i, MW·s

    Eigen::Index samples() const { return t.size(); }
    // inertia-weighted mean deviation f_w(t) = Σ H_i·Δf_i / Σ H_i, per sample
    Eigen::VectorXd weighted_mean() const;
};

struct TraceMetrics {
    Eigen::VectorXd rocof_max_abs; // per region, Hz/s
    Eigen::VectorXd nadir;         // per region, Hz (most negative deviation)
    Eigen::VectorXd nadir_time;    // per region, s
    double qss = 0.0;              // inertia-weighted deviation at t_end, Hz
};

// Frequency response delivered by one region at time t: PFR ramping linearly
// over T_g then holding at R, plus EFR ramping over 1 s after its delay.
double response_injection(double t, const RegionParams& region, double T_g);

// Integrate the post-fault dynamics from the flat pre-fault state. The loss
// fault.P_L hits fault.region as a step at t = 0; the response injections are
// triggered by that event (a zero-size fault leaves everything at rest).
// Throws NumericError with the offending time if the state stops being finite.
FrequencyTrace simulate(const SystemModel& sys, const FaultSpec& fault,
                        double dt = 1e-3, double t_end = 30.0);

// RoCoF by centered differences (one-sided at the ends), per-region nadir and
// its time, and the inertia-weighted deviation at the last sample. Requires at
// least 3 samples. T_g is carried along for reporting context only; the
// metrics read the whole trace.
TraceMetrics trace_metrics(const FrequencyTrace& trace, double T_g);

// max_t |Σ_i ΔP_import_i(t)| / max_t max_i |ΔP_import_i(t)| (0 when no line
// power ever flows). The pairwise line terms must cancel exactly.
double import_conservation_error(const FrequencyTrace& trace);

// Largest residual (Hz/s) of the summed-system identity
//   2ΣH·df_w/dt = Σ FR_i(t) − P_L − Σ D'_i·Δf_i(t)
// with df_w/dt estimated by 5-point finite differences from the samples.
// Samples whose stencil straddles a response-ramp corner (EFR turn-on/full,
// PFR saturation) are excluded: the derivative estimate loses its order there.
double coi_identity_residual(const FrequencyTrace& trace, const SystemModel& sys,
                             const FaultSpec& fault);

// Header `t,df_<region>...,dp_import_<region>...`; shortest round-trip floats.
void write_trace_csv(const FrequencyTrace& trace, std::ostream& os);

} // namespace gridfreq
