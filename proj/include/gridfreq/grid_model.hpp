#pragma once

// Domain types for the multi-region frequency model plus configuration
// ingestion, steady-state angle computation and line-stiffness evaluation.
//
// Conventions used throughout the library:
//   - inertia H in MW·s, damping D as fraction of demand per Hz (so the
//     damping power is D·P_D·Δf, with D' = D·P_D in MW/Hz),
//   - voltages in kV and reactances in Ω, which makes V·V/X come out in MW,
//   - frequency deviations in Hz, angles in rad, times in s.

#include "gridfreq/textdoc.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace gridfreq {

struct RegionParams {
    std::string id;
    double H = 0.0;         // inertia, MW·s
    double D = 0.0;         // load damping, fraction of demand per Hz
    double P_D = 0.0;       // total demand, MW
    double R = 0.0;         // primary frequency response, MW
    double EFR = 0.0;       // fast response, MW (delivered within 1 s of activation)
    double EFR_delay = 0.0; // fast-response activation delay, s
    double P_L = 0.0;       // largest local power infeed, MW (0 if none)
    double injection = 0.0; // pre-fault net injection, MW (used by the angle solve)

    double d_prime() const { return D * P_D; } // MW/Hz
};

struct Line {
    std::string from, to;
    double V_from = 0.0, V_to = 0.0; // kV
    double X = 0.0;                  // Ω
    double delta_ss_from = 0.0, delta_ss_to = 0.0; // rad
    bool has_angles = false;
    double T = 0.0; // synchronising stiffness, MW (per Hz·s of integrated frequency gap)
};

struct Limits {
    double rocof_max = 0.0; // Hz/s
    double df_max = 0.0;    // Hz, nadir bound (positive magnitude)
    double df_ss_max = 0.0; // Hz, quasi-steady-state bound (positive magnitude)
};

struct FaultSpec {
    std::string region; // outaged region id
    double P_L = 0.0;   // lost infeed, MW
};

struct SystemModel {
    std::vector<RegionParams> regions;
    std::vector<Line> lines;
    double T_g = 10.0;            // PFR delivery time, s
    double base_frequency = 50.0; // Hz
    std::optional<Limits> limits;
    std::optional<FaultSpec> fault;

    int index_of(const std::string& id) const; // -1 when absent
    double total_inertia() const;              // ΣH_i
    double total_d_prime() const;              // ΣD_i·P_D_i
    double total_pfr() const;                  // ΣR_i

    // Weighted Laplacian of line stiffnesses: import power deviation is
    // dp_import = -L * q with q_i = ∫Δf_i.
    Eigen::MatrixXd stiffness_laplacian() const;
};

// T = 2π·(V_i·V_j/X)·cos(δ_i − δ_j). Throws when angles are missing or the
// angle gap leaves no synchronising torque (|δ_i − δ_j| ≥ π/2).
double compute_stiffness(const Line& line);

// DC power-flow pre-step: angles (rad) with the first region as slack (angle 0)
// such that the line flows b_ij·(δ_i − δ_j), b_ij = V_i·V_j/X_ij, balance the
// given injections (MW). Injections must sum to zero.
Eigen::VectorXd solve_steady_state_angles(const SystemModel& sys, const Eigen::VectorXd& injections);

// Parse + validate a configuration document. All invariants are checked and
// every line stiffness is populated (running the angle solve when the config
// does not give steady-state angles directly).
SystemModel load_system(const std::string& path);
SystemModel parse_system(std::string_view text, const std::string& origin);

// Validate invariants and fill in angles/stiffnesses on an in-memory model.
// parse_system/load_system call this; sweep code reuses it after mutating.
void finalize_system(SystemModel& sys);

// Canonical config document for a validated model; parse_system(export) gives
// back a field-for-field identical model.
std::string export_config(const SystemModel& sys);

} // namespace gridfreq
