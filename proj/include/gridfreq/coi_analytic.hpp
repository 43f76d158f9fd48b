#pragma once

// Uniform-frequency (centre-of-inertia) closed form during the response ramp:
//
//   Δf(t) = (R/(D'·T_g))·t + K·(e^{−D'·t/(2H)} − 1),
//   K = (2HR + D'·T_g·P_L)/(D'²·T_g),    0 ≤ t ≤ T_g
//
// valid while the PFR ramps; the nadir of this curve and its initial slope
// −P_L/(2H) are the aggregate security quantities.

#include "gridfreq/grid_model.hpp"

namespace gridfreq {

struct CoiParams {
    double H = 0.0;       // Σ H_i, MW·s
    double D_prime = 0.0; // Σ D_i·P_D_i, MW/Hz
    double R = 0.0;       // Σ R_i, MW
    double P_L = 0.0;     // lost infeed, MW
    double T_g = 10.0;    // PFR delivery time, s
};

struct CoiNadir {
    double t_star = 0.0; // s
    double nadir = 0.0;  // Hz (≤ 0)
};

// Collapse a multi-region model onto the single-bus equivalent.
CoiParams aggregate(const SystemModel& sys, const FaultSpec& fault);

// Δf(t) for 0 ≤ t ≤ T_g. Throws outside the ramp regime or for a degenerate
// parameter set (H, D', T_g must be positive).
double coi_frequency(const CoiParams& p, double t);

// The weight K = (2HR + D'·T_g·P_L)/(D'²·T_g) of the exponential term; also
// the magnitude of the constant the curve relaxes toward before the ramp
// takes over.
double coi_exponential_weight(const CoiParams& p);

// dΔf/dt, same domain. Starts at −P_L/(2H) and increases monotonically.
double coi_frequency_derivative(const CoiParams& p, double t);

// Lowest point of the ramp-regime curve: the derivative root on (0, T_g] by
// bisection (1e−10 s), or T_g itself when the frequency is still falling at
// full delivery. P_L = 0 gives (0, 0).
CoiNadir coi_nadir(const CoiParams& p);

} // namespace gridfreq
