#pragma once

// Exact frequency-domain solution for the two-region case. Transforming the
// coupled swing model (loss as a step, PFR as a ramp) and eliminating gives,
// per region, a degree-≤3 over degree-5 rational function whose denominator
// is s² times a cubic shared by both regions:
//
//   F_1(s) = [−2H₂P₁s³ + (2H₂R₁/T_g − D'₂P₁)s² + (D'₂R₁/T_g − T(P₁+P₂))s + RT/T_g]
//            / (s²·q(s)),
//   q(s)   = 4H₁H₂s³ + 2(D'₁H₂ + D'₂H₁)s² + (2HT + D'₁D'₂)s + D'T
//
// (region 2 by swapping labels; H = H₁+H₂, D' = D'₁+D'₂, R = R₁+R₂, T the
// line stiffness, P_i the lost infeed attributed to region i). The partial
// fractions split off the ramp (1/s²) and offset (1/s) before the cubic
// remainder; Cardano then yields the closed-form time response and the
// inter-area oscillation mode.

#include "gridfreq/coi_analytic.hpp"
#include "gridfreq/grid_model.hpp"

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace gridfreq {

struct RationalLaplace {
    Eigen::Vector4d num = Eigen::Vector4d::Zero(); // ascending, num[k]·s^k
    Eigen::Matrix<double, 6, 1> den = Eigen::Matrix<double, 6, 1>::Zero(); // ascending; [0],[1] stay 0

    std::complex<double> eval(std::complex<double> s) const;
};

struct PartialFractions {
    double c_t = 0.0;     // 1/s² coefficient, Hz/s (the settled ramp slope R/(D'T_g))
    double c_const = 0.0; // 1/s coefficient, Hz
    Eigen::Vector3d cubic_num = Eigen::Vector3d::Zero(); // ascending quadratic remainder
    Eigen::Vector4d cubic_den = Eigen::Vector4d::Zero(); // ascending cubic q(s)
    double condition = 0.0; // conditioning of the identification solve
};

struct CubicRoots {
    std::array<std::complex<double>, 3> roots{};
    bool conjugate_pair = false; // roots[0] real, roots[1] = conj(roots[2]), Im(roots[1]) > 0
};

struct TimeDomainSolution {
    double c_t = 0.0, c_const = 0.0;
    CubicRoots roots;
    std::array<std::complex<double>, 3> residues{}; // Z_k = r(z_k)/q'(z_k)

    // Δf(t) = c_t·t + c_const + Σ_k Z_k·e^{z_k·t} (real part); meaningful on
    // the response-ramp window [0, T_g].
    double operator()(double t) const;
};

// Damped-sinusoid description of one region's departure from the aggregate
// curve: e^{−a·t}·A·sin(ω·t + φ) + C.
struct OscillationMode {
    double a = 0.0;     // attenuation, 1/s
    double A = 0.0;     // amplitude, Hz (≥ 0)
    double omega = 0.0; // rad/s (> 0)
    double phi = 0.0;   // rad, in (−π, π]
    double C = 0.0;     // offset, Hz
};

struct ModeExtraction {
    OscillationMode mode;
    // sup over [0, T_g] of |Z₁e^{z₁t} − K·e^{−D't/(2H)}|: how far the rational
    // solution's real-pole term sits from the aggregate model's exponential.
    // This is the only approximation when writing a region as "aggregate curve
    // plus one damped sinusoid".
    double coi_term_gap = 0.0;
    double real_root = 0.0;    // z₁, 1/s
    double real_residue = 0.0; // Z₁, Hz
    std::complex<double> pair_residue; // Z₂ (partner is the conjugate)
};

// Laplace solutions for both regions, in system order. The system must have
// exactly two regions joined by one line. The FaultSpec form puts the whole
// loss in fault.region; the vector form splits it (losses in system order).
std::array<RationalLaplace, 2> build_laplace_solution(const SystemModel& sys, const FaultSpec& fault);
std::array<RationalLaplace, 2> build_laplace_solution(const SystemModel& sys,
                                                      const Eigen::Vector2d& losses);

// Identify c_t, c_const and the cubic remainder by solving the linear system
// that matches numerator coefficients over the common denominator (the
// expanded closed forms below are a cross-check, not the computation).
// Throws NumericError when the identification is ill-conditioned or the
// recombined coefficients fail to reproduce the input.
PartialFractions partial_fractions(const RationalLaplace& rl);

// Fully expanded closed form of the faulted region's decomposition (loss in a
// single region), for cross-checking partial_fractions against independent
// algebra. Field `condition` is left 0.
PartialFractions faulted_partial_fractions_expanded(const SystemModel& sys, const FaultSpec& fault);

// All roots of c[0] + c[1]s + c[2]s² + c[3]s³, polished to |p(z)| below
// 1e−9·max|c|. Real root first and conjugate pair ordered (+Im before −Im)
// when that structure holds; ascending by real part otherwise.
CubicRoots cubic_roots(const Eigen::Vector4d& coeffs);

// Close the inverse transform: residues at the cubic's poles plus the ramp
// and offset terms. Works for both root structures (a conjugate pair becomes
// the damped oscillation; three real roots fall back to three exponentials).
TimeDomainSolution time_domain_solution(const PartialFractions& pf);

// Oscillation-mode parameters of one region given its decomposition and the
// aggregate (COI) parameters of the same scenario. Requires the
// conjugate-pair root structure.
ModeExtraction extract_modes(const PartialFractions& pf, const CoiParams& coi);

} // namespace gridfreq
