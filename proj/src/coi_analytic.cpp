#include "gridfreq/coi_analytic.hpp"
#include "gridfreq/errors.hpp"

#include <cmath>

namespace gridfreq {

namespace {

void check_params(const CoiParams& p) {
    if (!(p.H > 0) || !(p.D_prime > 0) || !(p.T_g > 0))
        throw NumericError("aggregate frequency model needs H, D', T_g all positive");
    if (p.R < 0 || p.P_L < 0)
        throw NumericError("aggregate frequency model needs R, P_L non-negative");
}

double offset_K(const CoiParams& p) {
    return (2.0 * p.H * p.R + p.D_prime * p.T_g * p.P_L) / (p.D_prime * p.D_prime * p.T_g);
}

} // namespace

CoiParams aggregate(const SystemModel& sys, const FaultSpec& fault) {
    if (sys.index_of(fault.region) < 0)
        throw ConfigError("aggregate: fault region '" + fault.region + "' not in system");
    CoiParams p;
    p.H = sys.total_inertia();
    p.D_prime = sys.total_d_prime();
    p.R = sys.total_pfr();
    p.P_L = fault.P_L;
    p.T_g = sys.T_g;
    return p;
}

double coi_exponential_weight(const CoiParams& p) {
    check_params(p);
    return offset_K(p);
}

double coi_frequency(const CoiParams& p, double t) {
    check_params(p);
    if (t < 0 || t > p.T_g)
        throw NumericError("aggregate closed form is only valid on the ramp interval [0, T_g]; got t = " +
                           format_double(t));
    double K = offset_K(p);
    return (p.R / (p.D_prime * p.T_g)) * t + K * (std::exp(-p.D_prime * t / (2.0 * p.H)) - 1.0);
}

double coi_frequency_derivative(const CoiParams& p, double t) {
    check_params(p);
    if (t < 0 || t > p.T_g)
        throw NumericError("aggregate closed form is only valid on the ramp interval [0, T_g]; got t = " +
                           format_double(t));
    double K = offset_K(p);
    double rate = p.D_prime / (2.0 * p.H);
    return p.R / (p.D_prime * p.T_g) - K * rate * std::exp(-rate * t);
}

CoiNadir coi_nadir(const CoiParams& p) {
    check_params(p);
    CoiNadir out;
    double g0 = coi_frequency_derivative(p, 0.0); // = −P_L/(2H)
    if (g0 >= 0) return out;                      // never falls: nadir at t = 0

    // derivative is strictly increasing, so a single bracketed root (if any)
    if (coi_frequency_derivative(p, p.T_g) <= 0) {
        out.t_star = p.T_g; // still falling at full delivery
    } else {
        double lo = 0.0, hi = p.T_g;
        while (hi - lo > 1e-10) {
            double mid = 0.5 * (lo + hi);
            (coi_frequency_derivative(p, mid) < 0 ? lo : hi) = mid;
        }
        out.t_star = 0.5 * (lo + hi);
    }
    out.nadir = coi_frequency(p, out.t_star);
    return out;
}

} // namespace gridfreq
