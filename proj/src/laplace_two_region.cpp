#include "gridfreq/laplace_two_region.hpp"
#include "gridfreq/errors.hpp"
#include "gridfreq/textdoc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gridfreq {

using complexd = std::complex<double>;

std::complex<double> RationalLaplace::eval(std::complex<double> s) const {
    complexd n = 0, d = 0;
    for (int k = 3; k >= 0; --k) n = n * s + num[k];
    for (int k = 5; k >= 0; --k) d = d * s + den[k];
    return n / d;
}

namespace {

struct TwoRegionParams {
    double H1, H2, D1, D2, R1, R2, T, T_g;
};

TwoRegionParams unpack(const SystemModel& sys) {
    if (sys.regions.size() != 2)
        throw ConfigError("closed-form solution requires exactly 2 regions, got " +
                          std::to_string(sys.regions.size()));
    if (sys.lines.size() != 1)
        throw ConfigError("closed-form solution requires exactly 1 line, got " +
                          std::to_string(sys.lines.size()));
    TwoRegionParams p;
    p.H1 = sys.regions[0].H;
    p.H2 = sys.regions[1].H;
    p.D1 = sys.regions[0].d_prime();
    p.D2 = sys.regions[1].d_prime();
    p.R1 = sys.regions[0].R;
    p.R2 = sys.regions[1].R;
    p.T = sys.lines[0].T;
    p.T_g = sys.T_g;
    if (!(p.D1 > 0) || !(p.D2 > 0))
        throw ConfigError("closed-form solution requires positive damping in both regions");
    if (!(p.T > 0)) throw ConfigError("closed-form solution requires a positive line stiffness");
    return p;
}

Eigen::Vector4d shared_cubic(const TwoRegionParams& p) {
    double H = p.H1 + p.H2, D = p.D1 + p.D2;
    Eigen::Vector4d q;
    q[0] = D * p.T;
    q[1] = 2.0 * H * p.T + p.D1 * p.D2;
    q[2] = 2.0 * (p.D1 * p.H2 + p.D2 * p.H1);
    q[3] = 4.0 * p.H1 * p.H2;
    return q;
}

// numerator of the region with response R_a and local loss P_a, facing a
// neighbour with (H_b, D_b) and loss P_b
Eigen::Vector4d region_numerator(const TwoRegionParams& p, double Hb, double Db, double Ra,
                                 double Rb, double Pa, double Pb) {
    Eigen::Vector4d n;
    n[3] = -2.0 * Hb * Pa;
    n[2] = 2.0 * Hb * Ra / p.T_g - Db * Pa;
    n[1] = Db * Ra / p.T_g - p.T * (Pa + Pb);
    n[0] = (Ra + Rb) * p.T / p.T_g;
    return n;
}

} // namespace

std::array<RationalLaplace, 2> build_laplace_solution(const SystemModel& sys,
                                                      const Eigen::Vector2d& losses) {
    TwoRegionParams p = unpack(sys);
    if (losses[0] < 0 || losses[1] < 0)
        throw ConfigError("closed-form solution: negative loss");

    Eigen::Vector4d q = shared_cubic(p);
    std::array<RationalLaplace, 2> out;
    out[0].num = region_numerator(p, p.H2, p.D2, p.R1, p.R2, losses[0], losses[1]);
    out[1].num = region_numerator(p, p.H1, p.D1, p.R2, p.R1, losses[1], losses[0]);
    for (auto& rl : out) {
        rl.den.setZero();
        rl.den.tail<4>() = q; // den = s²·q(s)
    }
    return out;
}

std::array<RationalLaplace, 2> build_laplace_solution(const SystemModel& sys,
                                                      const FaultSpec& fault) {
    int at = sys.index_of(fault.region);
    if (at < 0) throw ConfigError("closed-form solution: fault region '" + fault.region + "' not in system");
    Eigen::Vector2d losses = Eigen::Vector2d::Zero();
    losses[at] = fault.P_L;
    return build_laplace_solution(sys, losses);
}

PartialFractions partial_fractions(const RationalLaplace& rl) {
    if (rl.den[0] != 0.0 || rl.den[1] != 0.0)
        throw NumericError("decomposition expects a double pole at the origin (den[0] = den[1] = 0)");
    if (!(rl.den[5] > 0))
        throw NumericError("decomposition expects a positive leading denominator coefficient");

    Eigen::Vector4d q = rl.den.tail<4>();
    double scale = q.cwiseAbs().maxCoeff();
    Eigen::Vector4d qs = q / scale;

    // match numerator coefficients of
    //   N(s) = c_t·q(s) + c_c·s·q(s) + (r0 + r1·s + r2·s²)·s²
    // degree by degree (s⁰..s⁴); unknowns x = (c_t, c_c, r0/scale, r1/scale, r2/scale)
    Eigen::Matrix<double, 5, 5> M = Eigen::Matrix<double, 5, 5>::Zero();
    Eigen::Matrix<double, 5, 1> rhs;
    for (int k = 0; k < 4; ++k) M(k, 0) = qs[k];     // c_t·q
    for (int k = 0; k < 4; ++k) M(k + 1, 1) = qs[k]; // c_c·s·q
    M(2, 2) = 1.0;
    M(3, 3) = 1.0;
    M(4, 4) = 1.0;
    for (int k = 0; k < 4; ++k) rhs[k] = rl.num[k] / scale;
    rhs[4] = 0.0;

    Eigen::JacobiSVD<Eigen::Matrix<double, 5, 5>> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    double cond = svd.singularValues()(0) / svd.singularValues()(4);
    if (!(svd.singularValues()(4) > 0) || cond > 1e12)
        throw NumericError("partial-fraction identification is ill-conditioned (condition " +
                           format_double(cond) + ")");
    Eigen::Matrix<double, 5, 1> x = svd.solve(rhs);

    PartialFractions pf;
    pf.c_t = x[0];
    pf.c_const = x[1];
    pf.cubic_num = scale * x.tail<3>();
    pf.cubic_den = q;
    pf.condition = cond;

    // recombine and insist the identification reproduced the input exactly
    Eigen::Matrix<double, 5, 1> back;
    for (int k = 0; k < 4; ++k) back[k] = pf.c_t * q[k];
    back[4] = 0.0;
    for (int k = 0; k < 4; ++k) back[k + 1] += pf.c_const * q[k];
    for (int k = 0; k < 3; ++k) back[k + 2] += pf.cubic_num[k];
    double num_scale = rl.num.cwiseAbs().maxCoeff();
    double err = std::max(std::abs(back[4]), (back.head<4>() - rl.num).cwiseAbs().maxCoeff());
    if (err > 1e-6 * num_scale)
        throw NumericError("partial-fraction recombination failed to reproduce the input (gap " +
                           format_double(err / num_scale) + " relative)");
    return pf;
}

PartialFractions faulted_partial_fractions_expanded(const SystemModel& sys, const FaultSpec& fault) {
    TwoRegionParams p = unpack(sys);
    int at = sys.index_of(fault.region);
    if (at < 0) throw ConfigError("fault region '" + fault.region + "' not in system");

    // relabel so the faulted region is "1"
    double H1 = p.H1, H2 = p.H2, D1 = p.D1, D2 = p.D2, R1 = p.R1, R2 = p.R2;
    if (at == 1) {
        std::swap(H1, H2);
        std::swap(D1, D2);
        std::swap(R1, R2);
    }
    double PL = fault.P_L, T = p.T, Tg = p.T_g;
    double H = H1 + H2, D = D1 + D2, R = R1 + R2;

    double C1 = 4 * H1 * H2 *
                (PL * Tg * T * D + 2 * H * R * T - R1 * D2 * D2 + R2 * D1 * D2);
    double C2 = 2 * (PL * Tg * T * D2 * (H1 - H2) * (D1 + D2)
                     + 2 * R * T * (D2 * H1 * H1 + D1 * H2 * H2)
                     + D1 * D2 * D2 * (H1 * R2 - H2 * R1)
                     + D1 * D1 * D2 * H2 * R2
                     - D2 * D2 * D2 * H1 * R1);
    double C3 = 4 * H * H * R * T * T + 2 * H * D * PL * Tg * T * T
                - D2 * D2 * T * (PL * Tg * D + 2 * H1 * (2 * R1 + R2))
                + 2 * D1 * D2 * T * (H1 * R2 + 2 * H2 * R1 + H2 * R2)
                - 2 * D1 * D1 * T * H2 * R2
                + D1 * D2 * D2 * (R2 * D1 - R1 * D2);

    PartialFractions pf;
    pf.c_t = R / (D * Tg);
    pf.c_const = -(2 * H * R + D * Tg * PL - D2 * (R1 * D2 - R2 * D1) / T) / (D * D * Tg);
    double denom = Tg * T * D * D;
    pf.cubic_num << C3 / denom, C2 / denom, C1 / denom;
    pf.cubic_den = shared_cubic(p); // symmetric under the relabeling
    return pf;
}

namespace {

template <typename Vec>
complexd eval_poly(const Vec& c, complexd z) {
    complexd v = 0;
    for (Eigen::Index k = c.size() - 1; k >= 0; --k) v = v * z + c[k];
    return v;
}

} // namespace

CubicRoots cubic_roots(const Eigen::Vector4d& c) {
    if (c[3] == 0.0) throw NumericError("cubic solve: leading coefficient is zero");

    // depressed form x³ + px + q via s = x − b/(3a)
    double a = c[3], b = c[2], cc = c[1], d = c[0];
    double shift = -b / (3 * a);
    double pp = (3 * a * cc - b * b) / (3 * a * a);
    double qq = (2 * b * b * b - 9 * a * b * cc + 27 * a * a * d) / (27 * a * a * a);

    std::array<complexd, 3> roots;
    double disc = -4 * pp * pp * pp - 27 * qq * qq;
    if (disc < 0) {
        // one real root, one conjugate pair (Cardano)
        double B = std::sqrt(qq * qq / 4 + pp * pp * pp / 27);
        double A = -qq / 2;
        double u = (A >= 0) ? std::cbrt(A + B) : std::cbrt(A - B);
        double v = (u != 0.0) ? -pp / (3 * u) : 0.0;
        double x1 = u + v;
        double re = -x1 / 2, im = (u - v) * std::numbers::sqrt3 / 2;
        roots = {complexd(x1, 0), complexd(re, std::abs(im)), complexd(re, -std::abs(im))};
    } else if (pp == 0.0) {
        roots = {complexd(std::cbrt(-qq), 0), complexd(std::cbrt(-qq), 0), complexd(std::cbrt(-qq), 0)};
    } else {
        // three real roots (trigonometric form; pp < 0 here)
        double m = 2 * std::sqrt(-pp / 3);
        double arg = std::clamp(3 * qq / (2 * pp) * std::sqrt(-3 / pp), -1.0, 1.0);
        double theta = std::acos(arg);
        for (int k = 0; k < 3; ++k)
            roots[k] = complexd(m * std::cos((theta - 2 * std::numbers::pi * k) / 3), 0);
    }
    for (auto& z : roots) z += shift;

    // Newton polish on the original cubic
    for (auto& z : roots) {
        for (int it = 0; it < 50; ++it) {
            complexd f = ((c[3] * z + c[2]) * z + c[1]) * z + c[0];
            complexd df = (3.0 * c[3] * z + 2.0 * c[2]) * z + c[1];
            if (std::abs(df) == 0.0) break;
            complexd step = f / df;
            z -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
        }
    }

    CubicRoots out;
    double scale = c.cwiseAbs().maxCoeff();

    // classify: snap near-real roots, then look for the real + pair split
    std::array<complexd, 3> snapped = roots;
    for (auto& z : snapped)
        if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z))) z = complexd(z.real(), 0);

    int reals = 0;
    for (auto& z : snapped)
        if (z.imag() == 0) ++reals;

    if (reals == 1) {
        int ri = 0;
        for (int k = 0; k < 3; ++k)
            if (snapped[k].imag() == 0) ri = k;
        complexd zr = snapped[ri];
        std::array<complexd, 2> pair;
        int pi = 0;
        for (int k = 0; k < 3; ++k)
            if (k != ri) pair[pi++] = snapped[k];
        complexd zp = (pair[0].imag() > 0) ? pair[0] : pair[1];
        complexd za = 0.5 * (zp + std::conj(pair[0].imag() > 0 ? pair[1] : pair[0]));
        out.roots = {zr, za, std::conj(za)};
        out.conjugate_pair = true;
    } else {
        std::sort(snapped.begin(), snapped.end(),
                  [](complexd l, complexd r) { return l.real() < r.real(); });
        out.roots = snapped;
        out.conjugate_pair = false;
    }

    for (auto& z : out.roots) {
        complexd f = ((c[3] * z + c[2]) * z + c[1]) * z + c[0];
        if (std::abs(f) >= 1e-9 * scale)
            throw NumericError("cubic solve: residual " + format_double(std::abs(f)) +
                               " exceeds 1e-9 of the coefficient scale");
    }
    return out;
}

TimeDomainSolution time_domain_solution(const PartialFractions& pf) {
    TimeDomainSolution td;
    td.c_t = pf.c_t;
    td.c_const = pf.c_const;
    td.roots = cubic_roots(pf.cubic_den);

    // q'(s) for the residue at each simple pole
    Eigen::Vector3d dq;
    dq << pf.cubic_den[1], 2 * pf.cubic_den[2], 3 * pf.cubic_den[3];
    double dq_scale = dq.cwiseAbs().maxCoeff();
    for (int k = 0; k < 3; ++k) {
        complexd z = td.roots.roots[k];
        complexd dqz = eval_poly(dq, z);
        if (std::abs(dqz) < 1e-12 * dq_scale)
            throw NumericError("time-domain closure: repeated pole (residue formula degenerates)");
        td.residues[k] = eval_poly(pf.cubic_num, z) / dqz;
    }
    return td;
}

double TimeDomainSolution::operator()(double t) const {
    double v = c_t * t + c_const;
    if (roots.conjugate_pair) {
        v += residues[0].real() * std::exp(roots.roots[0].real() * t);
        complexd z2 = roots.roots[1], Z2 = residues[1];
        v += 2.0 * std::exp(z2.real() * t) *
             (Z2.real() * std::cos(z2.imag() * t) - Z2.imag() * std::sin(z2.imag() * t));
    } else {
        for (int k = 0; k < 3; ++k)
            v += (residues[k] * std::exp(roots.roots[k] * t)).real();
    }
    return v;
}

ModeExtraction extract_modes(const PartialFractions& pf, const CoiParams& coi) {
    TimeDomainSolution td = time_domain_solution(pf);
    if (!td.roots.conjugate_pair)
        throw NumericError("mode extraction expects one real root and a conjugate pair");

    complexd z2 = td.roots.roots[1], Z2 = td.residues[1];
    ModeExtraction out;
    out.mode.a = -z2.real();
    out.mode.omega = z2.imag();
    out.mode.A = 2.0 * std::abs(Z2);
    // e^{−at}·(2ReZ₂·cosωt − 2ImZ₂·sinωt) = e^{−at}·A·sin(ωt + φ)
    out.mode.phi = (out.mode.A > 0) ? std::atan2(2.0 * Z2.real(), -2.0 * Z2.imag()) : 0.0;

    double K = coi_exponential_weight(coi);
    out.mode.C = pf.c_const + K; // aggregate 1/s term is −K
    out.real_root = td.roots.roots[0].real();
    out.real_residue = td.residues[0].real();
    out.pair_residue = Z2;

    double rate = coi.D_prime / (2.0 * coi.H);
    const int samples = 2000;
    double gap = 0.0;
    for (int k = 0; k <= samples; ++k) {
        double t = coi.T_g * k / samples;
        double own = out.real_residue * std::exp(out.real_root * t);
        double agg = K * std::exp(-rate * t);
        gap = std::max(gap, std::abs(own - agg));
    }
    out.coi_term_gap = gap;
    return out;
}

} // namespace gridfreq
