#include "gridfreq/mode_fit.hpp"
#include "gridfreq/coi_analytic.hpp"
#include "gridfreq/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

namespace gridfreq {

namespace {

// platform-stable uniform in [0, 1): top 53 bits of the engine output
double u01(std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; }

struct SweepDim {
    std::string key;
    ParamRange range;
    std::function<void(SystemModel&, FaultSpec&, double)> set;
};

// accepted sweep envelope per parameter kind (GB-scale defaults used across
// the tool; sweeps are meant to stay inside territory the models can cover)
struct Envelope {
    double lo, hi;
};

Envelope envelope_for(const std::string& key) {
    if (key == "P_L") return {300.0, 1800.0};
    if (key.rfind("H_", 0) == 0) return {5e3, 1.5e5};
    if (key.rfind("Dp_", 0) == 0) return {100.0, 1500.0};
    if (key.rfind("EFR_delay_", 0) == 0) return {0.0, 5.0};
    if (key.rfind("EFR_", 0) == 0) return {0.0, 3000.0};
    if (key.rfind("R_", 0) == 0) return {0.0, 3000.0};
    if (key.rfind("T_", 0) == 0) return {1e3, 5e4};
    throw ConfigError("sweep range '" + key + "' has no accepted bounds");
}

// every settable parameter key of this system, with its mutator
std::map<std::string, std::function<void(SystemModel&, FaultSpec&, double)>>
setters_for(const SystemModel& base) {
    std::map<std::string, std::function<void(SystemModel&, FaultSpec&, double)>> out;
    for (std::size_t i = 0; i < base.regions.size(); ++i) {
        const std::string id = base.regions[i].id;
        out["H_" + id] = [i](SystemModel& s, FaultSpec&, double v) { s.regions[i].H = v; };
        out["Dp_" + id] = [i](SystemModel& s, FaultSpec&, double v) {
            s.regions[i].D = v / s.regions[i].P_D;
        };
        out["R_" + id] = [i](SystemModel& s, FaultSpec&, double v) { s.regions[i].R = v; };
        out["EFR_" + id] = [i](SystemModel& s, FaultSpec&, double v) { s.regions[i].EFR = v; };
        out["EFR_delay_" + id] = [i](SystemModel& s, FaultSpec&, double v) {
            s.regions[i].EFR_delay = v;
        };
    }
    for (std::size_t l = 0; l < base.lines.size(); ++l) {
        const std::string key = "T_" + base.lines[l].from + "_" + base.lines[l].to;
        out[key] = [l](SystemModel& s, FaultSpec&, double v) { s.lines[l].T = v; };
    }
    out["P_L"] = [](SystemModel&, FaultSpec& f, double v) { f.P_L = v; };
    return out;
}

} // namespace

std::map<std::string, double> system_features(const SystemModel& sys, const FaultSpec& fault) {
    std::map<std::string, double> f;
    double h_fault = 0.0;
    for (const RegionParams& r : sys.regions) {
        f["H_" + r.id] = r.H;
        f["Dp_" + r.id] = r.d_prime();
        f["R_" + r.id] = r.R;
        f["EFR_" + r.id] = r.EFR;
        f["EFR_delay_" + r.id] = r.EFR_delay;
        f["inv_H_" + r.id] = 1.0 / r.H;
        bool faulted = r.id == fault.region;
        f["fault_" + r.id] = faulted ? 1.0 : 0.0;
        if (faulted) h_fault = r.H;
    }
    for (const Line& ln : sys.lines) f["T_" + ln.from + "_" + ln.to] = ln.T;
    f["P_L"] = fault.P_L;
    f["P_L_over_H_fault"] = h_fault > 0 ? fault.P_L / h_fault : 0.0;
    return f;
}

SweepResult run_sweep(const SweepSpec& spec, const SystemModel& base) {
    if (spec.count < 1) throw ConfigError("sweep count must be at least 1");
    if (spec.scheme != "grid" && spec.scheme != "latin_hypercube")
        throw ConfigError("sweep scheme must be 'grid' or 'latin_hypercube', got '" + spec.scheme +
                          "'");
    if (!(spec.dt > 0)) throw ConfigError("sweep dt must be positive");
    if (spec.t_end < base.T_g)
        throw ConfigError("sweep t_end must reach the response delivery time " +
                          format_double(base.T_g));

    auto setters = setters_for(base);
    std::vector<SweepDim> dims;
    for (const auto& [key, range] : spec.ranges) {
        auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("sweep range '" + key + "' does not name a parameter of this system");
        if (!(range.lo <= range.hi))
            throw ConfigError("sweep range '" + key + "' is inverted (lo > hi)");
        Envelope env = envelope_for(key);
        if (range.lo < env.lo || range.hi > env.hi)
            throw ConfigError("sweep range '" + key + "' leaves the accepted bounds [" +
                              format_double(env.lo) + ", " + format_double(env.hi) + "]");
        dims.push_back({key, range, it->second});
    }

    std::vector<std::string> fault_list = spec.fault_regions;
    if (fault_list.empty() && base.fault) fault_list = {base.fault->region};
    if (fault_list.empty())
        throw ConfigError("sweep needs a loss location: list fault_regions or give the base "
                          "config a [fault]");
    for (const std::string& id : fault_list)
        if (base.index_of(id) < 0)
            throw ConfigError("sweep fault region '" + id + "' not in the system");
    if (!spec.ranges.count("P_L") && !base.fault)
        throw ConfigError("sweep needs a loss size: give a P_L range or a base [fault]");

    std::vector<double> grid = spec.time_grid;
    if (grid.empty())
        for (int j = 1; j <= 10; ++j) grid.push_back(base.T_g * j / 10.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!(grid[j] > 0) || grid[j] > base.T_g)
            throw ConfigError("sweep time grid must lie in (0, T_g]");
        if (j > 0 && grid[j] <= grid[j - 1])
            throw ConfigError("sweep time grid must be strictly ascending");
    }

    const int count = spec.count;
    const int nvary = [&] {
        int v = 0;
        for (const SweepDim& d : dims)
            if (d.range.hi > d.range.lo) ++v;
        return v;
    }();

    // every random number is drawn here, sequentially, before any simulation
    Eigen::MatrixXd values(count, std::max<std::size_t>(dims.size(), 1));
    std::vector<int> fault_idx(count, 0);
    std::mt19937_64 rng(spec.seed);
    if (spec.scheme == "latin_hypercube") {
        for (std::size_t d = 0; d < dims.size(); ++d) {
            const ParamRange& r = dims[d].range;
            if (!(r.hi > r.lo)) {
                values.col(d).setConstant(r.lo);
                continue;
            }
            std::vector<int> perm(count);
            for (int k = 0; k < count; ++k) perm[k] = k;
            for (int i = count - 1; i >= 1; --i)
                std::swap(perm[i], perm[int(u01(rng) * (i + 1))]);
            for (int k = 0; k < count; ++k)
                values(k, d) = r.lo + (r.hi - r.lo) * (perm[k] + u01(rng)) / count;
        }
        if (fault_list.size() > 1)
            for (int k = 0; k < count; ++k)
                fault_idx[k] = std::min<int>(fault_list.size() - 1,
                                             int(u01(rng) * fault_list.size()));
    } else { // grid: cell centres of the smallest lattice holding `count` points
        int m = 1;
        if (nvary > 0)
            while (std::pow(double(m), nvary) < count) ++m;
        for (int k = 0; k < count; ++k) {
            long long rem = k;
            for (std::size_t d = 0; d < dims.size(); ++d) {
                const ParamRange& r = dims[d].range;
                if (!(r.hi > r.lo)) {
                    values(k, d) = r.lo;
                    continue;
                }
                int idx = int(rem % m);
                rem /= m;
                values(k, d) = r.lo + (r.hi - r.lo) * (idx + 0.5) / m;
            }
            fault_idx[k] = k % int(fault_list.size());
        }
    }

    const int n_win = int(std::llround(base.T_g / spec.dt)) + 1;
    std::vector<int> grid_idx;
    for (double tj : grid) grid_idx.push_back(int(std::llround(tj / spec.dt)));

    std::vector<std::optional<SamplePoint>> slots(count);
    std::vector<std::string> failures(count);

    auto make_sample = [&](int k) {
        SystemModel sys = base;
        FaultSpec fault;
        fault.region = fault_list[fault_idx[k]];
        fault.P_L = base.fault ? base.fault->P_L : 0.0;
        for (std::size_t d = 0; d < dims.size(); ++d) dims[d].set(sys, fault, values(k, d));

        FrequencyTrace tr = simulate(sys, fault, spec.dt, spec.t_end);
        TraceMetrics tm = trace_metrics(tr, sys.T_g);

        SamplePoint pt;
        pt.index = k;
        pt.features = system_features(sys, fault);

        const int R = int(sys.regions.size());
        const int win = std::min<int>(n_win, tr.samples());
        Eigen::VectorXd fw = tr.weighted_mean();
        // a strided copy of the window is plenty for a 5-parameter fit
        const int stride = std::max(1, (win - 1) / 2500);
        const int m = (win - 1) / stride + 1;
        Eigen::VectorXd tt(m);
        for (int s = 0; s < m; ++s) tt[s] = tr.t[s * stride];
        std::vector<SinusoidFit> fits(R);
        for (int i = 0; i < R; ++i) {
            if (spec.fit_modes) {
                Eigen::VectorXd resid(m);
                for (int s = 0; s < m; ++s)
                    resid[s] = tr.df(s * stride, i) - fw[s * stride];
                fits[i] = fit_damped_sinusoid(tt, resid);
                pt.fits_converged = pt.fits_converged && fits[i].converged;
                pt.targets["Aomega_" + sys.regions[i].id] = fits[i].mode.A * fits[i].mode.omega;
            }
            pt.targets["nadir_" + sys.regions[i].id] = tm.nadir[i];
            pt.targets["rocof_" + sys.regions[i].id] = tm.rocof_max_abs[i];
            for (std::size_t j = 0; j < grid_idx.size(); ++j)
                pt.targets["intf_" + sys.regions[i].id + "_k" + std::to_string(j)] =
                    tr.int_df(std::min(grid_idx[j], win - 1), i);
        }
        pt.targets["qss"] = tm.qss;

        for (const Line& ln : sys.lines) {
            int a = sys.index_of(ln.from), b = sys.index_of(ln.to);
            // running trapezoid of q_from − q_to gives the double integral
            double acc = 0.0;
            std::size_t j = 0;
            for (int s = 0; s < win && j < grid_idx.size(); ++s) {
                if (s > 0)
                    acc += 0.5 * spec.dt *
                           ((tr.int_df(s - 1, a) - tr.int_df(s - 1, b)) +
                            (tr.int_df(s, a) - tr.int_df(s, b)));
                while (j < grid_idx.size() && grid_idx[j] == s) {
                    pt.targets["dd_" + ln.from + "_" + ln.to + "_k" + std::to_string(j)] = acc;
                    ++j;
                }
            }
        }

        // closed-form cross-check where the rational solution applies
        bool rational_ok = spec.fit_modes && R == 2 && sys.lines.size() == 1 &&
                           sys.regions[0].EFR == 0 &&
                           sys.regions[1].EFR == 0 && fault.P_L > 0 &&
                           sys.regions[0].d_prime() > 0 && sys.regions[1].d_prime() > 0 &&
                           sys.lines[0].T > 0;
        if (rational_ok) {
            try {
                auto rl = build_laplace_solution(sys, fault);
                CoiParams coi = aggregate(sys, fault);
                ModeExtraction me0 = extract_modes(partial_fractions(rl[0]), coi);
                ModeExtraction me1 = extract_modes(partial_fractions(rl[1]), coi);
                // the residual channel subtracts the inertia-weighted mean, so
                // the oscillation it carries is the region's pair residue less
                // the weighted mean of both residues
                double H0 = sys.regions[0].H, H1 = sys.regions[1].H;
                std::complex<double> zbar =
                    (H0 * me0.pair_residue + H1 * me1.pair_residue) / (H0 + H1);
                const ModeExtraction* me[2] = {&me0, &me1};
                for (int i = 0; i < R; ++i) {
                    if (!fits[i].converged) continue;
                    double ana = 2.0 * std::abs(me[i]->pair_residue - zbar) * me[i]->mode.omega;
                    double fit = pt.targets["Aomega_" + sys.regions[i].id];
                    pt.oscillation_check[sys.regions[i].id] =
                        std::abs(fit - ana) / std::max(std::abs(ana), 1e-9);
                }
            } catch (const NumericError&) {
                // no conjugate pair (or a degenerate decomposition): no check
            }
        }
        return pt;
    };

    std::atomic<int> next{0};
    int nthreads = std::min<int>(count, std::max(1u, std::thread::hardware_concurrency()));
    auto worker = [&] {
        for (int k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
            try {
                slots[k] = make_sample(k);
            } catch (const std::exception& e) {
                failures[k] = e.what();
            }
        }
    };
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    SweepResult out;
    out.time_grid = grid;
    out.seed = spec.seed;
    out.ranges = spec.ranges;
    for (int k = 0; k < count; ++k) {
        if (slots[k])
            out.samples.push_back(std::move(*slots[k]));
        else
            out.excluded.push_back({k, failures[k]});
    }
    return out;
}

namespace {

// dominant positive-frequency peak of a decimated channel, refined by
// parabolic interpolation of the log-magnitude around the best bin
double spectral_peak_omega(const Eigen::VectorXd& d, double spacing) {
    const int n = int(d.size());
    const int stride = (n + 511) / 512;
    std::vector<double> x;
    for (int i = 0; i < n; i += stride) x.push_back(d[i]);
    const int m = int(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= m;
    for (double& v : x) v -= mean;

    const double dt_eff = spacing * stride;
    int best = 1;
    double best_mag = -1.0;
    std::vector<double> mags(m / 2 + 1, 0.0);
    for (int k = 1; k <= m / 2; ++k) {
        const double ang = -2.0 * std::numbers::pi * k / m;
        const std::complex<double> w(std::cos(ang), std::sin(ang));
        std::complex<double> cur(1.0, 0.0), acc(0.0, 0.0);
        for (int j = 0; j < m; ++j) {
            acc += x[j] * cur;
            cur *= w;
        }
        mags[k] = std::abs(acc);
        if (mags[k] > best_mag) {
            best_mag = mags[k];
            best = k;
        }
    }
    double shift = 0.0;
    if (best > 1 && best < m / 2 && mags[best - 1] > 0 && mags[best + 1] > 0 && mags[best] > 0) {
        double l = std::log(mags[best - 1]), c = std::log(mags[best]),
               r = std::log(mags[best + 1]);
        double den = l - 2 * c + r;
        if (den < 0) shift = std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
    }
    return std::max(2.0 * std::numbers::pi * (best + shift) / (m * dt_eff), 1e-3);
}

struct LmResult {
    Eigen::Matrix<double, 5, 1> theta;
    double ssq = 0.0;
    int iterations = 0;
    bool converged = false;
};

LmResult levenberg_refine(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                          Eigen::Matrix<double, 5, 1> theta) {
    const int n = int(t.size());
    auto ssq_of = [&](const Eigen::Matrix<double, 5, 1>& th) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = th[1] * std::exp(-th[0] * t[i]) * std::sin(th[2] * t[i] + th[3]) + th[4] -
                       y[i];
            s += r * r;
        }
        return s;
    };

    LmResult out;
    out.theta = theta;
    out.ssq = ssq_of(theta);
    double lambda = 1e-3;
    Eigen::MatrixXd J(n, 5);
    Eigen::VectorXd r(n);
    for (int it = 0; it < 100; ++it) {
        ++out.iterations;
        const double a = out.theta[0], A = out.theta[1], w = out.theta[2], ph = out.theta[3],
                     C = out.theta[4];
        for (int i = 0; i < n; ++i) {
            double e = std::exp(-a * t[i]);
            double s = std::sin(w * t[i] + ph), c = std::cos(w * t[i] + ph);
            r[i] = A * e * s + C - y[i];
            J(i, 0) = -t[i] * A * e * s;
            J(i, 1) = e * s;
            J(i, 2) = t[i] * A * e * c;
            J(i, 3) = A * e * c;
            J(i, 4) = 1.0;
        }
        Eigen::Matrix<double, 5, 5> JtJ = J.transpose() * J;
        Eigen::Matrix<double, 5, 1> g = J.transpose() * r;
        double dmax = JtJ.diagonal().maxCoeff();
        bool accepted = false;
        while (!accepted && lambda < 1e12) {
            Eigen::Matrix<double, 5, 5> M = JtJ;
            for (int q = 0; q < 5; ++q)
                M(q, q) += lambda * std::max(JtJ(q, q), 1e-12 * std::max(dmax, 1.0));
            Eigen::Matrix<double, 5, 1> step = M.ldlt().solve(-g);
            Eigen::Matrix<double, 5, 1> trial = out.theta + step;
            double trial_ssq = ssq_of(trial);
            if (trial_ssq <= out.ssq && step.allFinite()) {
                accepted = true;
                double rel = 0.0;
                for (int q = 0; q < 5; ++q)
                    rel = std::max(rel, std::abs(step[q]) / (1.0 + std::abs(out.theta[q])));
                out.theta = trial;
                out.ssq = trial_ssq;
                lambda = std::max(lambda / 3.0, 1e-12);
                if (rel < 1e-8) {
                    out.converged = true;
                    return out;
                }
            } else {
                lambda *= 4.0;
            }
        }
        if (lambda >= 1e12) break;
    }
    return out;
}

} // namespace

SinusoidFit fit_damped_sinusoid(const Eigen::VectorXd& t, const Eigen::VectorXd& y) {
    if (t.size() != y.size()) throw ConfigError("sinusoid fit: time/value size mismatch");
    const int n = int(t.size());
    if (n < 8) throw ConfigError("sinusoid fit: at least 8 samples required");

    SinusoidFit out;
    double scale = y.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        out.converged = true;
        return out;
    }
    double mean = y.mean();
    if ((y.array() - mean).abs().maxCoeff() <= 1e-14 * std::max(1.0, std::abs(mean))) {
        out.mode.C = mean;
        out.converged = true;
        return out;
    }

    const double spacing = (t[n - 1] - t[0]) / (n - 1);
    const double C0 = y.tail(std::max(n / 4, 1)).mean();
    Eigen::VectorXd d = y.array() - C0;

    double omega0 = spectral_peak_omega(d, spacing);

    // attenuation guess from the decay of quarter-window RMS levels
    double a0 = 0.1;
    {
        int q = n / 4;
        double first = -1, last = -1, t_first = 0, t_last = 0;
        for (int s = 0; s < 4; ++s) {
            double rms = d.segment(s * q, q).norm() / std::sqrt(double(q));
            if (rms <= 1e-12 * scale) continue;
            double centre = t[s * q + q / 2];
            if (first < 0) {
                first = rms;
                t_first = centre;
            }
            last = rms;
            t_last = centre;
        }
        if (first > 0 && t_last > t_first)
            a0 = std::clamp(std::log(first / last) / (t_last - t_first), 1e-3, 10.0);
    }

    auto linear_phase_init = [&](double a, double w, Eigen::Matrix<double, 5, 1>& th) {
        double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
        for (int i = 0; i < n; ++i) {
            double e = std::exp(-a * t[i]);
            double bs = e * std::sin(w * t[i]), bc = e * std::cos(w * t[i]);
            s11 += bs * bs;
            s12 += bs * bc;
            s22 += bc * bc;
            b1 += bs * d[i];
            b2 += bc * d[i];
        }
        double det = s11 * s22 - s12 * s12;
        double p, q;
        if (std::abs(det) > 1e-12 * std::max(s11, s22) * std::max(s11, s22) && det != 0.0) {
            p = (s22 * b1 - s12 * b2) / det;
            q = (s11 * b2 - s12 * b1) / det;
        } else {
            p = d.cwiseAbs().maxCoeff();
            q = 0.0;
        }
        th << a, std::hypot(p, q), w, std::atan2(q, p), C0;
    };

    LmResult best;
    best.ssq = std::numeric_limits<double>::infinity();
    for (double factor : {1.0, 0.5, 2.0}) {
        Eigen::Matrix<double, 5, 1> th;
        linear_phase_init(a0, omega0 * factor, th);
        LmResult res = levenberg_refine(t, y, th);
        if (res.ssq < best.ssq) best = res;
    }

    double a = best.theta[0], A = best.theta[1], w = best.theta[2], ph = best.theta[3],
           C = best.theta[4];
    if (A < 0) {
        A = -A;
        ph += std::numbers::pi;
    }
    if (w < 0) {
        w = -w;
        ph = std::numbers::pi - ph;
    }
    ph = std::remainder(ph, 2.0 * std::numbers::pi);
    if (ph <= -std::numbers::pi) ph = std::numbers::pi;
    if (A == 0.0) ph = 0.0;

    out.mode = {a, A, w, ph, C};
    out.rms = std::sqrt(best.ssq / n);
    out.unmodelled_energy = best.ssq / std::max(y.squaredNorm(), 1e-300);
    out.iterations = best.iterations;
    out.converged = best.converged;
    return out;
}

double LinearModel::predict(const std::map<std::string, double>& point) const {
    double v = intercept;
    for (std::size_t i = 0; i < features.size(); ++i) {
        auto it = point.find(features[i]);
        if (it == point.end())
            throw ConfigError("model '" + target + "': point lacks feature '" + features[i] + "'");
        v += coef[i] * it->second;
    }
    return v;
}

bool LinearModel::covers(const std::map<std::string, double>& point, double slack) const {
    for (const auto& [key, range] : ranges) {
        auto it = point.find(key);
        if (it == point.end()) continue;
        double pad = slack * std::max({1.0, std::abs(range.lo), std::abs(range.hi)});
        if (it->second < range.lo - pad || it->second > range.hi + pad) return false;
    }
    return true;
}

LinearModel fit_linear_model(const std::vector<SamplePoint>& samples,
                             const std::vector<std::string>& candidate_features,
                             const std::string& target_key, std::uint64_t seed) {
    const int n = int(samples.size());
    if (n == 0) throw ConfigError("linear fit: no samples");

    LinearModel model;
    model.target = target_key;
    model.n = n;
    model.seed = seed;

    Eigen::VectorXd y(n);
    for (int k = 0; k < n; ++k) {
        auto it = samples[k].targets.find(target_key);
        if (it == samples[k].targets.end())
            throw ConfigError("linear fit: sample " + std::to_string(samples[k].index) +
                              " lacks target '" + target_key + "'");
        y[k] = it->second;
    }

    // record training spans of every candidate; keep only the varying ones
    std::vector<int> kept;
    Eigen::MatrixXd all(n, candidate_features.size());
    for (std::size_t c = 0; c < candidate_features.size(); ++c) {
        const std::string& key = candidate_features[c];
        double lo = 0, hi = 0;
        for (int k = 0; k < n; ++k) {
            auto it = samples[k].features.find(key);
            if (it == samples[k].features.end())
                throw ConfigError("linear fit: sample " + std::to_string(samples[k].index) +
                                  " lacks feature '" + key + "'");
            all(k, c) = it->second;
            lo = k == 0 ? it->second : std::min(lo, it->second);
            hi = k == 0 ? it->second : std::max(hi, it->second);
        }
        model.ranges[key] = {lo, hi};
        if (hi - lo > 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)})) kept.push_back(int(c));
    }

    const int p = int(kept.size());
    if (n < 10 * (p + 1))
        throw ConfigError("linear fit for '" + target_key + "': " + std::to_string(n) +
                          " samples cannot support " + std::to_string(p) +
                          " features (need 10 per coefficient)");

    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    for (int c = 0; c < p; ++c) X.col(c + 1) = all.col(kept[c]);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p + 1)
        throw NumericError("linear fit for '" + target_key +
                           "': design matrix is rank-deficient");
    Eigen::VectorXd beta = qr.solve(y);

    model.intercept = beta[0];
    model.coef = beta.tail(p);
    for (int c = 0; c < p; ++c) model.features.push_back(candidate_features[kept[c]]);

    Eigen::VectorXd resid = y - X * beta; // target − prediction
    model.rms = resid.norm() / std::sqrt(double(n));
    model.max_abs = resid.size() ? resid.cwiseAbs().maxCoeff() : 0.0;
    model.offset_upper = std::max(0.0, resid.maxCoeff());
    model.offset_lower = std::min(0.0, resid.minCoeff());
    return model;
}

namespace {

std::vector<std::string> default_basis(const SweepResult& sweep) {
    if (sweep.samples.empty()) throw ConfigError("regression: sweep produced no samples");
    std::vector<std::string> basis;
    for (const auto& [key, value] : sweep.samples.front().features) {
        bool wanted = key == "P_L" || key == "P_L_over_H_fault" || key.rfind("H_", 0) == 0 ||
                      key.rfind("Dp_", 0) == 0 || key.rfind("R_", 0) == 0 ||
                      key.rfind("T_", 0) == 0 || key.rfind("inv_H_", 0) == 0 ||
                      key.rfind("fault_", 0) == 0;
        if (wanted) basis.push_back(key);
    }
    return basis;
}

} // namespace

std::map<std::string, LinearModel> regress_rocof_term(const SweepResult& sweep) {
    std::vector<std::string> basis = default_basis(sweep);
    std::map<std::string, LinearModel> out;
    for (const auto& [key, value] : sweep.samples.front().targets) {
        if (key.rfind("Aomega_", 0) != 0) continue;
        out[key.substr(7)] = fit_linear_model(sweep.samples, basis, key, sweep.seed);
    }
    return out;
}

std::map<std::string, LinearModel> regress_energy_integrals(const SweepResult& sweep) {
    std::vector<std::string> basis = default_basis(sweep);
    std::map<std::string, LinearModel> out;
    for (const auto& [key, value] : sweep.samples.front().targets) {
        if (key.rfind("intf_", 0) != 0 && key.rfind("dd_", 0) != 0) continue;
        out[key] = fit_linear_model(sweep.samples, basis, key, sweep.seed);
    }
    return out;
}

void save_models(const std::string& path, const std::vector<LinearModel>& models) {
    TextDoc doc;
    doc.origin = path;
    DocSection head;
    head.name = "models";
    head.set("version", DocValue::of(1.0));
    head.set("basis", DocValue::of(std::string("hand-picked linear feature basis v1")));
    doc.sections.push_back(head);

    for (const LinearModel& m : models) {
        DocSection s;
        s.name = "model";
        s.is_array = true;
        s.set("target", DocValue::of(m.target));
        s.set("features", DocValue::list(m.features));
        std::vector<double> coef(m.coef.data(), m.coef.data() + m.coef.size());
        s.set("coef", DocValue::list(coef));
        s.set("intercept", DocValue::of(m.intercept));
        s.set("offset_upper", DocValue::of(m.offset_upper));
        s.set("offset_lower", DocValue::of(m.offset_lower));
        s.set("rms", DocValue::of(m.rms));
        s.set("max_abs", DocValue::of(m.max_abs));
        s.set("n", DocValue::of(double(m.n)));
        s.set("seed", DocValue::of(double(m.seed)));
        std::vector<std::string> names;
        std::vector<double> lo, hi;
        for (const auto& [key, range] : m.ranges) {
            names.push_back(key);
            lo.push_back(range.lo);
            hi.push_back(range.hi);
        }
        s.set("range_names", DocValue::list(names));
        s.set("range_lo", DocValue::list(lo));
        s.set("range_hi", DocValue::list(hi));
        doc.sections.push_back(s);
    }
    save_textdoc(doc, path);
}

std::vector<LinearModel> load_models(const std::string& path) {
    TextDoc doc = load_textdoc(path);
    std::vector<LinearModel> out;
    for (const DocSection* s : doc.find_all("model")) {
        const std::string where = doc.origin + ": model";
        LinearModel m;
        m.target = s->get_string("target", where);
        m.features = s->get_string_list("features", where);
        std::vector<double> coef = s->get_number_list("coef", where);
        if (coef.size() != m.features.size())
            throw ConfigError(where + " '" + m.target + "': coef/features length mismatch");
        m.coef.resize(coef.size());
        for (std::size_t i = 0; i < coef.size(); ++i) m.coef[i] = coef[i];
        m.intercept = s->get_number("intercept", where);
        m.offset_upper = s->get_number("offset_upper", where);
        m.offset_lower = s->get_number("offset_lower", where);
        m.rms = s->get_number("rms", where);
        m.max_abs = s->get_number("max_abs", where);
        m.n = int(s->get_number("n", where));
        m.seed = std::uint64_t(s->get_number("seed", where));
        std::vector<std::string> names = s->get_string_list("range_names", where);
        std::vector<double> lo = s->get_number_list("range_lo", where);
        std::vector<double> hi = s->get_number_list("range_hi", where);
        if (names.size() != lo.size() || names.size() != hi.size())
            throw ConfigError(where + " '" + m.target + "': range arrays disagree in length");
        for (std::size_t i = 0; i < names.size(); ++i) m.ranges[names[i]] = {lo[i], hi[i]};
        out.push_back(std::move(m));
    }
    return out;
}

void write_samples_csv(std::ostream& os, const SweepResult& sweep) {
    os << "index";
    if (!sweep.samples.empty()) {
        const SamplePoint& first = sweep.samples.front();
        for (const auto& [key, value] : first.features) os << "," << key;
        for (const auto& [key, value] : first.targets) os << "," << key;
        os << ",fits_converged";
    }
    os << "\n";
    for (const SamplePoint& pt : sweep.samples) {
        os << pt.index;
        for (const auto& [key, value] : pt.features) os << "," << format_double(value);
        for (const auto& [key, value] : pt.targets) os << "," << format_double(value);
        os << "," << (pt.fits_converged ? 1 : 0) << "\n";
    }
}

SweepSpec parse_sweep_spec(const TextDoc& doc) {
    const DocSection* s = doc.find_one("sweep");
    if (!s) throw ConfigError(doc.origin + ": missing [sweep] section");
    const std::string where = doc.origin + ": sweep";

    SweepSpec spec;
    double count = s->get_number("count", where);
    if (count < 1 || count != std::floor(count))
        throw ConfigError(where + ".count: must be a positive integer");
    spec.count = int(count);
    if (s->has("scheme")) spec.scheme = s->get_string("scheme", where);
    double seed = s->get_number_or("seed", 0.0);
    if (seed < 0 || seed != std::floor(seed))
        throw ConfigError(where + ".seed: must be a non-negative integer");
    spec.seed = std::uint64_t(seed);
    spec.dt = s->get_number_or("dt", 1e-3);
    spec.t_end = s->get_number_or("t_end", 30.0);
    if (s->has("fault_regions")) spec.fault_regions = s->get_string_list("fault_regions", where);
    if (s->has("time_grid")) spec.time_grid = s->get_number_list("time_grid", where);

    for (const DocSection* r : doc.find_all("range")) {
        const std::string rwhere = doc.origin + ": range";
        std::string name = r->get_string("name", rwhere);
        if (spec.ranges.count(name))
            throw ConfigError(rwhere + " '" + name + "': given twice");
        spec.ranges[name] = {r->get_number("lo", rwhere + " '" + name + "'"),
                             r->get_number("hi", rwhere + " '" + name + "'")};
    }
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) { return parse_sweep_spec(load_textdoc(path)); }

} // namespace gridfreq
