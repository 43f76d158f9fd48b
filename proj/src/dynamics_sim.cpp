#include "gridfreq/dynamics_sim.hpp"
#include "gridfreq/errors.hpp"

#include <cmath>
#include <ostream>

namespace gridfreq {

Eigen::VectorXd FrequencyTrace::weighted_mean() const {
    return df * (inertia / inertia.sum());
}

double response_injection(double t, const RegionParams& region, double T_g) {
    double pfr = (t <= T_g) ? region.R * (t / T_g) : region.R;
    double efr = 0.0;
    if (region.EFR > 0.0) {
        if (t >= region.EFR_delay + 1.0)
            efr = region.EFR;
        else if (t > region.EFR_delay)
            efr = region.EFR * (t - region.EFR_delay); // ramp to full over 1 s
    }
    return pfr + efr;
}

FrequencyTrace simulate(const SystemModel& sys, const FaultSpec& fault, double dt, double t_end) {
    const auto n = static_cast<Eigen::Index>(sys.regions.size());
    if (n == 0) throw ConfigError("simulate: empty system");
    if (!(dt > 0)) throw ConfigError("simulate: dt must be > 0");
    if (!(t_end > 0)) throw ConfigError("simulate: t_end must be > 0");
    int faulted = sys.index_of(fault.region);
    if (faulted < 0) throw ConfigError("simulate: fault region '" + fault.region + "' not in system");

    const auto steps = static_cast<Eigen::Index>(std::llround(t_end / dt));
    if (steps < 1) throw ConfigError("simulate: t_end shorter than one step");

    Eigen::VectorXd inv2H(n), dprime(n), loss = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        inv2H[i] = 1.0 / (2.0 * sys.regions[i].H);
        dprime[i] = sys.regions[i].d_prime();
    }
    loss[faulted] = fault.P_L;
    // the response services are triggered by the loss event; a zero-size fault
    // leaves them (and the whole system) at rest
    const bool activated = fault.P_L > 0;
    const Eigen::MatrixXd L = sys.stiffness_laplacian();

    FrequencyTrace tr;
    tr.dt = dt;
    tr.t_end = steps * dt;
    for (const auto& r : sys.regions) tr.region_ids.push_back(r.id);
    tr.inertia.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) tr.inertia[i] = sys.regions[i].H;
    tr.t.resize(steps + 1);
    tr.df.resize(steps + 1, n);
    tr.dp_import.resize(steps + 1, n);
    tr.int_df.resize(steps + 1, n);

    Eigen::VectorXd f = Eigen::VectorXd::Zero(n), q = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd fr(n), imp(n);
    Eigen::VectorXd k1f(n), k1q(n), k2f(n), k2q(n), k3f(n), k3q(n), k4f(n), k4q(n);
    Eigen::VectorXd tf(n), tq(n);

    auto deriv = [&](double t, const Eigen::VectorXd& fv, const Eigen::VectorXd& qv,
                     Eigen::VectorXd& fd, Eigen::VectorXd& qd) {
        if (activated)
            for (Eigen::Index i = 0; i < n; ++i)
                fr[i] = response_injection(t, sys.regions[i], sys.T_g);
        else
            fr.setZero();
        imp.noalias() = -(L * qv);
        fd = (fr - loss - dprime.cwiseProduct(fv) + imp).cwiseProduct(inv2H);
        qd = fv;
    };

    auto record = [&](Eigen::Index k, double t) {
        tr.t[k] = t;
        tr.df.row(k) = f.transpose();
        tr.int_df.row(k) = q.transpose();
        tr.dp_import.row(k).noalias() = -(L * q).transpose();
    };

    record(0, 0.0);
    for (Eigen::Index k = 1; k <= steps; ++k) {
        double t = (k - 1) * dt;
        deriv(t, f, q, k1f, k1q);
        tf = f + 0.5 * dt * k1f;
        tq = q + 0.5 * dt * k1q;
        deriv(t + 0.5 * dt, tf, tq, k2f, k2q);
        tf = f + 0.5 * dt * k2f;
        tq = q + 0.5 * dt * k2q;
        deriv(t + 0.5 * dt, tf, tq, k3f, k3q);
        tf = f + dt * k3f;
        tq = q + dt * k3q;
        deriv(t + dt, tf, tq, k4f, k4q);
        f += (dt / 6.0) * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        q += (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        if (!f.allFinite() || !q.allFinite())
            throw NumericError("simulation diverged at t = " + format_double(k * dt) + " s");
        record(k, k * dt);
    }
    return tr;
}

TraceMetrics trace_metrics(const FrequencyTrace& trace, double /*T_g*/) {
    const Eigen::Index m = trace.samples(), n = trace.df.cols();
    if (m < 3) throw NumericError("trace_metrics: at least 3 samples required");

    TraceMetrics out;
    out.rocof_max_abs.resize(n);
    out.nadir.resize(n);
    out.nadir_time.resize(n);
    const double dt = trace.dt;

    for (Eigen::Index j = 0; j < n; ++j) {
        double worst = std::abs(trace.df(1, j) - trace.df(0, j)) / dt;
        for (Eigen::Index k = 1; k + 1 < m; ++k)
            worst = std::max(worst, std::abs(trace.df(k + 1, j) - trace.df(k - 1, j)) / (2 * dt));
        worst = std::max(worst, std::abs(trace.df(m - 1, j) - trace.df(m - 2, j)) / dt);
        out.rocof_max_abs[j] = worst;

        Eigen::Index at = 0;
        double lo = trace.df(0, j);
        for (Eigen::Index k = 1; k < m; ++k) {
            if (trace.df(k, j) < lo) {
                lo = trace.df(k, j);
                at = k;
            }
        }
        out.nadir[j] = lo;
        out.nadir_time[j] = trace.t[at];
    }

    out.qss = trace.df.row(m - 1).dot(trace.inertia) / trace.inertia.sum();
    return out;
}

double import_conservation_error(const FrequencyTrace& trace) {
    double scale = trace.dp_import.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    double worst = trace.dp_import.rowwise().sum().cwiseAbs().maxCoeff();
    return worst / scale;
}

double coi_identity_residual(const FrequencyTrace& trace, const SystemModel& sys,
                             const FaultSpec& fault) {
    const Eigen::Index m = trace.samples(), n = trace.df.cols();
    if (m < 5) throw NumericError("identity check: at least 5 samples required");
    const double dt = trace.dt;
    const double H = trace.inertia.sum();

    // ramp corners of the response injections (derivative estimate is only
    // 4th-order where FR is smooth across the whole stencil)
    std::vector<double> corners;
    for (const auto& r : sys.regions) {
        if (r.R > 0) corners.push_back(sys.T_g);
        if (r.EFR > 0) {
            corners.push_back(r.EFR_delay);
            corners.push_back(r.EFR_delay + 1.0);
        }
    }

    Eigen::VectorXd fw = trace.weighted_mean();
    Eigen::VectorXd dprime(n);
    for (Eigen::Index i = 0; i < n; ++i) dprime[i] = sys.regions[i].d_prime();

    double worst = 0.0;
    for (Eigen::Index k = 2; k + 2 < m; ++k) {
        double t = trace.t[k];
        bool near_corner = false;
        for (double c : corners)
            if (std::abs(t - c) <= 3.0 * dt) near_corner = true;
        if (near_corner) continue;

        double dfw = (-fw[k + 2] + 8 * fw[k + 1] - 8 * fw[k - 1] + fw[k - 2]) / (12 * dt);
        double fr = 0.0;
        if (fault.P_L > 0) // services only activate on a real loss event
            for (Eigen::Index i = 0; i < n; ++i)
                fr += response_injection(t, sys.regions[static_cast<size_t>(i)], sys.T_g);
        double rhs = (fr - fault.P_L - dprime.dot(trace.df.row(k))) / (2.0 * H);
        worst = std::max(worst, std::abs(dfw - rhs));
    }
    return worst;
}

void write_trace_csv(const FrequencyTrace& trace, std::ostream& os) {
    os << "t";
    for (const auto& id : trace.region_ids) os << ",df_" << id;
    for (const auto& id : trace.region_ids) os << ",dp_import_" << id;
    os << "\n";
    for (Eigen::Index k = 0; k < trace.samples(); ++k) {
        os << format_double(trace.t[k]);
        for (Eigen::Index j = 0; j < trace.df.cols(); ++j) os << ',' << format_double(trace.df(k, j));
        for (Eigen::Index j = 0; j < trace.dp_import.cols(); ++j)
            os << ',' << format_double(trace.dp_import(k, j));
        os << "\n";
    }
}

} // namespace gridfreq
