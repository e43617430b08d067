#include "hes1/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hes1 {

std::string_view to_string(Method m) {
    return m == Method::explicit_embedded ? "explicit" : "implicit";
}

Method parse_method(std::string_view name) {
    if (name == "explicit" || name == "explicit-embedded") return Method::explicit_embedded;
    if (name == "implicit" || name == "implicit-stiff") return Method::implicit_stiff;
    throw DomainError("unknown integration method '" + std::string(name) + "' (expected explicit or implicit)");
}

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw DomainError("rel_tol must lie in (0, 1e-2]");
    if (!(abs_tol > 0.0 && abs_tol <= 1e-2)) throw DomainError("abs_tol must lie in (0, 1e-2]");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive");
    if (max_steps <= 0) throw DomainError("max_steps must be positive");
    if (!(sample_dt > 0.0) || sample_dt > t_end) throw DomainError("sample_dt must lie in (0, t_end]");
}

StateVector Trajectory::final_state() const {
    if (!variant) throw std::logic_error("trajectory has no model variant");
    return {*variant, states.back()};
}

StateVector Trajectory::state(std::size_t i) const {
    if (!variant) throw std::logic_error("trajectory has no model variant");
    return {*variant, states.at(i)};
}

std::vector<double> Trajectory::component(std::size_t index) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s[static_cast<Eigen::Index>(index)]);
    return out;
}

std::vector<double> output_grid(double t_end, double sample_dt) {
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor(t_end / sample_dt + 1e-9));
    grid.reserve(static_cast<std::size_t>(n + 2));
    for (long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * sample_dt);
    if (t_end - grid.back() > 1e-9 * sample_dt)
        grid.push_back(t_end);
    else
        grid.back() = t_end;
    return grid;
}

Matrix finite_difference_jacobian(const std::function<void(const Vector&, Vector&)>& f, const Vector& y) {
    const auto n = y.size();
    Matrix j(n, n);
    Vector yp = y, ym = y, fp, fm;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = std::max(1e-7, 1e-7 * std::abs(y[i]));
        yp[i] = y[i] + h;
        ym[i] = y[i] - h;
        f(yp, fp);
        f(ym, fm);
        j.col(i) = (fp - fm) / ((y[i] + h) - (y[i] - h));
        yp[i] = ym[i] = y[i];
    }
    return j;
}

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const IntegratorConfig& cfg) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sk;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
}

double initial_step(const OdeSystem& sys, const Vector& y0, const Vector& f0, const IntegratorConfig& cfg,
                    int order) {
    Vector sk = (cfg.abs_tol + cfg.rel_tol * y0.array().abs()).matrix();
    const double d0 = std::sqrt((y0.array() / sk.array()).square().mean());
    const double d1 = std::sqrt((f0.array() / sk.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, cfg.sample_dt);
    Vector y1 = y0 + h0 * f0, f1;
    sys.rhs(y1, f1);
    double d2 = all_finite(f1) ? std::sqrt(((f1 - f0).array() / sk.array()).square().mean()) / h0 : 1e300;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / (order + 1));
    return std::min({100.0 * h0, h1, cfg.sample_dt});
}

/// Common stepping loop; `attempt` performs one trial step and returns the
/// scaled error (or +inf on a non-finite result) and the step size proposal.
class Driver {
public:
    Driver(const OdeSystem& sys, const IntegratorConfig& cfg) : sys_(sys), cfg_(cfg) {}

    template <class Stepper>
    Trajectory run(const Vector& y0, Stepper& stepper) {
        cfg_.validate();
        if (y0.size() != sys_.dim) throw DomainError("initial state has the wrong dimension");
        if (!all_finite(y0)) throw IntegrationError("non-finite initial state", 0.0);

        Trajectory traj;
        traj.times = output_grid(cfg_.t_end, cfg_.sample_dt);
        traj.states.reserve(traj.times.size());
        traj.states.push_back(y0);

        Vector y = y0;
        double t = 0.0;
        Vector f0;
        sys_.rhs(y, f0);
        if (!all_finite(f0)) throw IntegrationError("non-finite derivative at the initial state", 0.0);
        double h = initial_step(sys_, y, f0, cfg_, stepper.order());
        stepper.reset(y, f0);

        Vector y_new;
        for (std::size_t k = 1; k < traj.times.size(); ++k) {
            const double target = traj.times[k];
            while (t < target) {
                if (traj.n_steps_accepted + traj.n_steps_rejected >= cfg_.max_steps) {
                    std::ostringstream msg;
                    msg << "max_steps (" << cfg_.max_steps << ") exceeded at t = " << t << " (h = " << h << ")";
                    throw IntegrationError(msg.str(), t);
                }
                const bool clamp = t + h >= target || target - (t + h) < 1e-10 * h;
                const double h_try = clamp ? target - t : h;
                if (h_try <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
                    std::ostringstream msg;
                    msg << "step size underflow (non-finite or unresolvable solution) at t = " << t;
                    throw IntegrationError(msg.str(), t);
                }
                const auto trial = stepper.attempt(y, h_try, y_new, cfg_);
                if (trial.accepted) {
                    ++traj.n_steps_accepted;
                    t = clamp ? target : t + h_try;
                    y = y_new;
                    stepper.commit(y);
                    h = clamp ? std::max(trial.h_next, h) : trial.h_next;
                } else {
                    ++traj.n_steps_rejected;
                    h = trial.h_next;
                }
            }
            traj.states.push_back(y);
        }
        return traj;
    }

private:
    const OdeSystem& sys_;
    IntegratorConfig cfg_;
};

struct Trial {
    bool accepted;
    double h_next;
};

/// Dormand-Prince 5(4), FSAL, with Hairer's PI step-size controller.
class DormandPrince {
public:
    explicit DormandPrince(const OdeSystem& sys) : sys_(sys) {}
    int order() const { return 4; }

    void reset(const Vector&, const Vector& f0) {
        k1_ = f0;
        fac_old_ = 1e-4;
        last_rejected_ = false;
    }

    void commit(const Vector&) { k1_ = k7_; }

    Trial attempt(const Vector& y, double h, Vector& y_new, const IntegratorConfig& cfg) {
        constexpr double a21 = 1.0 / 5.0;
        constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                         a54 = -212.0 / 729.0;
        constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                         a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                         a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
        constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                         e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        sys_.rhs(y + h * a21 * k1_, k2_);
        sys_.rhs(y + h * (a31 * k1_ + a32 * k2_), k3_);
        sys_.rhs(y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_), k4_);
        sys_.rhs(y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_), k5_);
        sys_.rhs(y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_), k6_);
        y_new = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        sys_.rhs(y_new, k7_);
        const Vector err = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

        double e = error_norm(err, y, y_new, cfg);
        if (!std::isfinite(e) || !all_finite(y_new) || !all_finite(k7_)) {
            last_rejected_ = true;
            return {false, 0.25 * h};
        }

        constexpr double beta = 0.04, safe = 0.9;
        constexpr double expo1 = 0.2 - beta * 0.75;
        const double fac11 = std::pow(std::max(e, 1e-300), expo1);
        if (e <= 1.0) {
            double fac = fac11 / std::pow(fac_old_, beta) / safe;
            fac = std::clamp(fac, 0.1, 5.0);
            fac_old_ = std::max(e, 1e-4);
            double h_next = h / fac;
            if (last_rejected_) h_next = std::min(h_next, h);
            last_rejected_ = false;
            return {true, h_next};
        }
        last_rejected_ = true;
        return {false, h / std::min(5.0, fac11 / safe)};
    }

private:
    const OdeSystem& sys_;
    Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    double fac_old_ = 1e-4;
    bool last_rejected_ = false;
};

/// Rodas4: stiffly accurate, L-stable Rosenbrock method of order 4 with an
/// embedded order-3 solution.
class Rodas4 {
public:
    explicit Rodas4(const OdeSystem& sys) : sys_(sys) {}
    int order() const { return 3; }

    void reset(const Vector& y, const Vector& f0) {
        f0_ = f0;
        jac_valid_ = false;
        last_rejected_ = false;
        (void)y;
    }

    void commit(const Vector& y) {
        sys_.rhs(y, f0_);
        jac_valid_ = false;
    }

    Trial attempt(const Vector& y, double h, Vector& y_new, const IntegratorConfig& cfg) {
        constexpr double gamma = 0.25;
        constexpr double c21 = -0.5668800000000000e+01, a21 = 0.1544000000000000e+01;
        constexpr double c31 = -0.2430093356833875e+01, c32 = -0.2063599157091915e+00;
        constexpr double a31 = 0.9466785280815826e+00, a32 = 0.2557011698983284e+00;
        constexpr double c41 = -0.1073529058151375e+00, c42 = -0.9594562251023355e+01,
                         c43 = -0.2047028614809616e+02;
        constexpr double a41 = 0.3314825187068521e+01, a42 = 0.2896124015972201e+01,
                         a43 = 0.9986419139977817e+00;
        constexpr double c51 = 0.7496443313967647e+01, c52 = -0.1024680431464352e+02,
                         c53 = -0.3399990352819905e+02, c54 = 0.1170890893206160e+02;
        constexpr double a51 = 0.1221224509226641e+01, a52 = 0.6019134481288629e+01,
                         a53 = 0.1253708332932087e+02, a54 = -0.6878860361058950e+00;
        constexpr double c61 = 0.8083246795921522e+01, c62 = -0.7981132988064893e+01,
                         c63 = -0.3152159432874371e+02, c64 = 0.1631930543123136e+02,
                         c65 = -0.6058818238834054e+01;

        if (!jac_valid_) {
            if (sys_.jacobian)
                sys_.jacobian(y, jac_);
            else
                jac_ = finite_difference_jacobian(sys_.rhs, y);
            jac_valid_ = true;
        }
        const auto n = y.size();
        Matrix m = Matrix::Identity(n, n) / (gamma * h) - jac_;
        Eigen::PartialPivLU<Matrix> lu(m);

        const double inv_h = 1.0 / h;
        Vector f;
        const Vector g1 = lu.solve(f0_);
        sys_.rhs(y + a21 * g1, f);
        const Vector g2 = lu.solve(f + c21 * inv_h * g1);
        sys_.rhs(y + a31 * g1 + a32 * g2, f);
        const Vector g3 = lu.solve(f + inv_h * (c31 * g1 + c32 * g2));
        sys_.rhs(y + a41 * g1 + a42 * g2 + a43 * g3, f);
        const Vector g4 = lu.solve(f + inv_h * (c41 * g1 + c42 * g2 + c43 * g3));
        sys_.rhs(y + a51 * g1 + a52 * g2 + a53 * g3 + a54 * g4, f);
        const Vector g5 = lu.solve(f + inv_h * (c51 * g1 + c52 * g2 + c53 * g3 + c54 * g4));
        const Vector y5 = y + a51 * g1 + a52 * g2 + a53 * g3 + a54 * g4 + g5;
        sys_.rhs(y5, f);
        const Vector err = lu.solve(f + inv_h * (c61 * g1 + c62 * g2 + c63 * g3 + c64 * g4 + c65 * g5));
        y_new = y5 + err;

        const double e = error_norm(err, y, y_new, cfg);
        if (!std::isfinite(e) || !all_finite(y_new)) {
            last_rejected_ = true;
            return {false, 0.25 * h};
        }
        double fac = std::clamp(0.9 * std::pow(std::max(e, 1e-300), -0.25), 0.2, 6.0);
        if (e <= 1.0) {
            if (last_rejected_) fac = std::min(fac, 1.0);
            last_rejected_ = false;
            return {true, h * fac};
        }
        last_rejected_ = true;
        return {false, h * std::min(fac, 0.9)};
    }

private:
    const OdeSystem& sys_;
    Vector f0_;
    Matrix jac_;
    bool jac_valid_ = false;
    bool last_rejected_ = false;
};

} // namespace

Trajectory integrate(const OdeSystem& sys, const Vector& y0, const IntegratorConfig& cfg) {
    Driver driver(sys, cfg);
    if (cfg.method == Method::explicit_embedded) {
        DormandPrince stepper(sys);
        return driver.run(y0, stepper);
    }
    Rodas4 stepper(sys);
    return driver.run(y0, stepper);
}

OdeSystem model_system(const ModelParams& p, Variant v, bool analytic_jacobian) {
    OdeSystem sys;
    sys.dim = state_dim(v, p.n());
    sys.rhs = [p, v](const Vector& y, Vector& out) { rhs_raw(v, p, y, out); };
    if (analytic_jacobian) {
        const Vector probe = Vector::Zero(sys.dim);
        if (jacobian_analytic(v, p, probe)) {
            sys.jacobian = [p, v](const Vector& y, Matrix& j) { j = *jacobian_analytic(v, p, y); };
        }
    }
    return sys;
}

Trajectory integrate(const ModelParams& p, const StateVector& s0, const IntegratorConfig& cfg,
                     bool analytic_jacobian) {
    s0.validate(p.n());
    if (!p.has_binding_chain() && (s0.variant == Variant::full || s0.variant == Variant::no_dimers))
        throw DomainError("the Hill form supports only the with-dimers and classical models");
    const OdeSystem sys = model_system(p, s0.variant, analytic_jacobian);
    Trajectory traj = integrate(sys, s0.values, cfg);
    traj.variant = s0.variant;
    return traj;
}

void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& names) {
    os << 't';
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    char buf[32];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.15g", traj.times[i]);
        os << buf;
        for (Eigen::Index j = 0; j < traj.states[i].size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.15g", traj.states[i][j]);
            os << ',' << buf;
        }
        os << '\n';
    }
}

void write_csv(const std::string& path, const Trajectory& traj, const std::vector<std::string>& names) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(os, traj, names);
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

std::string_view to_string(OscillationKind k) {
    switch (k) {
    case OscillationKind::sustained: return "sustained";
    case OscillationKind::damped: return "damped";
    case OscillationKind::monotone: return "monotone";
    }
    return "?";
}

OscillationReport detect_oscillation(std::span<const double> times, std::span<const double> values,
                                     double transient_fraction, double amp_threshold) {
    if (times.size() != values.size()) throw DomainError("times and values differ in length");
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
        throw DomainError("transient_fraction must lie in [0, 1)");
    if (times.empty()) throw DomainError("empty time series");

    const double t_start = times.front() + transient_fraction * (times.back() - times.front());
    std::size_t first = 0;
    while (first < times.size() && times[first] < t_start) ++first;
    const std::size_t count = times.size() - first;
    if (count < 3) throw DomainError("oscillation window has fewer than 3 samples");
    const auto t = times.subspan(first);
    const auto v = values.subspan(first);

    // Alternating extrema: +1 maximum, -1 minimum. Plateaus count once.
    struct Extremum {
        double t;
        double v;
        int type;
    };
    std::vector<Extremum> ext;
    for (std::size_t i = 1; i + 1 < count; ++i) {
        int type = 0;
        if (v[i] > v[i - 1] && v[i] >= v[i + 1]) type = 1;
        if (v[i] < v[i - 1] && v[i] <= v[i + 1]) type = -1;
        if (type == 0) continue;
        if (!ext.empty() && ext.back().type == type) {
            if ((type == 1 && v[i] > ext.back().v) || (type == -1 && v[i] < ext.back().v)) ext.back() = {t[i], v[i], type};
            continue;
        }
        ext.push_back({t[i], v[i], type});
    }

    OscillationReport rep;
    std::vector<double> peak_times;
    for (const auto& e : ext)
        if (e.type == 1) peak_times.push_back(e.t);
    rep.n_peaks = peak_times.size();
    rep.period = peak_times.size() >= 2
                     ? (peak_times.back() - peak_times.front()) / static_cast<double>(peak_times.size() - 1)
                     : std::numeric_limits<double>::quiet_NaN();

    std::vector<double> amps;
    for (std::size_t i = 1; i < ext.size(); ++i) amps.push_back(std::abs(ext[i].v - ext[i - 1].v));

    if (amps.size() >= 3) {
        const double a1 = amps[amps.size() - 3], a2 = amps[amps.size() - 2], a3 = amps.back();
        rep.amplitude = (a1 + a2 + a3) / 3.0;
        auto close = [](double a, double b) { return std::abs(a - b) < 0.1 * std::max(a, b); };
        if (a1 > amp_threshold && a2 > amp_threshold && a3 > amp_threshold && close(a1, a2) && close(a1, a3) &&
            close(a2, a3)) {
            rep.kind = OscillationKind::sustained;
            return rep;
        }
    } else if (!amps.empty()) {
        double s = 0.0;
        for (double a : amps) s += a;
        rep.amplitude = s / static_cast<double>(amps.size());
    }

    // Damped: starts above threshold and every swing above threshold shrinks
    // by more than 10 % relative to the previous one.
    if (amps.size() >= 2 && amps.front() > amp_threshold) {
        bool decaying = amps.back() < 0.9 * amps.front();
        for (std::size_t i = 1; i < amps.size() && decaying; ++i) {
            if (amps[i - 1] <= amp_threshold) break;
            if (!(amps[i] < 0.9 * amps[i - 1])) decaying = false;
        }
        if (decaying) {
            rep.kind = OscillationKind::damped;
            return rep;
        }
    }
    rep.kind = OscillationKind::monotone;
    return rep;
}

OscillationReport detect_oscillation(const Trajectory& traj, double transient_fraction, std::size_t component,
                                     double amp_threshold) {
    if (traj.states.empty()) throw DomainError("empty trajectory");
    if (static_cast<Eigen::Index>(component) >= traj.states.front().size())
        throw DomainError("component index out of range");
    const auto series = traj.component(component);
    return detect_oscillation(traj.times, series, transient_fraction, amp_threshold);
}

} // namespace hes1
