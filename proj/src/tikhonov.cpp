#include "hes1/tikhonov.hpp"

#include "hes1/config.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace hes1 {

// ---------------------------------------------------------------------------
// Site-resolved model

namespace {

void require_small(int n) {
    if (n < 0 || n > max_permutation_sites)
        throw DomainError("site-resolved model supports 0 <= n <= " + std::to_string(max_permutation_sites));
}

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

void permutation_raw(const ModelParams& p, const Vector& s, Vector& out) {
    const int n = p.n();
    const std::size_t m = std::size_t{1} << n;
    out.setZero(static_cast<Eigen::Index>(m + 3));
    const double y1 = s[static_cast<Eigen::Index>(m)];
    const double y2 = s[static_cast<Eigen::Index>(m + 1)];
    const double z = s[static_cast<Eigen::Index>(m + 2)];
    std::vector<double> agg(static_cast<std::size_t>(n + 1), 0.0);

    for (std::size_t cfg = 0; cfg < m; ++cfg) {
        const double x = s[static_cast<Eigen::Index>(cfg)];
        const int j = std::popcount(cfg);
        agg[static_cast<std::size_t>(j)] += x;
        const double on = j < n ? p.k_binding(j) * y2 : 0.0;
        const double off = j > 0 ? p.gamma(j) : 0.0;
        out[static_cast<Eigen::Index>(cfg)] -= (on + j * off) * x;
        for (int site = 0; site < n; ++site) {
            const std::size_t bit = std::size_t{1} << site;
            if (cfg & bit)
                out[static_cast<Eigen::Index>(cfg & ~bit)] += off * x;
            else
                out[static_cast<Eigen::Index>(cfg | bit)] += on / (n - j) * x;
        }
    }
    for (std::size_t cfg = 0; cfg < m; ++cfg) out[static_cast<Eigen::Index>(cfg)] /= p.eps1();

    Vector full(n + 3), df;
    for (int j = 0; j < n; ++j) full[j] = agg[static_cast<std::size_t>(j)];
    full[n] = y1;
    full[n + 1] = y2;
    full[n + 2] = z;
    rhs_raw(Variant::full, p, full, df);
    out[static_cast<Eigen::Index>(m)] = df[n];
    out[static_cast<Eigen::Index>(m + 1)] = df[n + 1];
    out[static_cast<Eigen::Index>(m + 2)] = df[n + 2];
}

} // namespace

Vector PermutationState::packed() const {
    Vector v(static_cast<Eigen::Index>(x_config.size() + 3));
    for (std::size_t i = 0; i < x_config.size(); ++i) v[static_cast<Eigen::Index>(i)] = x_config[i];
    v.tail(3) << y1, y2, z;
    return v;
}

PermutationState PermutationState::unpack(int n, const Vector& v) {
    require_small(n);
    const std::size_t m = std::size_t{1} << n;
    if (static_cast<std::size_t>(v.size()) != m + 3) throw DomainError("packed state has the wrong size");
    PermutationState s;
    s.n = n;
    s.x_config.assign(v.data(), v.data() + m);
    s.y1 = v[static_cast<Eigen::Index>(m)];
    s.y2 = v[static_cast<Eigen::Index>(m + 1)];
    s.z = v[static_cast<Eigen::Index>(m + 2)];
    return s;
}

Vector rhs_permutation(const ModelParams& p, const PermutationState& s) {
    require_small(p.n());
    if (!p.has_binding_chain()) throw DomainError("site-resolved model needs a binding chain");
    if (s.n != p.n() || s.x_config.size() != (std::size_t{1} << s.n))
        throw DomainError("site-resolved state does not match n");
    double total = 0.0;
    for (double x : s.x_config) {
        if (!std::isfinite(x) || x < -simplex_tol) throw DomainError("pattern probabilities must be >= 0");
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("pattern probabilities must sum to 1");
    if (!(s.y1 >= 0.0 && s.y2 >= 0.0 && s.z >= 0.0)) throw DomainError("y1, y2 and z must be nonnegative");
    Vector out;
    permutation_raw(p, s.packed(), out);
    return out;
}

std::vector<double> aggregate_occupancy(std::span<const double> x_config, int n) {
    require_small(n);
    if (x_config.size() != (std::size_t{1} << n)) throw DomainError("pattern vector must have 2^n entries");
    std::vector<double> agg(static_cast<std::size_t>(n + 1), 0.0);
    for (std::size_t cfg = 0; cfg < x_config.size(); ++cfg) agg[static_cast<std::size_t>(std::popcount(cfg))] += x_config[cfg];
    return agg;
}

PermutationState lift_symmetric(const ModelParams& p, const StateVector& s) {
    const int n = p.n();
    require_small(n);
    if (s.variant != Variant::full) throw DomainError("lift_symmetric expects a full-model state");
    s.validate(n);
    std::vector<double> xj(static_cast<std::size_t>(n + 1));
    double rest = 1.0;
    for (int j = 0; j < n; ++j) {
        xj[static_cast<std::size_t>(j)] = s.values[j];
        rest -= s.values[j];
    }
    xj[static_cast<std::size_t>(n)] = rest;
    PermutationState out;
    out.n = n;
    out.x_config.resize(std::size_t{1} << n);
    for (std::size_t cfg = 0; cfg < out.x_config.size(); ++cfg) {
        const int j = std::popcount(cfg);
        out.x_config[cfg] = xj[static_cast<std::size_t>(j)] / binomial(n, j);
    }
    out.y1 = s.values[n];
    out.y2 = s.values[n + 1];
    out.z = s.values[n + 2];
    return out;
}

StateVector aggregate(const PermutationState& s) {
    const auto agg = aggregate_occupancy(s.x_config, s.n);
    Vector v(s.n + 3);
    for (int j = 0; j < s.n; ++j) v[j] = agg[static_cast<std::size_t>(j)];
    v[s.n] = s.y1;
    v[s.n + 1] = s.y2;
    v[s.n + 2] = s.z;
    return {Variant::full, v};
}

OdeSystem permutation_system(const ModelParams& p) {
    require_small(p.n());
    if (!p.has_binding_chain()) throw DomainError("site-resolved model needs a binding chain");
    OdeSystem sys;
    sys.dim = static_cast<int>((std::size_t{1} << p.n()) + 3);
    sys.rhs = [p](const Vector& y, Vector& out) { permutation_raw(p, y, out); };
    return sys;
}

// ---------------------------------------------------------------------------
// Sweeps

std::string_view to_string(Reduction r) {
    switch (r) {
    case Reduction::full_to_no_dimers: return "full->no-dimers";
    case Reduction::full_to_with_dimers: return "full->with-dimers";
    case Reduction::no_dimers_to_classical: return "no-dimers->classical";
    case Reduction::with_dimers_to_classical: return "with-dimers->classical";
    }
    return "?";
}

Reduction parse_reduction(std::string_view name) {
    for (auto r : all_reductions)
        if (to_string(r) == name) return r;
    throw DomainError("unknown reduction '" + std::string(name) +
                      "' (expected full->no-dimers, full->with-dimers, no-dimers->classical, "
                      "with-dimers->classical)");
}

Variant finer_variant(Reduction r) {
    switch (r) {
    case Reduction::full_to_no_dimers:
    case Reduction::full_to_with_dimers: return Variant::full;
    case Reduction::no_dimers_to_classical: return Variant::no_dimers;
    case Reduction::with_dimers_to_classical: return Variant::with_dimers;
    }
    return Variant::full;
}

Variant reduced_variant(Reduction r) {
    switch (r) {
    case Reduction::full_to_no_dimers: return Variant::no_dimers;
    case Reduction::full_to_with_dimers: return Variant::with_dimers;
    case Reduction::no_dimers_to_classical:
    case Reduction::with_dimers_to_classical: return Variant::classical;
    }
    return Variant::classical;
}

bool varies_eps2(Reduction r) {
    return r == Reduction::full_to_no_dimers || r == Reduction::with_dimers_to_classical;
}

std::vector<double> SweepResult::eps_values() const {
    std::vector<double> v;
    for (const auto& pt : points) v.push_back(pt.eps);
    return v;
}

std::vector<double> SweepResult::sup_norm_post_layer() const {
    std::vector<double> v;
    for (const auto& pt : points) v.push_back(pt.sup_norm_post_layer);
    return v;
}

bool SweepResult::complete() const {
    return std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.failure.empty(); });
}

StateVector sweep_initial_state(int n) {
    Vector v(n + 3);
    for (int j = 0; j < n; ++j) v[j] = 1.0 / (n + 1);
    v[n] = 1.0;
    v[n + 1] = 0.0;
    v[n + 2] = 0.5;
    return {Variant::full, v};
}

namespace {

struct Split {
    std::vector<double> slow_a, slow_b, fast_a, fast_b;
};

// Slow and fast coordinates of the finer state `a` and of the reduced state
// `b`, with the reduced fast part taken from the quasi-stationary map.
void split(Reduction r, const ModelParams& p, const Vector& a, const Vector& b, Split& out) {
    const int n = p.n();
    out.slow_a.clear();
    out.slow_b.clear();
    out.fast_a.clear();
    out.fast_b.clear();
    switch (r) {
    case Reduction::full_to_no_dimers: {
        for (int j = 0; j < n; ++j) {
            out.slow_a.push_back(a[j]);
            out.slow_b.push_back(b[j]);
        }
        out.slow_a.insert(out.slow_a.end(), {a[n], a[n + 2]});
        out.slow_b.insert(out.slow_b.end(), {b[n], b[n + 1]});
        std::vector<double> x(b.data(), b.data() + n);
        for (double& v : x) v = std::clamp(v, 0.0, 1.0);
        out.fast_a.push_back(a[n + 1]);
        out.fast_b.push_back(phi(p, x, std::max(b[n], 0.0)));
        break;
    }
    case Reduction::full_to_with_dimers: {
        out.slow_a = {a[n], a[n + 1], a[n + 2]};
        out.slow_b = {b[0], b[1], b[2]};
        const Vector occ = psi_occupancy(p, std::max(b[1], 0.0));
        for (int j = 0; j < n; ++j) {
            out.fast_a.push_back(a[j]);
            out.fast_b.push_back(occ[j]);
        }
        break;
    }
    case Reduction::no_dimers_to_classical: {
        out.slow_a = {a[n], a[n + 1]};
        out.slow_b = {b[0], b[1]};
        const Vector occ = psi_occupancy(p, b[0] * b[0]);
        for (int j = 0; j < n; ++j) {
            out.fast_a.push_back(a[j]);
            out.fast_b.push_back(occ[j]);
        }
        break;
    }
    case Reduction::with_dimers_to_classical:
        out.slow_a = {a[0], a[2]};
        out.slow_b = {b[0], b[1]};
        out.fast_a = {a[1]};
        out.fast_b = {b[0] * b[0]};
        break;
    }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

SweepResult eps_sweep(Reduction r, const ModelParams& base, const StateVector& full_initial,
                      const std::vector<double>& eps_list, const SweepOptions& opts) {
    if (eps_list.size() < 3) throw DomainError("eps_sweep needs at least 3 eps values");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw DomainError("eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw DomainError("eps values must be decreasing");
    }
    if (!base.has_binding_chain() && r != Reduction::with_dimers_to_classical)
        throw DomainError("this reduction needs a binding chain");
    full_initial.validate(base.n());

    IntegratorConfig cfg = opts.integrator;
    cfg.t_end = opts.t_end;
    cfg.validate();

    const Variant fine = finer_variant(r), coarse = reduced_variant(r);
    const StateVector s_fine = project(full_initial, fine, base.n());
    const StateVector s_coarse = project(full_initial, coarse, base.n());
    // The reduced model does not depend on the swept eps.
    const Trajectory reduced = integrate(base, s_coarse, cfg);

    SweepResult result{r, opts.t_end, {}};
    Split sp;
    for (double eps : eps_list) {
        SweepPoint pt{};
        pt.eps = eps;
        pt.t_layer = opts.layer_factor * eps;
        const ModelParams p = varies_eps2(r) ? base.with_eps(base.eps1(), eps) : base.with_eps(eps, base.eps2());
        try {
            const Trajectory finer = integrate(p, s_fine, cfg);
            pt.steps = finer.n_steps_accepted + finer.n_steps_rejected;
            for (std::size_t i = 0; i < finer.times.size(); ++i) {
                split(r, p, finer.states[i], reduced.states[i], sp);
                const double ds = max_abs_diff(sp.slow_a, sp.slow_b);
                pt.slow_sup = std::max(pt.slow_sup, ds);
                if (finer.times[i] >= pt.t_layer) {
                    pt.slow_sup_post = std::max(pt.slow_sup_post, ds);
                    pt.fast_sup_post = std::max(pt.fast_sup_post, max_abs_diff(sp.fast_a, sp.fast_b));
                }
            }
            pt.sup_norm_post_layer = std::max(pt.slow_sup_post, pt.fast_sup_post);
        } catch (const IntegrationError& e) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            pt.slow_sup = pt.slow_sup_post = pt.fast_sup_post = pt.sup_norm_post_layer = nan;
            pt.failure = e.what();
        }
        result.points.push_back(pt);
    }
    return result;
}

nlohmann::json sweep_to_json(const SweepResult& r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(round15(v)) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["reduction"] = std::string(to_string(r.reduction));
    j["varied"] = varies_eps2(r.reduction) ? "eps2" : "eps1";
    j["t_end"] = round15(r.t_end);
    auto pts = nlohmann::json::array();
    for (const auto& p : r.points) {
        nlohmann::json e{{"eps", num(p.eps)},
                         {"t_layer", num(p.t_layer)},
                         {"slow_sup", num(p.slow_sup)},
                         {"slow_sup_post_layer", num(p.slow_sup_post)},
                         {"fast_sup_post_layer", num(p.fast_sup_post)},
                         {"sup_norm_post_layer", num(p.sup_norm_post_layer)},
                         {"steps", p.steps}};
        if (!p.failure.empty()) e["failure"] = p.failure;
        pts.push_back(e);
    }
    j["points"] = pts;
    return j;
}

// ---------------------------------------------------------------------------
// Figures

std::string_view to_string(Figure f) {
    switch (f) {
    case Figure::fig4: return "fig4";
    case Figure::fig5: return "fig5";
    case Figure::fig6a: return "fig6a";
    case Figure::fig6b: return "fig6b";
    }
    return "?";
}

Figure parse_figure(std::string_view name) {
    for (auto f : all_figures)
        if (to_string(f) == name) return f;
    throw DomainError("unknown figure '" + std::string(name) + "' (expected fig4, fig5, fig6a, fig6b)");
}

std::string_view to_string(Expectation e) {
    switch (e) {
    case Expectation::sustained: return "sustained";
    case Expectation::damped: return "damped";
    case Expectation::not_sustained: return "not-sustained";
    case Expectation::unspecified: return "unspecified";
    }
    return "?";
}

bool satisfies(Expectation e, OscillationKind k) {
    switch (e) {
    case Expectation::sustained: return k == OscillationKind::sustained;
    case Expectation::damped: return k == OscillationKind::damped;
    case Expectation::not_sustained: return k != OscillationKind::sustained;
    case Expectation::unspecified: return true;
    }
    return false;
}

FigureSetup figure_setup(Figure f) {
    using E = Expectation;
    IntegratorConfig cfg{1e-8, 1e-10, 2000.0, 1'000'000, Method::implicit_stiff, 0.1};
    // Order: full, no-dimers, with-dimers, classical.
    switch (f) {
    case Figure::fig4:
        cfg.t_end = 500.0;
        return {f, "par-n3", preset("par-n3"), cfg, {E::not_sustained, E::not_sustained, E::not_sustained, E::not_sustained}};
    case Figure::fig5:
        return {f, "par-n5", preset("par-n5"), cfg, {E::not_sustained, E::not_sustained, E::sustained, E::not_sustained}};
    case Figure::fig6a:
        return {f, "par-n9", preset("par-n9"), cfg, {E::damped, E::unspecified, E::sustained, E::unspecified}};
    case Figure::fig6b:
        return {f, "par-n9-eps005", preset("par-n9-eps005"), cfg,
                {E::sustained, E::unspecified, E::sustained, E::unspecified}};
    }
    throw DomainError("unknown figure");
}

bool FigureResult::all_match() const {
    return std::all_of(runs.begin(), runs.end(), [](const VariantRun& r) { return r.match; });
}

FigureResult run_figure(Figure f) { return run_figure(figure_setup(f)); }

FigureResult run_figure(const FigureSetup& setup) {
    FigureResult out{setup, {}};
    const int n = setup.params.n();
    for (std::size_t i = 0; i < 4; ++i) {
        const Variant v = all_variants[i];
        Trajectory traj = integrate(setup.params, default_initial_state(v, n), setup.integrator);
        const auto report = detect_oscillation(traj, default_transient_fraction,
                                               static_cast<std::size_t>(index_y1(v, n)));
        const Expectation e = setup.expected[i];
        out.runs.push_back({v, std::move(traj), report, e, satisfies(e, report.kind)});
    }
    return out;
}

nlohmann::json verdict_json(const FigureResult& r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(round15(v)) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["figure"] = std::string(to_string(r.setup.figure));
    j["preset"] = r.setup.preset;
    j["parameters"] = params_to_json(r.setup.params);
    j["r0"] = round15(r.setup.params.r0());
    j["integrator"] = config_to_json(r.setup.integrator);
    j["component"] = "y1";
    j["transient_fraction"] = default_transient_fraction;
    j["amp_threshold"] = default_amp_threshold;
    auto runs = nlohmann::json::array();
    for (const auto& run : r.runs) {
        runs.push_back({{"variant", std::string(to_string(run.variant))},
                        {"classification", std::string(to_string(run.report.kind))},
                        {"amplitude", num(run.report.amplitude)},
                        {"period", num(run.report.period)},
                        {"n_peaks", run.report.n_peaks},
                        {"expected", std::string(to_string(run.expected))},
                        {"match", run.match}});
    }
    j["variants"] = runs;
    j["all_match"] = r.all_match();
    return j;
}

void write_figure_outputs(const FigureResult& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string fig(to_string(r.setup.figure));
    for (const auto& run : r.runs) {
        const auto path = std::filesystem::path(dir) / (fig + "_" + std::string(to_string(run.variant)) + ".csv");
        write_csv(path.string(), run.trajectory, state_names(run.variant, r.setup.params.n()));
    }
    const auto path = std::filesystem::path(dir) / (fig + "_verdict.json");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    os << verdict_json(r).dump(2) << '\n';
}

} // namespace hes1
