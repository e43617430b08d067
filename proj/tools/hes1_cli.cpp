#include "hes1/config.hpp"
#include "hes1/integrator.hpp"
#include "hes1/stability.hpp"
#include "hes1/tikhonov.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace hes1;

namespace {

/// Thrown for flag combinations CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string fmt(Complex z) {
    if (z.imag() == 0.0) return fmt(z.real());
    return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
}

struct ParamSource {
    std::string preset;
    std::string path;

    void add(CLI::App* cmd, const std::string& default_preset = "") {
        preset = default_preset;
        auto* a = cmd->add_option("--preset", preset, "Named parameter set (" + names() + ")");
        auto* b = cmd->add_option("--params", path, "Parameter file (JSON)")->check(CLI::ExistingFile);
        a->excludes(b);
        b->excludes(a);
    }

    ModelParams resolve() const {
        if (!path.empty()) return load_params(path);
        if (preset.empty()) throw UsageError("one of --preset or --params is required");
        return preset_or_throw();
    }

private:
    ModelParams preset_or_throw() const { return hes1::preset(preset); }

    static std::string names() {
        std::string s;
        for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }
};

/// Output directory: --out, else $HES1_OUTPUT_DIR, else empty (stdout).
std::string output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("HES1_OUTPUT_DIR"); env && *env) return env;
    return {};
}

std::string prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir + "'");
    return dir;
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
    const auto path = fs::path(prepare_dir(dir)) / name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
    std::cerr << "wrote " << path.string() << '\n';
}

struct Grid {
    std::string key;
    double lo = 0, hi = 0;
    int count = 0;
};

Grid parse_grid(const std::string& text) {
    // key=lo:hi:count
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("--grid expects key=lo:hi:count, got '" + text + "'");
    Grid g;
    g.key = text.substr(0, eq);
    std::istringstream is(text.substr(eq + 1));
    char c1 = 0, c2 = 0;
    if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.count) || c1 != ':' || c2 != ':' || !is.eof() || g.count < 1)
        throw UsageError("--grid expects key=lo:hi:count, got '" + text + "'");
    return g;
}

std::vector<std::pair<std::string, double>> parse_fixed(const std::vector<std::string>& items) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--fix expects key=value, got '" + item + "'");
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item.substr(eq + 1), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() - eq - 1) throw UsageError("--fix: bad number in '" + item + "'");
        out.emplace_back(item.substr(0, eq), v);
    }
    return out;
}

std::string stability_text(const StabilityReport& r, const ModelParams& p) {
    std::ostringstream os;
    const auto names = state_names(r.variant, p.n());
    os << "variant = " << to_string(r.variant) << '\n';
    os << "r0 = " << fmt(p.r0()) << '\n';
    for (std::size_t i = 0; i < names.size(); ++i)
        os << "steady_state." << names[i] << " = " << fmt(r.steady_state.values[static_cast<Eigen::Index>(i)]) << '\n';
    for (std::size_t i = 0; i < r.jacobian_eigenvalues.size(); ++i)
        os << "eigenvalue." << i << " = " << fmt(r.jacobian_eigenvalues[i]) << '\n';
    os << "max_real_eigenvalue = " << fmt(max_real_part(r.jacobian_eigenvalues)) << '\n';
    os << "eigen_verdict = " << to_string(r.eigen_verdict) << '\n';
    os << "hurwitz_verdict = " << to_string(r.hurwitz_verdict) << '\n';
    if (r.char_poly) {
        os << "char_poly =";
        for (double c : r.char_poly->coeffs) os << ' ' << fmt(c);
        os << '\n';
    }
    if (r.threshold) {
        os << "threshold = " << to_string(r.threshold->verdict) << '\n';
        os << "threshold.neg_psi_prime = " << fmt(r.threshold->lhs) << '\n';
        os << "threshold.value = " << fmt(r.threshold->rhs) << '\n';
        os << "threshold.margin = " << fmt(r.threshold->margin) << '\n';
        os << "psi_prime_bound = " << fmt(psi_prime_bound(p)) << '\n';
    }
    os << "notes = " << r.notes << '\n';
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hes1 promoter-binding model: simulation, stability and reduction checks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hes1 0.1.0");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Integrate one model variant and write a CSV trajectory");
    ParamSource sim_params;
    sim_params.add(sim);
    std::string sim_variant = "full", sim_out, sim_method = "implicit";
    IntegratorConfig sim_cfg;
    bool sim_analytic = false;
    sim->add_option("--variant", sim_variant, "full, no-dimers, with-dimers or classical")->capture_default_str();
    sim->add_option("--t-end", sim_cfg.t_end, "End time")->capture_default_str();
    sim->add_option("--dt", sim_cfg.sample_dt, "Output sampling interval")->capture_default_str();
    sim->add_option("--rtol", sim_cfg.rel_tol, "Relative tolerance")->capture_default_str();
    sim->add_option("--atol", sim_cfg.abs_tol, "Absolute tolerance")->capture_default_str();
    sim->add_option("--max-steps", sim_cfg.max_steps, "Step budget")->capture_default_str();
    sim->add_option("--method", sim_method, "implicit (Rodas4) or explicit (Dormand-Prince)")->capture_default_str();
    sim->add_flag("--analytic-jacobian", sim_analytic, "Use the closed-form Jacobian when available");
    sim->add_option("--out", sim_out, "Output directory (default $HES1_OUTPUT_DIR, else stdout)");

    // steady-state
    auto* ss = app.add_subcommand("steady-state", "Print the positive steady state of each variant");
    ParamSource ss_params;
    ss_params.add(ss);
    std::string ss_variant;
    ss->add_option("--variant", ss_variant, "Restrict to one variant");

    // stability
    auto* st = app.add_subcommand("stability", "Linear stability of the steady state");
    ParamSource st_params;
    st_params.add(st);
    std::string st_variant = "with-dimers", st_out;
    st->add_option("--variant", st_variant, "Model variant")->capture_default_str();
    st->add_option("--out", st_out, "Output directory (default $HES1_OUTPUT_DIR, else stdout)");

    // scan
    auto* sc = app.add_subcommand("scan", "Scan the with-dimers stability threshold over a parameter grid");
    ParamSource sc_params;
    sc_params.add(sc);
    int sc_n = 0;
    std::string sc_grid, sc_out;
    std::vector<std::string> sc_fix;
    sc->add_option("--n", sc_n, "Number of binding sites (Hill form when r0 is set)");
    sc->add_option("--grid", sc_grid, "key=lo:hi:count with key in r0, k, delta1, delta2, eps1, eps2, theta")
        ->required();
    sc->add_option("--fix", sc_fix, "Fixed values key=value")->delimiter(',');
    sc->add_option("--out", sc_out, "Output directory (default $HES1_OUTPUT_DIR, else stdout)");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Distance between a model and its reduction as eps shrinks");
    ParamSource sw_params;
    sw_params.add(sw, "par-n3");
    std::string sw_reduction = "all", sw_out;
    std::vector<double> sw_eps{1e-1, 1e-2, 1e-3, 1e-4};
    SweepOptions sw_opts;
    sw->add_option("--reduction", sw_reduction,
                   "full->no-dimers, full->with-dimers, no-dimers->classical, with-dimers->classical or all")
        ->capture_default_str();
    sw->add_option("--eps", sw_eps, "Decreasing eps values")->delimiter(',');
    sw->add_option("--t-end", sw_opts.t_end, "End time")->capture_default_str();
    sw->add_option("--layer-factor", sw_opts.layer_factor, "Initial layer width in units of eps")
        ->capture_default_str();
    sw->add_option("--out", sw_out, "Output directory (default $HES1_OUTPUT_DIR, else stdout)");

    // reproduce
    auto* rp = app.add_subcommand("reproduce", "Run a figure experiment and write CSVs plus a verdict file");
    std::string rp_figure = "all", rp_out;
    rp->add_option("--figure", rp_figure, "fig4, fig5, fig6a, fig6b or all")->capture_default_str();
    rp->add_option("--out", rp_out, "Output directory (default $HES1_OUTPUT_DIR, else ./out)");

    // presets
    auto* pr = app.add_subcommand("presets", "List the named parameter sets or write them as files");
    std::string pr_out;
    pr->add_option("--out", pr_out, "Write <name>.json files into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            const ModelParams p = sim_params.resolve();
            sim_cfg.method = parse_method(sim_method);
            const Variant v = parse_variant(sim_variant);
            const Trajectory traj = integrate(p, default_initial_state(v, p.n()), sim_cfg, sim_analytic);
            std::ostringstream os;
            write_csv(os, traj, state_names(v, p.n()));
            const std::string dir = output_dir(sim_out);
            if (dir.empty())
                std::cout << os.str();
            else
                write_text(dir, "simulate_" + std::string(to_string(v)) + ".csv", os.str());
        } else if (ss->parsed()) {
            const ModelParams p = ss_params.resolve();
            std::vector<Variant> variants;
            if (!ss_variant.empty())
                variants.push_back(parse_variant(ss_variant));
            else
                for (auto v : all_variants)
                    if (p.has_binding_chain() || v == Variant::with_dimers || v == Variant::classical)
                        variants.push_back(v);
            std::cout << "r0 = " << fmt(p.r0()) << '\n';
            const auto y1 = steady_state_solve_y1(p);
            std::cout << "y1_root = " << fmt(y1.y1) << (y1.inconsistent ? " (inconsistent)" : "") << '\n';
            for (auto v : variants) {
                const auto s = steady_state(p, v);
                const auto names = state_names(v, p.n());
                for (std::size_t i = 0; i < names.size(); ++i)
                    std::cout << to_string(v) << '.' << names[i] << " = "
                              << fmt(s.values[static_cast<Eigen::Index>(i)]) << '\n';
            }
        } else if (st->parsed()) {
            const ModelParams p = st_params.resolve();
            const auto report = analyze(parse_variant(st_variant), p);
            const std::string text = stability_text(report, p);
            const std::string dir = output_dir(st_out);
            if (dir.empty())
                std::cout << text;
            else
                write_text(dir, "stability_" + st_variant + ".txt", text);
        } else if (sc->parsed()) {
            const Grid g = parse_grid(sc_grid);
            ScanSpec spec;
            spec.key = g.key;
            spec.lo = g.lo;
            spec.hi = g.hi;
            spec.count = g.count;
            spec.fixed = parse_fixed(sc_fix);
            bool hill = g.key == "r0";
            for (const auto& [k, _] : spec.fixed) hill = hill || k == "r0";
            if (!sc_params.preset.empty() || !sc_params.path.empty()) {
                spec.base = sc_params.resolve().values();
                if (sc_n != 0 && sc_n != spec.base.n) throw UsageError("--n disagrees with the parameter set");
            } else if (hill) {
                if (sc_n < 1) throw UsageError("--n is required for a Hill-form scan");
                spec.base.n = sc_n;
                spec.base.k_binding.clear();
                spec.base.gamma.clear();
            } else {
                throw UsageError("scan needs --preset/--params unless r0 is on the grid or fixed");
            }
            if (hill) spec.base.hill_r0 = spec.base.hill_r0.value_or(2.0);
            const auto rows = scan(spec);
            std::ostringstream os;
            os << g.key << ",neg_psi_prime,threshold,verdict,max_real_eigenvalue\n";
            for (const auto& r : rows)
                os << fmt(r.value) << ',' << fmt(r.neg_psi_prime) << ',' << fmt(r.threshold) << ','
                   << to_string(r.verdict) << ',' << fmt(r.max_real_eigenvalue) << '\n';
            const std::string dir = output_dir(sc_out);
            if (dir.empty())
                std::cout << os.str();
            else
                write_text(dir, "scan_" + g.key + ".csv", os.str());
        } else if (sw->parsed()) {
            const ModelParams p = sw_params.resolve();
            std::vector<Reduction> reductions;
            if (sw_reduction == "all")
                reductions.assign(std::begin(all_reductions), std::end(all_reductions));
            else
                reductions.push_back(parse_reduction(sw_reduction));
            auto out = nlohmann::json::array();
            for (auto r : reductions) out.push_back(sweep_to_json(eps_sweep(r, p, sweep_initial_state(p.n()), sw_eps, sw_opts)));
            const std::string dir = output_dir(sw_out);
            if (dir.empty())
                std::cout << out.dump(2) << '\n';
            else
                write_text(dir, "sweep.json", out.dump(2) + "\n");
        } else if (rp->parsed()) {
            std::vector<Figure> figs;
            if (rp_figure == "all")
                figs.assign(std::begin(all_figures), std::end(all_figures));
            else
                figs.push_back(parse_figure(rp_figure));
            std::string dir = output_dir(rp_out);
            if (dir.empty()) dir = "out";
            prepare_dir(dir);
            for (auto f : figs) {
                const auto result = run_figure(f);
                write_figure_outputs(result, dir);
                for (const auto& run : result.runs) {
                    std::cout << to_string(f) << ' ' << to_string(run.variant) << ' ' << to_string(run.report.kind)
                              << " amplitude=" << fmt(run.report.amplitude) << " period=" << fmt(run.report.period)
                              << " expected=" << to_string(run.expected) << (run.match ? " ok" : " MISMATCH")
                              << '\n';
                }
            }
        } else if (pr->parsed()) {
            for (const auto& name : preset_names()) {
                const auto p = preset(name);
                if (pr_out.empty())
                    std::cout << name << " n=" << p.n() << " r0=" << fmt(p.r0()) << '\n';
                else
                    write_text(pr_out, name + ".json", params_to_json(p).dump(2) + "\n");
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
