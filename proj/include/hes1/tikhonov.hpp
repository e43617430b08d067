#pragma once

#include "hes1/integrator.hpp"
#include "hes1/model.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hes1 {

// Site-resolved binding model: one probability per occupancy pattern of the
// n sites (bit i set = site i occupied).

inline constexpr int max_permutation_sites = 4;

struct PermutationState {
    int n = 0;
    std::vector<double> x_config; ///< 2^n pattern probabilities
    double y1 = 0.0;
    double y2 = 0.0;
    double z = 0.0;

    /// Layout used by the integrator: (x_config..., y1, y2, z).
    Vector packed() const;
    static PermutationState unpack(int n, const Vector& v);
};

/// Time derivative in packed layout, with the same eps scalings as the full
/// model. Throws for n > max_permutation_sites.
Vector rhs_permutation(const ModelParams& p, const PermutationState& s);

/// x_j = total probability of patterns with j occupied sites, j = 0..n.
std::vector<double> aggregate_occupancy(std::span<const double> x_config, int n);

/// Spreads each x_j evenly over the patterns with j occupied sites.
PermutationState lift_symmetric(const ModelParams& p, const StateVector& full_state);

/// Aggregated full-model state (x_0..x_{n-1}, y1, y2, z).
StateVector aggregate(const PermutationState& s);

OdeSystem permutation_system(const ModelParams& p);

// Singular-perturbation sweeps.

enum class Reduction { full_to_no_dimers, full_to_with_dimers, no_dimers_to_classical, with_dimers_to_classical };
inline constexpr Reduction all_reductions[] = {Reduction::full_to_no_dimers, Reduction::full_to_with_dimers,
                                               Reduction::no_dimers_to_classical,
                                               Reduction::with_dimers_to_classical};

std::string_view to_string(Reduction r);
Reduction parse_reduction(std::string_view name);
Variant finer_variant(Reduction r);
Variant reduced_variant(Reduction r);
/// True when the sweep varies eps2, false for eps1.
bool varies_eps2(Reduction r);

struct SweepPoint {
    double eps;
    double t_layer;
    double slow_sup;           ///< slow variables over [0, T]
    double slow_sup_post;      ///< slow variables over [t_layer, T]
    double fast_sup_post;      ///< fast variables over [t_layer, T]
    double sup_norm_post_layer; ///< max of the two post-layer distances
    long steps;
    std::string failure; ///< empty on success
};

struct SweepResult {
    Reduction reduction;
    double t_end;
    std::vector<SweepPoint> points;

    std::vector<double> eps_values() const;
    std::vector<double> sup_norm_post_layer() const;
    bool complete() const;
};

struct SweepOptions {
    double t_end = 100.0;
    double layer_factor = 10.0; ///< t_layer = layer_factor * eps
    IntegratorConfig integrator{1e-10, 1e-12, 100.0, 1'000'000, Method::implicit_stiff, 0.01};
};

/// Sweep initial state: x spread evenly over x_0..x_n, y1 = 1, y2 = 0,
/// z = 0.5. It lies off both slow manifolds.
StateVector sweep_initial_state(int n);

/// Compares the finer model at each eps with the reduced model. The reduced
/// model starts from the shared slow variables; its fast variables are read
/// off the quasi-stationary map. An integration failure at some eps is
/// recorded in that point and the sweep continues.
SweepResult eps_sweep(Reduction r, const ModelParams& base, const StateVector& full_initial,
                      const std::vector<double>& eps_list, const SweepOptions& opts = {});

nlohmann::json sweep_to_json(const SweepResult& r);

// Figure experiments.

enum class Figure { fig4, fig5, fig6a, fig6b };
inline constexpr Figure all_figures[] = {Figure::fig4, Figure::fig5, Figure::fig6a, Figure::fig6b};
std::string_view to_string(Figure f);
Figure parse_figure(std::string_view name);

enum class Expectation { sustained, damped, not_sustained, unspecified };
std::string_view to_string(Expectation e);
bool satisfies(Expectation e, OscillationKind k);

struct FigureSetup {
    Figure figure;
    std::string preset;
    ModelParams params;
    IntegratorConfig integrator;
    /// Indexed like all_variants.
    Expectation expected[4];
};

FigureSetup figure_setup(Figure f);

struct VariantRun {
    Variant variant;
    Trajectory trajectory;
    OscillationReport report;
    Expectation expected;
    bool match;
};

struct FigureResult {
    FigureSetup setup;
    std::vector<VariantRun> runs;

    bool all_match() const;
};

/// Integrates the four variants from the cold start and classifies y1.
FigureResult run_figure(Figure f);
FigureResult run_figure(const FigureSetup& setup);

nlohmann::json verdict_json(const FigureResult& r);

/// Writes <fig>_<variant>.csv per run and <fig>_verdict.json into dir.
void write_figure_outputs(const FigureResult& r, const std::string& dir);

} // namespace hes1
