#pragma once

#include "hes1/params.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hes1 {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// The four model levels: full (binding + dimers), no-dimers (dimers
/// quasi-stationary), with-dimers (binding quasi-stationary) and classical.
enum class Variant { full, no_dimers, with_dimers, classical };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
inline constexpr Variant all_variants[] = {Variant::full, Variant::no_dimers,
                                           Variant::with_dimers, Variant::classical};

/// State dimension of a variant for n binding sites.
int state_dim(Variant v, int n);
/// Column names in state order, e.g. x0..x{n-1}, y1, y2, z.
std::vector<std::string> state_names(Variant v, int n);
/// Position of y1 within the state of a variant.
int index_y1(Variant v, int n);

/// Round-off slack allowed on the probability simplex before a state is
/// rejected; entries in [-tol, 0) are clamped to 0.
inline constexpr double simplex_tol = 1e-12;

/// A state tagged with its model level. Layouts:
///   full:        (x0..x_{n-1}, y1, y2, z)
///   no_dimers:   (x0..x_{n-1}, y1, z)
///   with_dimers: (y1, y2, z)
///   classical:   (y1, z)
struct StateVector {
    Variant variant = Variant::classical;
    Vector values;

    StateVector() = default;
    StateVector(Variant v, Vector vals) : variant(v), values(std::move(vals)) {}

    /// Throws DomainError unless the state is finite, non-negative and (for the
    /// binding variants) x lies in the simplex, with simplex_tol slack.
    void validate(int n) const;
};

/// Projects a full-model state onto another variant (drops variables).
StateVector project(const StateVector& full_state, Variant target, int n);

/// Cold start: x0 = 1, x_j = 0, y1 = y2 = z = 0, projected to the variant.
StateVector default_initial_state(Variant v, int n);

// Quasi-stationary maps and repression functions.

/// Stationary dimer level for fixed binding state x and monomer level y1.
double phi(const ModelParams& p, std::span<const double> x, double y1);
/// psi(y2) = 1 / (1 + q(y2)).
double psi(const ModelParams& p, double y2);
/// d psi / d y2.
double psi_prime(const ModelParams& p, double y2);
/// Stationary occupancy x_0..x_{n-1} for fixed dimer level.
Vector psi_occupancy(const ModelParams& p, double y2);
/// a^h / (a^h + y^h).
double hill_psi(double a, double h, double y);

// Right-hand sides in explicit form (eps divisions applied). These validate
// their inputs.

Vector rhs_full(const ModelParams& p, const StateVector& s);
Vector rhs_no_dimers(const ModelParams& p, const StateVector& s);
Vector rhs_with_dimers(const ModelParams& p, const StateVector& s);
Vector rhs_classical(const ModelParams& p, const StateVector& s);
Vector rhs(const ModelParams& p, const StateVector& s);

/// Unchecked evaluation used by integrators and finite differences; only
/// the dimension is checked. Writes the derivative into `out`.
void rhs_raw(Variant v, const ModelParams& p, const Vector& state, Vector& out);

/// The n=1 no-dimers system with the common 1/(1 + theta x0) factor taken
/// out, as an independent formulation of the same vector field.
Vector rhs_no_dimers_n1_factored(const ModelParams& p, const StateVector& s);

/// Binding-chain x-block (without the 1/eps1 factor) for fixed y2.
Vector binding_block(const ModelParams& p, std::span<const double> x, double y2);
/// Dimer balance g(x, y2, y1) (the eps2 y2' right-hand side).
double dimer_balance(const ModelParams& p, std::span<const double> x, double y2, double y1);

/// Analytic Jacobian where a closed form is implemented: classical and
/// with-dimers for any n, full and no-dimers for n = 1.
std::optional<Matrix> jacobian_analytic(Variant v, const ModelParams& p, const Vector& state);

// Steady states and the invariant region.

StateVector steady_state(const ModelParams& p, Variant v);

struct Y1Root {
    double y1;
    bool inconsistent; ///< |y1 - 1| > 1e-8: r0 does not match the binding chain
};
/// Solves y1 = r0 / (1 + q(y1^2)) by bisection on (0, r0].
Y1Root steady_state_solve_y1(const ModelParams& p);
/// Same with an explicitly supplied r0 (to probe inconsistent scalings).
Y1Root steady_state_solve_y1(const ModelParams& p, double r0);

struct InvariantRegion {
    double ybar1;
    double ybar2;
    double zbar;

    /// Membership of a full-model state, with additive slack.
    bool contains(const StateVector& s, int n, double tol = 0.0) const;
};

InvariantRegion invariant_region(const ModelParams& p);

} // namespace hes1
