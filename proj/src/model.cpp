#include "hes1/model.hpp"
#include "hes1/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hes1 {
namespace {

double q_value(const ModelParams& p, double y) {
    double s = 0.0;
    double power = 1.0;
    for (double c : p.occupancy_coeffs()) {
        power *= y;
        s += c * power;
    }
    return s;
}

double q_derivative(const ModelParams& p, double y) {
    double s = 0.0;
    double power = 1.0; // y^{j-1}
    int j = 1;
    for (double c : p.occupancy_coeffs()) {
        s += j * c * power;
        power *= y;
        ++j;
    }
    return s;
}

void require_binding(const ModelParams& p, Variant v) {
    if (!p.has_binding_chain() && (v == Variant::full || v == Variant::no_dimers))
        throw DomainError(std::string(to_string(v)) + " model needs a binding chain, not the Hill form");
}

void check_dim(Variant v, const ModelParams& p, const Vector& s) {
    if (s.size() != state_dim(v, p.n())) {
        std::ostringstream msg;
        msg << to_string(v) << " state must have " << state_dim(v, p.n()) << " entries, got " << s.size();
        throw DomainError(msg.str());
    }
}

/// Validated copy with x entries in [-tol, 0) clamped to zero.
Vector prepared(const ModelParams& p, const StateVector& s, Variant expected) {
    if (s.variant != expected)
        throw DomainError("expected a " + std::string(to_string(expected)) + " state, got " +
                          std::string(to_string(s.variant)));
    require_binding(p, expected);
    check_dim(expected, p, s.values);
    s.validate(p.n());
    Vector out = s.values;
    if (expected == Variant::full || expected == Variant::no_dimers)
        for (int j = 0; j < p.n(); ++j) out[j] = std::max(out[j], 0.0);
    return out;
}

// x0, the probability that the promoter is free; with no sites it is always free.
double free_fraction(const ModelParams& p, const double* x) { return p.n() > 0 ? x[0] : 1.0; }

double sum_x(int n, const double* x) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += x[j];
    return s;
}

// phi on raw storage (no validation).
double phi_raw(const ModelParams& p, const double* x, double y1) {
    const int n = p.n();
    const double xn = 1.0 - sum_x(n, x);
    double unbinding = 0.0;
    for (int j = 1; j < n; ++j) unbinding += j * p.gamma(j) * x[j];
    if (n > 0) unbinding += n * p.gamma(n) * xn;
    double binding = 0.0;
    for (int j = 0; j < n; ++j) binding += p.k_binding(j) * x[j];
    return (y1 * y1 + p.theta() * unbinding) / (1.0 + p.theta() * binding);
}

// Binding chain f(x, y2) on raw storage; x has n entries, x_n reconstructed.
void binding_raw(const ModelParams& p, const double* x, double y2, double* out) {
    const int n = p.n();
    const double xn = 1.0 - sum_x(n, x);
    auto xx = [&](int j) { return j == n ? xn : x[j]; };
    for (int j = 0; j < n; ++j) {
        double d = -(p.k_binding(j) * y2 + (j > 0 ? j * p.gamma(j) : 0.0)) * xx(j);
        d += (j + 1) * p.gamma(j + 1) * xx(j + 1);
        if (j > 0) d += p.k_binding(j - 1) * y2 * xx(j - 1);
        out[j] = d;
    }
}

double dimer_balance_raw(const ModelParams& p, const double* x, double y2, double y1) {
    const int n = p.n();
    const double xn = 1.0 - sum_x(n, x);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s -= p.k_binding(j) * x[j] * y2;
    for (int j = 1; j < n; ++j) s += j * p.gamma(j) * x[j];
    if (n > 0) s += n * p.gamma(n) * xn;
    return p.theta() * s - y2 + y1 * y1;
}

} // namespace

std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::full: return "full";
    case Variant::no_dimers: return "no-dimers";
    case Variant::with_dimers: return "with-dimers";
    case Variant::classical: return "classical";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    for (Variant v : all_variants)
        if (name == to_string(v)) return v;
    throw DomainError("unknown variant '" + std::string(name) +
                      "' (expected full, no-dimers, with-dimers or classical)");
}

int state_dim(Variant v, int n) {
    switch (v) {
    case Variant::full: return n + 3;
    case Variant::no_dimers: return n + 2;
    case Variant::with_dimers: return 3;
    case Variant::classical: return 2;
    }
    return 0;
}

std::vector<std::string> state_names(Variant v, int n) {
    std::vector<std::string> names;
    if (v == Variant::full || v == Variant::no_dimers)
        for (int j = 0; j < n; ++j) names.push_back("x" + std::to_string(j));
    names.emplace_back("y1");
    if (v == Variant::full || v == Variant::with_dimers) names.emplace_back("y2");
    names.emplace_back("z");
    return names;
}

int index_y1(Variant v, int n) { return (v == Variant::full || v == Variant::no_dimers) ? n : 0; }

void StateVector::validate(int n) const {
    if (values.size() != state_dim(variant, n)) throw DomainError("state has the wrong dimension");
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) throw DomainError("state contains a non-finite entry");
    int first_y = 0;
    if (variant == Variant::full || variant == Variant::no_dimers) {
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            if (values[j] < -simplex_tol) throw DomainError("x_j < 0: state outside the binding simplex");
            total += values[j];
        }
        if (total > 1.0 + simplex_tol) throw DomainError("sum of x_j exceeds 1: state outside the binding simplex");
        first_y = n;
    }
    for (Eigen::Index i = first_y; i < values.size(); ++i)
        if (values[i] < 0.0) throw DomainError("y1, y2 and z must be nonnegative");
}

StateVector project(const StateVector& s, Variant target, int n) {
    if (s.variant != Variant::full) throw DomainError("project expects a full-model state");
    const auto& f = s.values;
    const double y1 = f[n], y2 = f[n + 1], z = f[n + 2];
    Vector out(state_dim(target, n));
    switch (target) {
    case Variant::full: out = f; break;
    case Variant::no_dimers:
        out.head(n) = f.head(n);
        out[n] = y1;
        out[n + 1] = z;
        break;
    case Variant::with_dimers: out << y1, y2, z; break;
    case Variant::classical: out << y1, z; break;
    }
    return {target, out};
}

StateVector default_initial_state(Variant v, int n) {
    Vector full = Vector::Zero(n + 3);
    if (n > 0) full[0] = 1.0;
    return project({Variant::full, full}, v, n);
}

double phi(const ModelParams& p, std::span<const double> x, double y1) {
    if (!p.has_binding_chain()) throw DomainError("phi needs a binding chain");
    if (static_cast<int>(x.size()) != p.n()) throw DomainError("phi: x must have n entries");
    if (!(y1 >= 0.0) || !std::isfinite(y1)) throw DomainError("phi: y1 must be finite and >= 0");
    std::vector<double> xc(x.begin(), x.end());
    double total = 0.0;
    for (double& v : xc) {
        if (!std::isfinite(v) || v < -simplex_tol) throw DomainError("phi: x outside the binding simplex");
        v = std::max(v, 0.0);
        total += v;
    }
    if (total > 1.0 + simplex_tol) throw DomainError("phi: x outside the binding simplex");
    return phi_raw(p, xc.data(), y1);
}

double psi(const ModelParams& p, double y2) {
    if (!(y2 >= 0.0)) throw DomainError("psi: y2 must be >= 0");
    return 1.0 / (1.0 + q_value(p, y2));
}

double psi_prime(const ModelParams& p, double y2) {
    if (!(y2 >= 0.0)) throw DomainError("psi_prime: y2 must be >= 0");
    const double d = 1.0 + q_value(p, y2);
    return -q_derivative(p, y2) / (d * d);
}

Vector psi_occupancy(const ModelParams& p, double y2) {
    if (!(y2 >= 0.0)) throw DomainError("psi_occupancy: y2 must be >= 0");
    const double base = psi(p, y2);
    Vector x(p.n());
    double power = 1.0;
    for (int j = 0; j < p.n(); ++j) {
        x[j] = (j == 0 ? 1.0 : p.occupancy_coeffs()[static_cast<std::size_t>(j - 1)] * power) * base;
        power *= y2;
    }
    return x;
}

double hill_psi(double a, double h, double y) {
    if (!(a > 0.0) || !(h > 0.0) || !(y >= 0.0)) throw DomainError("hill_psi needs a > 0, h > 0, y >= 0");
    const double ah = std::pow(a, h);
    return ah / (ah + std::pow(y, h));
}

Vector binding_block(const ModelParams& p, std::span<const double> x, double y2) {
    if (static_cast<int>(x.size()) != p.n()) throw DomainError("binding_block: x must have n entries");
    Vector out(p.n());
    binding_raw(p, x.data(), y2, out.data());
    return out;
}

double dimer_balance(const ModelParams& p, std::span<const double> x, double y2, double y1) {
    if (static_cast<int>(x.size()) != p.n()) throw DomainError("dimer_balance: x must have n entries");
    return dimer_balance_raw(p, x.data(), y2, y1);
}

void rhs_raw(Variant v, const ModelParams& p, const Vector& s, Vector& out) {
    check_dim(v, p, s);
    const int n = p.n();
    out.resize(s.size());
    switch (v) {
    case Variant::full: {
        const double y1 = s[n], y2 = s[n + 1], z = s[n + 2];
        binding_raw(p, s.data(), y2, out.data());
        for (int j = 0; j < n; ++j) out[j] /= p.eps1();
        out[n] = p.kk() * (y2 - y1 * y1) + p.delta1() * (z - y1);
        out[n + 1] = dimer_balance_raw(p, s.data(), y2, y1) / p.eps2();
        out[n + 2] = p.delta2() * (p.r0() * free_fraction(p, s.data()) - z);
        break;
    }
    case Variant::no_dimers: {
        const double y1 = s[n], z = s[n + 1];
        const double y2 = phi_raw(p, s.data(), y1);
        binding_raw(p, s.data(), y2, out.data());
        for (int j = 0; j < n; ++j) out[j] /= p.eps1();
        out[n] = p.kk() * (y2 - y1 * y1) + p.delta1() * (z - y1);
        out[n + 1] = p.delta2() * (p.r0() * free_fraction(p, s.data()) - z);
        break;
    }
    case Variant::with_dimers: {
        const double y1 = s[0], y2 = s[1], z = s[2];
        out[0] = p.kk() * (y2 - y1 * y1) + p.delta1() * (z - y1);
        out[1] = (y1 * y1 - y2) / p.eps2();
        out[2] = p.delta2() * (p.r0() / (1.0 + q_value(p, y2)) - z);
        break;
    }
    case Variant::classical: {
        const double y1 = s[0], z = s[1];
        out[0] = p.delta1() * (z - y1);
        out[1] = p.delta2() * (p.r0() / (1.0 + q_value(p, y1 * y1)) - z);
        break;
    }
    }
}

Vector rhs_full(const ModelParams& p, const StateVector& s) {
    Vector out;
    rhs_raw(Variant::full, p, prepared(p, s, Variant::full), out);
    return out;
}

Vector rhs_no_dimers(const ModelParams& p, const StateVector& s) {
    Vector out;
    rhs_raw(Variant::no_dimers, p, prepared(p, s, Variant::no_dimers), out);
    return out;
}

Vector rhs_with_dimers(const ModelParams& p, const StateVector& s) {
    Vector out;
    rhs_raw(Variant::with_dimers, p, prepared(p, s, Variant::with_dimers), out);
    return out;
}

Vector rhs_classical(const ModelParams& p, const StateVector& s) {
    Vector out;
    rhs_raw(Variant::classical, p, prepared(p, s, Variant::classical), out);
    return out;
}

Vector rhs(const ModelParams& p, const StateVector& s) {
    switch (s.variant) {
    case Variant::full: return rhs_full(p, s);
    case Variant::no_dimers: return rhs_no_dimers(p, s);
    case Variant::with_dimers: return rhs_with_dimers(p, s);
    case Variant::classical: return rhs_classical(p, s);
    }
    return {};
}

Vector rhs_no_dimers_n1_factored(const ModelParams& p, const StateVector& s) {
    if (p.n() != 1) throw DomainError("factored no-dimers form is defined for n = 1 only");
    const Vector v = prepared(p, s, Variant::no_dimers);
    const double x0 = v[0], y1 = v[1], z = v[2];
    const double g1 = p.gamma(1), th = p.theta();
    const double flux = (g1 * (1.0 - x0) - x0 * y1 * y1) / (1.0 + th * x0);
    Vector out(3);
    out[0] = flux / p.eps1();
    out[1] = p.kk() * th * flux + p.delta1() * (z - y1);
    out[2] = p.delta2() * (p.r0() * x0 - z);
    return out;
}

StateVector steady_state(const ModelParams& p, Variant v) {
    require_binding(p, v);
    const int n = p.n();
    Vector full(n + 3);
    const auto c = p.occupancy_coeffs();
    for (int j = 0; j < n; ++j) full[j] = (j == 0 ? 1.0 : c[static_cast<std::size_t>(j - 1)]) / p.r0();
    full[n] = full[n + 1] = full[n + 2] = 1.0;
    StateVector fs{Variant::full, full};
    const StateVector out = project(fs, v, n);
    Vector r;
    rhs_raw(v, p, out.values, r);
    // the closed-form point is exact up to rounding, so the check scales with
    // the size of the individual terms (1 for well-scaled parameters)
    const Matrix jac = finite_difference_jacobian(
        [&](const Vector& y, Vector& f) { rhs_raw(v, p, y, f); }, out.values);
    const double tol = 1e-10 * std::max(1.0, jac.lpNorm<Eigen::Infinity>());
    const double residual = r.lpNorm<Eigen::Infinity>();
    if (!(residual <= tol)) {
        std::ostringstream msg;
        msg << "steady state residual " << residual << " exceeds " << tol << " for the " << to_string(v) << " model";
        throw std::logic_error(msg.str());
    }
    return out;
}

Y1Root steady_state_solve_y1(const ModelParams& p) { return steady_state_solve_y1(p, p.r0()); }

Y1Root steady_state_solve_y1(const ModelParams& p, double r0) {
    if (!(r0 > 0.0)) throw DomainError("r0 must be positive");
    // h(y) = y (1 + q(y^2)) - r0 is strictly increasing with h(0) < 0 <= h(r0).
    auto h = [&](double y) { return y * (1.0 + q_value(p, y * y)) - r0; };
    double lo = 0.0, hi = r0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    const double root = std::abs(h(lo)) <= std::abs(h(hi)) ? lo : hi;
    return {root, std::abs(root - 1.0) > 1e-8};
}

bool InvariantRegion::contains(const StateVector& s, int n, double tol) const {
    if (s.variant != Variant::full) throw DomainError("invariant region membership is defined for full states");
    const auto& v = s.values;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        if (v[j] < -tol) return false;
        total += v[j];
    }
    if (total > 1.0 + tol) return false;
    const double y1 = v[n], y2 = v[n + 1], z = v[n + 2];
    return y1 >= -tol && y1 <= ybar1 + tol && y2 >= -tol && y2 <= ybar2 + tol && z >= -tol && z <= zbar + tol;
}

InvariantRegion invariant_region(const ModelParams& p) {
    const double tg = p.theta_gamma();
    const double yb1 = p.r0() + p.kk() / p.delta1() * tg;
    return {yb1, yb1 * yb1 + tg, p.r0()};
}

} // namespace hes1

namespace hes1 {

std::optional<Matrix> jacobian_analytic(Variant v, const ModelParams& p, const Vector& s) {
    check_dim(v, p, s);
    const double k = p.kk(), d1 = p.delta1(), d2 = p.delta2(), r0 = p.r0();
    switch (v) {
    case Variant::classical: {
        const double y1 = s[0];
        const double y2 = y1 * y1;
        const double den = 1.0 + q_value(p, y2);
        const double dpsi = -q_derivative(p, y2) / (den * den);
        Matrix j(2, 2);
        j << -d1, d1, 2.0 * y1 * r0 * d2 * dpsi, -d2;
        return j;
    }
    case Variant::with_dimers: {
        const double y1 = s[0], y2 = s[1];
        const double den = 1.0 + q_value(p, y2);
        const double dpsi = -q_derivative(p, y2) / (den * den);
        Matrix j(3, 3);
        j << -2.0 * k * y1 - d1, k, d1,
             2.0 * y1 / p.eps2(), -1.0 / p.eps2(), 0.0,
             0.0, r0 * d2 * dpsi, -d2;
        return j;
    }
    case Variant::full: {
        if (p.n() != 1 || !p.has_binding_chain()) return std::nullopt;
        const double x0 = s[0], y1 = s[1], y2 = s[2];
        const double g1 = p.gamma(1), th = p.theta(), e1 = p.eps1(), e2 = p.eps2();
        Matrix j(4, 4);
        j << -(g1 + y2) / e1, 0.0, -x0 / e1, 0.0,
             0.0, -2.0 * k * y1 - d1, k, d1,
             -th * (g1 + y2) / e2, 2.0 * y1 / e2, -(th * x0 + 1.0) / e2, 0.0,
             d2 * r0, 0.0, 0.0, -d2;
        return j;
    }
    case Variant::no_dimers: {
        if (p.n() != 1 || !p.has_binding_chain()) return std::nullopt;
        const double x0 = s[0], y1 = s[1];
        const double g1 = p.gamma(1), th = p.theta(), e1 = p.eps1();
        const double den = 1.0 + th * x0;
        const double flux = g1 * (1.0 - x0) - x0 * y1 * y1;
        const double dflux_dx = (-g1 - y1 * y1) / den - flux * th / (den * den);
        const double dflux_dy = -2.0 * x0 * y1 / den;
        Matrix j(3, 3);
        j << dflux_dx / e1, dflux_dy / e1, 0.0,
             k * th * dflux_dx, k * th * dflux_dy - d1, d1,
             d2 * r0, 0.0, -d2;
        return j;
    }
    }
    return std::nullopt;
}

} // namespace hes1
