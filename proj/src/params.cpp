#include "hes1/params.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace hes1 {
namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool cond, const std::string& what) {
    if (!cond) throw DomainError(what);
}

} // namespace

std::vector<double> occupancy_coefficients(std::span<const double> k_binding,
                                           std::span<const double> gamma) {
    std::vector<double> c;
    c.reserve(gamma.size());
    double running = 1.0;
    for (std::size_t j = 1; j <= gamma.size(); ++j) {
        running *= k_binding[j - 1] / (gamma[j - 1] * static_cast<double>(j));
        c.push_back(running);
    }
    return c;
}

ModelParams::ModelParams(const ParamValues& v) {
    require(v.n >= 0, "n must be nonnegative");
    n_ = v.n;
    kk_ = v.kk;
    delta1_ = v.delta1;
    delta2_ = v.delta2;
    theta_ = v.theta;
    eps1_ = v.eps1;
    eps2_ = v.eps2;

    if (v.hill_r0) {
        require(n_ >= 1, "Hill form needs n >= 1");
        require(std::isfinite(*v.hill_r0) && *v.hill_r0 > 1.0, "Hill form needs r0 > 1");
        form_ = PsiForm::hill;
        r0_ = *v.hill_r0;
        coeffs_.assign(static_cast<std::size_t>(n_), 0.0);
        coeffs_.back() = r0_ - 1.0;
        validate_scalars();
        return;
    }

    const auto n = static_cast<std::size_t>(n_);
    require(v.k_binding.size() == n, "k must have n entries (k_0..k_{n-1})");
    require(v.gamma.size() == n, "gamma must have n entries (gamma_1..gamma_n)");
    for (double k : v.k_binding) require(std::isfinite(k) && k >= 0.0, "k_j must be finite and >= 0");
    for (double g : v.gamma) require(finite_positive(g), "gamma_j must be finite and > 0");
    if (n > 0) require(v.k_binding[0] == 1.0, "k_0 must equal 1 (scaling convention)");

    k_ = v.k_binding;
    gamma_ = v.gamma;
    coeffs_ = occupancy_coefficients(k_, gamma_);
    r0_ = 1.0 + std::accumulate(coeffs_.begin(), coeffs_.end(), 0.0);
    if (v.r0) {
        require(std::isfinite(*v.r0), "r0 must be finite");
        if (std::abs(*v.r0 - r0_) > 1e-12 * r0_) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "supplied r0 = " << *v.r0 << " disagrees with the binding chain value " << r0_;
            throw DomainError(msg.str());
        }
    }
    validate_scalars();
}

void ModelParams::validate_scalars() const {
    require(std::isfinite(kk_) && kk_ >= 0.0, "kk must be finite and >= 0");
    require(finite_positive(delta1_), "delta1 must be > 0");
    require(finite_positive(delta2_), "delta2 must be > 0");
    require(finite_positive(theta_), "theta must be > 0");
    require(finite_positive(eps1_), "eps1 must be > 0");
    require(finite_positive(eps2_), "eps2 must be > 0");
}

ModelParams ModelParams::hill(int n, double r0, double kk, double delta1, double delta2,
                              double theta, double eps1, double eps2) {
    ParamValues v;
    v.n = n;
    v.k_binding.clear();
    v.gamma.clear();
    v.kk = kk;
    v.delta1 = delta1;
    v.delta2 = delta2;
    v.theta = theta;
    v.eps1 = eps1;
    v.eps2 = eps2;
    v.hill_r0 = r0;
    return ModelParams(v);
}

double ModelParams::theta_gamma() const {
    if (!has_binding_chain()) throw DomainError("theta_gamma requires the binding-chain form");
    double s = 0.0;
    for (int j = 1; j <= n_; ++j) s += j * gamma(j);
    return theta_ * s;
}

ParamValues ModelParams::values() const {
    ParamValues v;
    v.n = n_;
    v.k_binding = k_;
    v.gamma = gamma_;
    v.kk = kk_;
    v.delta1 = delta1_;
    v.delta2 = delta2_;
    v.theta = theta_;
    v.eps1 = eps1_;
    v.eps2 = eps2_;
    if (form_ == PsiForm::hill) v.hill_r0 = r0_;
    return v;
}

ModelParams ModelParams::with_eps(double eps1, double eps2) const {
    auto v = values();
    v.eps1 = eps1;
    v.eps2 = eps2;
    return ModelParams(v);
}

ModelParams ModelParams::with_kk(double kk) const {
    auto v = values();
    v.kk = kk;
    return ModelParams(v);
}

ModelParams ModelParams::with_rates(double delta1, double delta2) const {
    auto v = values();
    v.delta1 = delta1;
    v.delta2 = delta2;
    return ModelParams(v);
}

ModelParams ModelParams::with_theta(double theta) const {
    auto v = values();
    v.theta = theta;
    return ModelParams(v);
}

void DimensionalParams::validate() const {
    require(n >= 0, "n must be nonnegative");
    require(k_dim.size() == static_cast<std::size_t>(n), "k_dim must have n entries");
    require(gamma_dim.size() == static_cast<std::size_t>(n), "gamma_dim must have n entries");
    for (double k : k_dim) require(finite_positive(k), "dimensional binding rates must be > 0");
    for (double g : gamma_dim) require(finite_positive(g), "dimensional dissociation rates must be > 0");
    for (double v : {k_y, gamma_y, r_y, r_z, delta_y, delta_z})
        require(finite_positive(v), "dimensional rates must be > 0");
}

Nondimensionalization derive_nondimensional(const DimensionalParams& p) {
    p.validate();
    const auto coeffs = occupancy_coefficients(p.k_dim, p.gamma_dim);
    const double ratio = p.delta_y * p.delta_z / (p.r_y * p.r_z);
    const double dimer_scale = p.k_y / p.gamma_y;

    // lhs(q) - rhs(q): strictly increasing, negative at 0, nonnegative at 1/ratio.
    auto scale_eq = [&](double q) {
        const double s = dimer_scale * q * q;
        double poly = 1.0;
        double power = 1.0;
        for (double c : coeffs) {
            power *= s;
            poly += c * power;
        }
        return ratio * q - 1.0 / poly;
    };

    double lo = 0.0;
    double hi = 1.0 / ratio;
    double q = hi;
    if (scale_eq(hi) != 0.0) {
        std::uintmax_t max_iter = 500;
        auto [a, b] = boost::math::tools::toms748_solve(
            scale_eq, lo, hi, scale_eq(lo), scale_eq(hi),
            boost::math::tools::eps_tolerance<double>(), max_iter);
        if (max_iter >= 500) {
            std::ostringstream msg;
            msg << "scale equation did not converge; residual " << scale_eq(0.5 * (a + b));
            throw std::runtime_error(msg.str());
        }
        q = std::abs(scale_eq(a)) < std::abs(scale_eq(b)) ? a : b;
    }

    const double k0 = p.n > 0 ? p.k_dim[0] : 1.0;
    const double time_scale = p.k_y * q * q;

    ParamValues v;
    v.n = p.n;
    v.k_binding.clear();
    v.gamma.clear();
    for (int j = 0; j < p.n; ++j) v.k_binding.push_back(p.k_dim[static_cast<std::size_t>(j)] / k0);
    for (int j = 0; j < p.n; ++j)
        v.gamma.push_back(p.gamma_dim[static_cast<std::size_t>(j)] * p.gamma_y / (k0 * time_scale));
    v.kk = 2.0 / q;
    v.delta1 = p.delta_y / time_scale;
    v.delta2 = p.delta_z / time_scale;
    v.theta = k0 / p.gamma_y;
    v.eps1 = p.gamma_y / k0;
    v.eps2 = time_scale / p.gamma_y;
    v.r0 = 1.0 / (ratio * q);

    return Nondimensionalization{ModelParams(v), q, std::abs(scale_eq(q))};
}

namespace {

ParamValues common_values() {
    ParamValues v;
    v.delta1 = 0.2242;
    v.delta2 = 0.2075;
    v.theta = 0.5;
    v.eps1 = 1.0;
    return v;
}

} // namespace

ModelParams preset(const std::string& name) {
    auto v = common_values();
    if (name == "par-common") {
        v.n = 1;
        v.k_binding = {1.0};
        v.gamma = {1.0};
        v.kk = 0.2;
        v.eps2 = 1.0;
    } else if (name == "par-n3") {
        v.n = 3;
        v.k_binding = {1.0, 1.5, 1.5};
        v.gamma = {1.0, 0.5, 0.5};
        v.kk = 0.2;
        v.eps2 = 1.0;
    } else if (name == "par-n5") {
        v.n = 5;
        v.k_binding = {1.0, 2.0, 3.0, 4.0, 700.0};
        v.gamma = {2.0, 1.0, 1.0, 1.0, 1.0};
        v.kk = 0.01;
        v.eps2 = 5.0;
    } else if (name == "par-n9" || name == "par-n9-eps005") {
        v.n = 9;
        v.k_binding.clear();
        for (int i = 0; i < 9; ++i) v.k_binding.push_back(i + 1.0);
        v.gamma.assign(9, 1.0);
        v.kk = 0.01;
        v.eps2 = 5.0;
        if (name == "par-n9-eps005") v.eps1 = 0.05;
    } else {
        throw DomainError("unknown preset '" + name + "'");
    }
    return ModelParams(v);
}

std::vector<std::string> preset_names() {
    return {"par-common", "par-n3", "par-n5", "par-n9", "par-n9-eps005"};
}

} // namespace hes1
