#include "hes1/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hes1 {

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::marginal: return "marginal";
    }
    return "?";
}

std::string_view to_string(Certificate c) {
    switch (c) {
    case Certificate::stable_certified: return "stable_certified";
    case Certificate::unstable_certified: return "unstable_certified";
    case Certificate::indeterminate: return "indeterminate";
    }
    return "?";
}

double CharPoly::operator()(double lambda) const {
    double v = 0.0;
    for (double c : coeffs) v = v * lambda + c;
    return v;
}

std::vector<Complex> CharPoly::roots() const {
    const int d = degree();
    if (d < 1) return {};
    Matrix comp = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) comp(0, i) = -coeffs[static_cast<std::size_t>(i + 1)] / coeffs[0];
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    return eigenvalues(comp);
}

std::vector<Complex> eigenvalues(const Matrix& m) {
    Eigen::EigenSolver<Matrix> es(m, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation did not converge");
    std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    return out;
}

double max_real_part(const std::vector<Complex>& ev) {
    double m = -std::numeric_limits<double>::infinity();
    for (auto z : ev) m = std::max(m, z.real());
    return m;
}

Verdict eigen_verdict(const std::vector<Complex>& ev) {
    const double m = max_real_part(ev);
    if (m < -eigen_band) return Verdict::stable;
    if (m > eigen_band) return Verdict::unstable;
    return Verdict::marginal;
}

Matrix jacobian_fd(Variant v, const ModelParams& p, const StateVector& s) {
    if (s.variant != v) throw DomainError("state variant does not match");
    s.validate(p.n());
    const auto f = [&](const Vector& y, Vector& out) { rhs_raw(v, p, y, out); };
    Matrix j = Matrix::Zero(s.values.size(), s.values.size());
    {
        Vector yp = s.values, ym = s.values, fp, fm;
        for (Eigen::Index i = 0; i < yp.size(); ++i) {
            const double h = std::max(1e-7, 1e-7 * std::abs(s.values[i]));
            yp[i] = s.values[i] + h;
            ym[i] = s.values[i] - h;
            f(yp, fp);
            f(ym, fm);
            j.col(i) = (fp - fm) / (yp[i] - ym[i]);
            yp[i] = ym[i] = s.values[i];
        }
    }
    if (!j.allFinite()) throw DomainError("finite-difference Jacobian has non-finite entries");
    return j;
}

namespace {

void require_n1(const ModelParams& p, const char* what) {
    if (p.n() != 1 || !p.has_binding_chain())
        throw DomainError(std::string(what) + " needs n = 1 with a binding chain");
}

} // namespace

CharPoly charpoly_full_n1(const ModelParams& p) {
    require_n1(p, "charpoly_full_n1");
    const double g = p.gamma(1), th = p.theta(), k = p.kk();
    const double d1 = p.delta1(), d2 = p.delta2(), e2 = p.eps2();
    const double e = e2 / p.eps1();
    const double xb = g / (1.0 + g);
    const double c0 = e * e2 * d1 * (g + 1.0);
    const double c1 = e * (g + 1.0) * (e2 * (2.0 * k + d1) + 1.0) + e2 * (2.0 * k * th * xb + d1 * (1.0 + th * xb));
    const double c2 = e * (g + 1.0) + e2 * (2.0 * k + d1) + th * xb + 1.0;
    const double a1 = e2 * d2 + c2;
    const double a2 = e2 * d2 * c2 + c1;
    const double a3 = e2 * d2 * c1 + c0;
    const double a4 = e * e2 * e2 * d1 * d2 * (g + 3.0);
    return {{1.0, a1, a2, a3, a4}};
}

CharPoly charpoly_nodimers_n1(const ModelParams& p) {
    require_n1(p, "charpoly_nodimers_n1");
    const double g = p.gamma(1), th = p.theta(), k = p.kk();
    const double d1 = p.delta1(), d2 = p.delta2(), e1 = p.eps1();
    const double eta = (1.0 + g) / (1.0 + g * (1.0 + th));
    const double a1 = d1 + d2 + eta * (1.0 + g) / e1 + 2.0 * k * eta * th * g / (1.0 + g);
    const double a2 = eta * (d1 + d2) * (1.0 + g) / e1 + 2.0 * k * eta * th * d2 * g / (1.0 + g) + d1 * d2;
    const double a3 = eta * d1 * d2 * (3.0 + g) / e1;
    return {{1.0, a1, a2, a3}};
}

CharPoly charpoly_withdimers(const ModelParams& p) {
    const double a = 2.0 * p.kk() + p.delta1();
    const double d1 = p.delta1(), d2 = p.delta2(), e2 = p.eps2();
    const double dpsi = psi_prime(p, 1.0);
    return {{1.0, a + d2 + 1.0 / e2, d1 / e2 + d2 * (a + 1.0 / e2),
             d1 * d2 / e2 * (1.0 - 2.0 * p.r0() * dpsi)}};
}

CharPoly charpoly_classical(const ModelParams& p) {
    const double d1 = p.delta1(), d2 = p.delta2();
    return {{1.0, d1 + d2, d1 * d2 * (1.0 - 2.0 * p.r0() * psi_prime(p, 1.0))}};
}

Verdict routh_hurwitz(const CharPoly& cp) {
    const int d = cp.degree();
    if (d < 2 || d > 4) throw DomainError("routh_hurwitz supports degrees 2 to 4");
    if (cp.coeffs[0] != 1.0) throw DomainError("characteristic polynomial must be monic");
    for (double c : cp.coeffs)
        if (!std::isfinite(c)) throw DomainError("characteristic polynomial has non-finite coefficients");

    // Each test quantity with the magnitude of its largest constituent term.
    std::vector<std::pair<double, double>> tests;
    for (int i = 1; i <= d; ++i) tests.emplace_back(cp.a(i), 0.0);
    if (d == 3) {
        const double t1 = cp.a(1) * cp.a(2), t2 = cp.a(3);
        tests.emplace_back(t1 - t2, std::abs(t1) + std::abs(t2));
    } else if (d == 4) {
        const double a1 = cp.a(1), a2 = cp.a(2), a3 = cp.a(3), a4 = cp.a(4);
        const double t1 = a1 * a2 * a3, t2 = a3 * a3, t3 = a1 * a1 * a4;
        tests.emplace_back(t1 - t2 - t3, std::abs(t1) + std::abs(t2) + std::abs(t3));
    }
    bool zero = false;
    for (auto [value, scale] : tests) {
        if (std::abs(value) <= hurwitz_band * scale) {
            zero = true;
            continue;
        }
        if (value < 0.0) return Verdict::unstable;
    }
    return zero ? Verdict::marginal : Verdict::stable;
}

BindingMatrix binding_matrix(const ModelParams& p, double y2) {
    if (!p.has_binding_chain()) throw DomainError("binding matrix needs a binding chain");
    if (!(y2 >= 0.0) || !std::isfinite(y2)) throw DomainError("dimer level must be finite and >= 0");
    const int n = p.n();
    BindingMatrix m;
    m.diag.resize(n + 1);
    m.super.resize(n);
    m.sub.resize(n);
    for (int j = 0; j <= n; ++j) {
        const double on = j < n ? p.k_binding(j) * y2 : 0.0;
        const double off = j > 0 ? j * p.gamma(j) : 0.0;
        m.diag[j] = -(on + off);
    }
    for (int j = 0; j < n; ++j) {
        m.super[j] = (j + 1) * p.gamma(j + 1);
        m.sub[j] = p.k_binding(j) * y2;
    }
    return m;
}

Matrix BindingMatrix::dense() const {
    const int d = dim();
    Matrix a = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) a(j, j) = diag[j];
    for (int j = 0; j + 1 < d; ++j) {
        a(j, j + 1) = super[j];
        a(j + 1, j) = sub[j];
    }
    return a;
}

namespace {

struct SturmTerms {
    std::vector<double> value;
    std::vector<double> scale; ///< |first term| + |second term| of the recurrence
};

// The diagonal of a generator is -(sub_j + super_{j-1}). Writing the
// recurrence with E_j = D_j + sub_{j-1} D_{j-1} gives
//   D_j = -(sub_{j-1} + lambda) D_{j-1} - super_{j-2} E_{j-1}
//   E_j = -lambda D_{j-1} - super_{j-2} E_{j-1},   E_1 = -lambda,
// which is the same sequence without the cancellation of the plain
// three-term form (at lambda = 0, E vanishes and D is a plain product).
SturmTerms sturm_terms(const BindingMatrix& m, double lambda) {
    const int d = m.dim();
    auto sub = [&](int j) { return j < d - 1 ? m.sub[j] : 0.0; };
    auto super = [&](int j) { return j >= 0 ? m.super[j] : 0.0; };
    for (int j = 0; j < d; ++j) {
        const double off = sub(j) + super(j - 1);
        if (j < d - 1 && m.super[j] * m.sub[j] < 0.0)
            throw DomainError("negative off-diagonal product in the binding matrix");
        if (std::abs(m.diag[j] + off) > 1e-12 * off)
            throw DomainError("binding matrix columns do not sum to zero");
    }
    SturmTerms s;
    s.value.reserve(static_cast<std::size_t>(d + 1));
    s.scale.reserve(static_cast<std::size_t>(d + 1));
    s.value.push_back(1.0);
    s.scale.push_back(1.0);
    if (d == 0) return s;
    double e = -lambda, e_scale = std::abs(lambda);
    s.value.push_back(-sub(0) - lambda);
    s.scale.push_back(sub(0) + std::abs(lambda));
    for (int j = 2; j <= d; ++j) {
        const double prev = s.value[static_cast<std::size_t>(j - 1)];
        const double up = super(j - 2);
        const double t1 = -(sub(j - 1) + lambda) * prev;
        const double t2 = up * e;
        s.value.push_back(t1 - t2);
        s.scale.push_back((sub(j - 1) + std::abs(lambda)) * std::abs(prev) + up * e_scale);
        const double next_scale = std::abs(lambda * prev) + up * e_scale;
        e = -lambda * prev - up * e;
        e_scale = next_scale;
    }
    return s;
}

} // namespace

std::vector<double> sturm_sequence(const BindingMatrix& m, double lambda) {
    return sturm_terms(m, lambda).value;
}

int count_eigs_above(const BindingMatrix& m, double a) {
    const auto s = sturm_terms(m, a);
    // A member lost to cancellation is treated as an exact zero.
    constexpr double cancel = 64.0 * std::numeric_limits<double>::epsilon();
    int agreements = 0;
    int prev = 1;
    for (std::size_t j = 1; j < s.value.size(); ++j) {
        int sign;
        if (std::abs(s.value[j]) <= cancel * s.scale[j])
            sign = -prev;
        else
            sign = s.value[j] > 0.0 ? 1 : -1;
        if (sign == prev) ++agreements;
        prev = sign;
    }
    return agreements;
}

Matrix symmetrized(const BindingMatrix& m) {
    const int d = m.dim();
    Matrix a = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) a(j, j) = m.diag[j];
    for (int j = 0; j + 1 < d; ++j) a(j, j + 1) = a(j + 1, j) = std::sqrt(m.super[j] * m.sub[j]);
    return a;
}

Vector symmetrizing_scale(const BindingMatrix& m) {
    const int d = m.dim();
    Vector s(d);
    s[0] = 1.0;
    for (int j = 0; j + 1 < d; ++j) {
        if (!(m.super[j] > 0.0 && m.sub[j] > 0.0))
            throw DomainError("symmetrizing scale needs positive off-diagonal entries");
        s[j + 1] = s[j] * std::sqrt(m.sub[j] / m.super[j]);
    }
    return s;
}

double psi_prime_bound(const ModelParams& p) {
    const double r0 = p.r0();
    return p.n() * (r0 - 1.0) / (r0 * r0);
}

ThresholdCertificate threshold_certificate(const ModelParams& p) {
    const double a = 2.0 * p.kk() + p.delta1();
    const double d1 = p.delta1(), d2 = p.delta2(), e2 = p.eps2(), r0 = p.r0();
    ThresholdCertificate out;
    out.lhs = -psi_prime(p, 1.0);
    out.rhs = (e2 * a + 1.0) * (e2 * d2 * (a + d2) + d1 + d2) / (2.0 * e2 * r0 * d1 * d2);
    out.margin = out.rhs - out.lhs;
    const double band = hurwitz_band * std::max(std::abs(out.lhs), std::abs(out.rhs));
    if (out.margin > band)
        out.verdict = Certificate::stable_certified;
    else if (out.margin < -band)
        out.verdict = Certificate::unstable_certified;
    else
        out.verdict = Certificate::indeterminate;
    return out;
}

double min_unstable_r0(int n) {
    if (n <= 4) throw DomainError("no instability possible for n <= 4");
    return static_cast<double>(n) / (n - 4);
}

StabilityReport analyze(Variant v, const ModelParams& p) {
    StabilityReport r;
    r.variant = v;
    r.steady_state = steady_state(p, v);
    auto analytic = jacobian_analytic(v, p, r.steady_state.values);
    r.jacobian = analytic ? *analytic : jacobian_fd(v, p, r.steady_state);
    r.jacobian_eigenvalues = eigenvalues(r.jacobian);
    r.eigen_verdict = eigen_verdict(r.jacobian_eigenvalues);

    std::ostringstream notes;
    notes << (analytic ? "analytic Jacobian" : "finite-difference Jacobian");
    switch (v) {
    case Variant::full:
        if (p.n() == 1) r.char_poly = charpoly_full_n1(p);
        break;
    case Variant::no_dimers:
        if (p.n() == 1) r.char_poly = charpoly_nodimers_n1(p);
        break;
    case Variant::with_dimers:
        r.char_poly = charpoly_withdimers(p);
        r.threshold = threshold_certificate(p);
        break;
    case Variant::classical:
        r.char_poly = charpoly_classical(p);
        break;
    }
    if (r.char_poly) {
        r.hurwitz_verdict = routh_hurwitz(*r.char_poly);
        if (v == Variant::full) notes << "; polynomial in eps2-rescaled time";
    } else {
        r.hurwitz_verdict = r.eigen_verdict;
        notes << "; no closed-form polynomial, verdict from eigenvalues";
    }
    r.notes = notes.str();
    return r;
}

namespace {

void assign(ParamValues& v, const std::string& key, double value) {
    if (key == "r0") {
        v.hill_r0 = value;
    } else if (key == "k" || key == "kk") {
        v.kk = value;
    } else if (key == "delta1") {
        v.delta1 = value;
    } else if (key == "delta2") {
        v.delta2 = value;
    } else if (key == "eps2") {
        v.eps2 = value;
    } else if (key == "eps1") {
        v.eps1 = value;
    } else if (key == "theta") {
        v.theta = value;
    } else {
        throw DomainError("unknown scan parameter '" + key + "' (expected r0, k, delta1, delta2, eps1, eps2, theta)");
    }
}

} // namespace

std::vector<ScanRow> scan(const ScanSpec& spec) {
    if (spec.count < 1) throw DomainError("scan grid needs at least one point");
    if (!std::isfinite(spec.lo) || !std::isfinite(spec.hi)) throw DomainError("scan bounds must be finite");
    ParamValues base = spec.base;
    for (const auto& [key, value] : spec.fixed) assign(base, key, value);

    std::vector<ScanRow> rows;
    rows.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i) {
        const double x = spec.count == 1 ? spec.lo : spec.lo + (spec.hi - spec.lo) * i / (spec.count - 1);
        ParamValues v = base;
        assign(v, spec.key, x);
        const ModelParams p(v);
        const auto ineq = threshold_certificate(p);
        const auto j = *jacobian_analytic(Variant::with_dimers, p, Vector::Ones(3));
        rows.push_back({x, ineq.lhs, ineq.rhs, ineq.verdict, max_real_part(eigenvalues(j))});
    }
    return rows;
}

} // namespace hes1
