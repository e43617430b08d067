#pragma once

#include "hes1/model.hpp"

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hes1 {

using Complex = std::complex<double>;

enum class Verdict { stable, unstable, marginal };
std::string_view to_string(Verdict v);

/// Monic polynomial, coefficients highest degree first: (1, a1, ..., ad).
struct CharPoly {
    std::vector<double> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    /// a_i, with a_0 = 1.
    double a(int i) const { return coeffs.at(static_cast<std::size_t>(i)); }
    double operator()(double lambda) const;
    /// Roots via the eigenvalues of the companion matrix.
    std::vector<Complex> roots() const;
};

/// Central-difference Jacobian of a variant's right-hand side.
Matrix jacobian_fd(Variant v, const ModelParams& p, const StateVector& s);

/// Quartic of the one-site full model after rescaling time by eps2; its
/// roots are the eigenvalues of eps2 * J at the steady state.
CharPoly charpoly_full_n1(const ModelParams& p);
/// Cubic of the one-site model without dimers.
CharPoly charpoly_nodimers_n1(const ModelParams& p);
/// Cubic of the with-dimers model at (1, 1, 1), any n.
CharPoly charpoly_withdimers(const ModelParams& p);
/// Quadratic of the classical model at (1, 1).
CharPoly charpoly_classical(const ModelParams& p);

/// Hurwitz quantities are treated as zero inside this relative band.
inline constexpr double hurwitz_band = 1e-12;
/// Eigenvalue real parts inside [-band, band] count as marginal.
inline constexpr double eigen_band = 1e-9;

/// Routh-Hurwitz test for degrees 2..4.
Verdict routh_hurwitz(const CharPoly& cp);

/// Verdict from eigenvalue real parts with the eigen_band tolerance.
Verdict eigen_verdict(const std::vector<Complex>& eigenvalues);
std::vector<Complex> eigenvalues(const Matrix& m);
double max_real_part(const std::vector<Complex>& eigenvalues);

/// Tridiagonal generator of the binding chain on (x_0..x_n) for a frozen
/// dimer level. Column sums vanish.
struct BindingMatrix {
    Vector diag;  ///< size n+1: -(k_j y2 + j gamma_j), k_n = 0
    Vector super; ///< size n: entry (j, j+1) = (j+1) gamma_{j+1}
    Vector sub;   ///< size n: entry (j+1, j) = k_j y2

    int dim() const { return static_cast<int>(diag.size()); }
    Matrix dense() const;
};

BindingMatrix binding_matrix(const ModelParams& p, double y2);

/// Leading principal minors det(A_j - lambda I), j = 0..n+1. The diagonal
/// must match the generator property (throws otherwise); it is evaluated in
/// a form that stays exact at lambda = 0.
std::vector<double> sturm_sequence(const BindingMatrix& m, double lambda);

/// Number of eigenvalues strictly greater than a. A member within rounding
/// of zero takes the sign opposite to the previous member.
int count_eigs_above(const BindingMatrix& m, double a);

/// Symmetric tridiagonal matrix with off-diagonal sqrt(super_j * sub_j).
Matrix symmetrized(const BindingMatrix& m);
/// Diagonal d of the similarity D^{-1} A D = symmetrized(A); requires all
/// off-diagonal entries positive.
Vector symmetrizing_scale(const BindingMatrix& m);

/// n (r0 - 1) / r0^2, an upper bound on -psi'(1).
double psi_prime_bound(const ModelParams& p);

enum class Certificate { stable_certified, unstable_certified, indeterminate };
std::string_view to_string(Certificate c);

struct ThresholdCertificate {
    Certificate verdict;
    double lhs;    ///< -psi'(1)
    double rhs;    ///< threshold built from k, delta1, delta2, eps2, r0
    double margin; ///< rhs - lhs
};

/// Compares -psi'(1) with the with-dimers Hurwitz threshold.
ThresholdCertificate threshold_certificate(const ModelParams& p);

/// n / (n - 4): smallest r0 giving instability in the boundary case
/// eps2 = delta1 = delta2 = 1, k = 0 with the Hill form. Throws for n <= 4.
double min_unstable_r0(int n);

struct StabilityReport {
    Variant variant;
    StateVector steady_state;
    Matrix jacobian;
    std::vector<Complex> jacobian_eigenvalues;
    Verdict eigen_verdict;
    Verdict hurwitz_verdict;
    std::optional<CharPoly> char_poly;
    std::optional<ThresholdCertificate> threshold;
    std::string notes;
};

/// Linearization at the positive steady state. Uses the analytic Jacobian
/// where one exists.
StabilityReport analyze(Variant v, const ModelParams& p);

/// One row of a parameter scan of the with-dimers steady state.
struct ScanRow {
    double value; ///< grid coordinate
    double neg_psi_prime;
    double threshold;
    Certificate verdict;
    double max_real_eigenvalue;
};

/// Grid over one parameter of the with-dimers model. Keys: r0 (selects the
/// Hill form of degree n), k, delta1, delta2, eps2, theta.
struct ScanSpec {
    std::string key;
    double lo = 0.0;
    double hi = 1.0;
    int count = 2;
    /// Base parameters; when key or fixed contains r0 the Hill form is used.
    ParamValues base;
    std::vector<std::pair<std::string, double>> fixed;
};

std::vector<ScanRow> scan(const ScanSpec& spec);

} // namespace hes1
