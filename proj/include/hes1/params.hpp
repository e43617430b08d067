#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hes1 {

/// Raised when an input violates a documented precondition (invalid
/// parameters, states outside the admissible region, unsupported sizes).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// How the repression function psi(y2) = 1 / (1 + q(y2)) is built.
enum class PsiForm {
    binding, ///< q from the binding chain: q(y) = sum_j (1/j!) (k_0..k_{j-1})/(gamma_1..gamma_j) y^j
    hill     ///< q(y) = (r0 - 1) y^n, the single-term (Hill) limit
};

/// Unvalidated nondimensional parameter values, as read from a config file.
struct ParamValues {
    int n = 1;
    std::vector<double> k_binding{1.0}; ///< k_0..k_{n-1}; k_0 must be 1
    std::vector<double> gamma{1.0};     ///< gamma_1..gamma_n
    double kk = 0.0;                    ///< dimer coupling k in the y1 equation
    double delta1 = 1.0;
    double delta2 = 1.0;
    double theta = 1.0;
    double eps1 = 1.0;
    double eps2 = 1.0;
    /// Optional externally supplied r0; checked against the derived value.
    std::optional<double> r0;
    /// When set, selects the Hill form with this r0; k_binding and gamma are
    /// then ignored.
    std::optional<double> hill_r0;
};

/// Validated nondimensional parameters of the full model and its reductions.
///
/// r0 is always derived from the binding chain (or given directly for the
/// Hill form); the scaling then places the positive steady state at
/// y1 = y2 = z = 1.
class ModelParams {
public:
    explicit ModelParams(const ParamValues& values);

    /// Parameters whose repression function is psi(y) = 1 / (1 + (r0 - 1) y^n).
    /// Only the with-dimers and classical models are defined for this form.
    static ModelParams hill(int n, double r0, double kk, double delta1, double delta2,
                            double theta = 1.0, double eps1 = 1.0, double eps2 = 1.0);

    int n() const { return n_; }
    PsiForm psi_form() const { return form_; }

    /// k_j for 0 <= j < n.
    double k_binding(int j) const { return k_[static_cast<std::size_t>(j)]; }
    /// gamma_j for 1 <= j <= n.
    double gamma(int j) const { return gamma_[static_cast<std::size_t>(j - 1)]; }
    std::span<const double> k_binding() const { return k_; }
    std::span<const double> gammas() const { return gamma_; }

    double kk() const { return kk_; }
    double delta1() const { return delta1_; }
    double delta2() const { return delta2_; }
    double theta() const { return theta_; }
    double eps1() const { return eps1_; }
    double eps2() const { return eps2_; }
    double r0() const { return r0_; }

    /// Coefficients c_1..c_n of q(y) = sum_j c_j y^j (index 0 holds c_1).
    std::span<const double> occupancy_coeffs() const { return coeffs_; }

    /// theta * sum_j j gamma_j. Requires the binding form.
    double theta_gamma() const;

    bool has_binding_chain() const { return form_ == PsiForm::binding; }

    ParamValues values() const;

    ModelParams with_eps(double eps1, double eps2) const;
    ModelParams with_kk(double kk) const;
    ModelParams with_rates(double delta1, double delta2) const;
    ModelParams with_theta(double theta) const;

private:
    ModelParams() = default;
    void validate_scalars() const;

    int n_ = 0;
    PsiForm form_ = PsiForm::binding;
    std::vector<double> k_;
    std::vector<double> gamma_;
    std::vector<double> coeffs_;
    double kk_ = 0.0;
    double delta1_ = 1.0;
    double delta2_ = 1.0;
    double theta_ = 1.0;
    double eps1_ = 1.0;
    double eps2_ = 1.0;
    double r0_ = 1.0;
};

/// Occupancy polynomial coefficients c_j = (1/j!) prod_{i<j} k_i / prod_{i<=j} gamma_i.
std::vector<double> occupancy_coefficients(std::span<const double> k_binding,
                                           std::span<const double> gamma);

/// Dimensional rate constants of the binding/dimer/expression model.
struct DimensionalParams {
    int n = 1;
    std::vector<double> k_dim{1.0};     ///< binding rates k_0..k_{n-1}
    std::vector<double> gamma_dim{1.0}; ///< dissociation rates gamma_1..gamma_n
    double k_y = 1.0;                   ///< dimer formation
    double gamma_y = 1.0;               ///< dimer dissociation
    double r_y = 1.0;                   ///< protein production
    double r_z = 1.0;                   ///< mRNA production
    double delta_y = 1.0;               ///< protein degradation
    double delta_z = 1.0;               ///< mRNA degradation

    void validate() const;
};

struct Nondimensionalization {
    ModelParams params;
    double q;        ///< positive root of the scale equation
    double residual; ///< |lhs - rhs| of the scale equation at q
};

/// Solves the scale equation for q and applies the scaling table.
Nondimensionalization derive_nondimensional(const DimensionalParams& p);

/// Named parameter sets: "par-common", "par-n3", "par-n5", "par-n9",
/// "par-n9-eps005".
ModelParams preset(const std::string& name);
std::vector<std::string> preset_names();

} // namespace hes1
