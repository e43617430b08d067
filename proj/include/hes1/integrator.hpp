#pragma once

#include "hes1/model.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hes1 {

enum class Method {
    explicit_embedded, ///< Dormand-Prince 5(4) with PI step control
    implicit_stiff     ///< Rodas4 (L-stable Rosenbrock, embedded order 3)
};

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double t_end = 100.0;
    long max_steps = 1'000'000;
    Method method = Method::implicit_stiff;
    double sample_dt = 0.1;

    void validate() const;
};

/// Integration failure (step budget exhausted, non-finite state, step
/// size underflow). Carries the time at which it happened.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

/// A first-order autonomous system y' = f(y) with optional analytic Jacobian.
struct OdeSystem {
    int dim = 0;
    std::function<void(const Vector&, Vector&)> rhs;
    std::function<void(const Vector&, Matrix&)> jacobian; ///< may be empty
};

/// Solution sampled on a uniform grid 0, dt, 2 dt, ..., t_end.
struct Trajectory {
    std::optional<Variant> variant;
    std::vector<double> times;
    std::vector<Vector> states;
    long n_steps_accepted = 0;
    long n_steps_rejected = 0;

    const Vector& final_values() const { return states.back(); }
    StateVector final_state() const;
    StateVector state(std::size_t i) const;
    /// One component as a time series.
    std::vector<double> component(std::size_t index) const;
};

/// The uniform output grid; the last point is exactly t_end.
std::vector<double> output_grid(double t_end, double sample_dt);

/// Central-difference Jacobian with step max(1e-7, 1e-7 |y_i|) per column.
Matrix finite_difference_jacobian(const std::function<void(const Vector&, Vector&)>& f, const Vector& y);

Trajectory integrate(const OdeSystem& sys, const Vector& y0, const IntegratorConfig& cfg);

/// Integrates one model variant. The Jacobian is taken by finite differences
/// unless `analytic_jacobian` is set and an analytic form exists.
Trajectory integrate(const ModelParams& p, const StateVector& s0, const IntegratorConfig& cfg,
                     bool analytic_jacobian = false);

OdeSystem model_system(const ModelParams& p, Variant v, bool analytic_jacobian = false);

/// CSV with header "t,<names>" and 15 significant digits.
void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& names);
void write_csv(const std::string& path, const Trajectory& traj, const std::vector<std::string>& names);

enum class OscillationKind { sustained, damped, monotone };
std::string_view to_string(OscillationKind k);

struct OscillationReport {
    OscillationKind kind = OscillationKind::monotone;
    double amplitude = 0.0;  ///< mean of the last three peak-to-trough swings
    double period = 0.0;     ///< mean spacing of maxima, NaN with fewer than two
    std::size_t n_peaks = 0; ///< local maxima in the analysed window
};

inline constexpr double default_amp_threshold = 1e-3;
inline constexpr double default_transient_fraction = 0.5;

/// Classifies the tail of a time series as a sustained, damped or absent
/// oscillation. The first `transient_fraction` of the time span is dropped.
OscillationReport detect_oscillation(std::span<const double> times, std::span<const double> values,
                                     double transient_fraction = default_transient_fraction,
                                     double amp_threshold = default_amp_threshold);

OscillationReport detect_oscillation(const Trajectory& traj, double transient_fraction, std::size_t component,
                                     double amp_threshold = default_amp_threshold);

} // namespace hes1
