#include "support.hpp"

#include "hes1/integrator.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace hes1;

namespace {

OdeSystem decay() {
    OdeSystem s;
    s.dim = 1;
    s.rhs = [](const Vector& y, Vector& out) { out = -y; };
    return s;
}

IntegratorConfig config(Method m, double t_end, double dt = 0.1, double rtol = 1e-8, double atol = 1e-10) {
    IntegratorConfig c;
    c.method = m;
    c.t_end = t_end;
    c.sample_dt = dt;
    c.rel_tol = rtol;
    c.abs_tol = atol;
    return c;
}

constexpr Method both[] = {Method::explicit_embedded, Method::implicit_stiff};

} // namespace

TEST_CASE("configuration validation") {
    IntegratorConfig c;
    CHECK_NOTHROW(c.validate());
    c.rel_tol = 0.1;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.abs_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.sample_dt = 2 * c.t_end;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.max_steps = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    CHECK(parse_method("explicit") == Method::explicit_embedded);
    CHECK(parse_method("implicit") == Method::implicit_stiff);
    CHECK_THROWS_AS(parse_method("euler"), DomainError);
}

TEST_CASE("output grid") {
    const auto g = output_grid(1.0, 0.3);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    const auto h = output_grid(200.0, 0.1);
    CHECK(h.size() == 2001);
    CHECK(h.back() == 200.0);
}

TEST_CASE("exponential decay") {
    for (auto m : both) {
        const auto traj = integrate(decay(), Vector::Ones(1), config(m, 1.0, 0.25));
        CHECK(traj.times.back() == 1.0);
        CHECK(std::abs(traj.final_values()[0] - std::exp(-1.0)) <= 1e-8 * std::exp(-1.0));
        CHECK(traj.n_steps_accepted > 0);
        CHECK_FALSE(traj.variant.has_value());
    }
}

TEST_CASE("classical model relaxes to (1, 1)") {
    ParamValues v; // n = 1, gamma1 = 1, delta1 = delta2 = 1
    const ModelParams p(v);
    StateVector s0{Variant::classical, Vector(2)};
    s0.values << 2.0, 0.0;
    for (auto m : both) {
        const auto traj = integrate(p, s0, config(m, 200.0));
        CHECK((traj.final_values() - Vector::Ones(2)).norm() <= 1e-6);
        CHECK(traj.final_state().variant == Variant::classical);
    }
}

TEST_CASE("all variants settle with the n = 3 parameters") {
    const auto p = preset("par-n3");
    for (auto v : all_variants) {
        const auto traj = integrate(p, default_initial_state(v, 3), config(Method::implicit_stiff, 500.0, 0.5));
        const auto ss = steady_state(p, v);
        CHECK((traj.final_values() - ss.values).lpNorm<Eigen::Infinity>() <= 1e-5);
    }
}

TEST_CASE("explicit and implicit agree on non-stiff runs") {
    const auto p = preset("par-n3");
    for (auto v : all_variants) {
        const auto s0 = default_initial_state(v, 3);
        const auto a = integrate(p, s0, config(Method::explicit_embedded, 50.0, 0.5));
        const auto b = integrate(p, s0, config(Method::implicit_stiff, 50.0, 0.5));
        double worst = 0.0;
        for (std::size_t i = 0; i < a.states.size(); ++i)
            worst = std::max(worst, (a.states[i] - b.states[i]).lpNorm<Eigen::Infinity>());
        CHECK(worst <= 100 * 1e-8 * 10);
    }
}

TEST_CASE("halving tolerances moves the result by less than the coarse tolerance") {
    const auto p = preset("par-n5");
    const auto s0 = default_initial_state(Variant::full, 5);
    for (auto m : both) {
        const auto coarse = integrate(p, s0, config(m, 50.0, 1.0, 1e-7, 1e-9));
        const auto fine = integrate(p, s0, config(m, 50.0, 1.0, 5e-8, 5e-10));
        const Vector d = coarse.final_values() - fine.final_values();
        for (Eigen::Index i = 0; i < d.size(); ++i)
            CHECK(std::abs(d[i]) <= 1e-7 * std::abs(fine.final_values()[i]) + 1e-9 + 1e-7);
    }
}

TEST_CASE("analytic and finite-difference Jacobians give the same trajectory") {
    const auto p = preset("par-common").with_eps(1e-3, 1e-2);
    const auto s0 = default_initial_state(Variant::full, 1);
    const auto a = integrate(p, s0, config(Method::implicit_stiff, 100.0, 1.0), false);
    const auto b = integrate(p, s0, config(Method::implicit_stiff, 100.0, 1.0), true);
    CHECK((a.final_values() - b.final_values()).lpNorm<Eigen::Infinity>() <= 1e-7);
}

TEST_CASE("stiff integrator handles eps = 1e-6") {
    const auto p = preset("par-n3").with_eps(1e-6, 1e-6);
    const auto traj = integrate(p, default_initial_state(Variant::full, 3), config(Method::implicit_stiff, 500.0, 1.0));
    CHECK(traj.n_steps_accepted + traj.n_steps_rejected <= 1'000'000);
    CHECK((traj.final_values() - steady_state(p, Variant::full).values).lpNorm<Eigen::Infinity>() <= 1e-5);
}

TEST_CASE("step budget exhaustion reports the time") {
    const auto p = preset("par-n3").with_eps(1e-6, 1e-6);
    auto cfg = config(Method::explicit_embedded, 10.0);
    cfg.max_steps = 2000;
    try {
        integrate(p, default_initial_state(Variant::full, 3), cfg);
        FAIL("expected an IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.time >= 0.0);
        CHECK(e.time < 10.0);
        CHECK(std::string(e.what()).find("max_steps") != std::string::npos);
    }
}

TEST_CASE("finite-time blow-up is reported") {
    OdeSystem s;
    s.dim = 1;
    s.rhs = [](const Vector& y, Vector& out) { out = y.array().square(); };
    for (auto m : both) {
        try {
            integrate(s, Vector::Ones(1), config(m, 2.0, 0.5));
            FAIL("expected an IntegrationError");
        } catch (const IntegrationError& e) {
            CHECK(e.time == doctest::Approx(1.0).epsilon(1e-2));
        }
    }
}

TEST_CASE("invalid initial data") {
    const auto p = preset("par-n3");
    StateVector bad{Variant::full, Vector::Zero(6)};
    bad.values[0] = 1.5;
    CHECK_THROWS_AS(integrate(p, bad, IntegratorConfig{}), DomainError);
    CHECK_THROWS_AS(integrate(decay(), Vector::Ones(2), IntegratorConfig{}), DomainError);
}

TEST_CASE("finite-difference Jacobian of a linear map is exact") {
    Matrix a(2, 2);
    a << 1.0, -2.0, 0.5, 3.0;
    const auto j = finite_difference_jacobian([&](const Vector& y, Vector& out) { out = a * y; }, Vector::Ones(2));
    CHECK((j - a).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("CSV export") {
    const auto traj = integrate(decay(), Vector::Ones(1), config(Method::implicit_stiff, 1.0, 0.5));
    std::ostringstream os;
    write_csv(os, traj, {"y"});
    const std::string s = os.str();
    CHECK(s.rfind("t,y\n0,1\n0.5,", 0) == 0);
    CHECK(s.find("\n0.5,0.606530") != std::string::npos);
    CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}

TEST_CASE("trajectories stay in the admissible region") {
    const auto p = preset("par-n5");
    const auto region = invariant_region(p);
    const auto traj = integrate(p, default_initial_state(Variant::full, 5), config(Method::implicit_stiff, 200.0, 0.5));
    for (std::size_t i = 0; i < traj.states.size(); ++i) CHECK(region.contains(traj.state(i), 5, 1e-7));
}

TEST_CASE("oscillation classifier on synthetic signals") {
    std::vector<double> t, sine, damped, ramp;
    const double end = 50 * std::numbers::pi;
    for (int i = 0; i <= 20000; ++i) {
        const double ti = end * i / 20000;
        t.push_back(ti);
        sine.push_back(std::sin(ti));
        ramp.push_back(1.0 - std::exp(-ti));
    }
    const auto s = detect_oscillation(t, sine, 0.2);
    CHECK(s.kind == OscillationKind::sustained);
    CHECK(s.amplitude == doctest::Approx(2.0).epsilon(0.01));
    CHECK(s.period == doctest::Approx(2 * std::numbers::pi).epsilon(0.01));
    CHECK(detect_oscillation(t, ramp, 0.2).kind == OscillationKind::monotone);
    CHECK(std::isnan(detect_oscillation(t, ramp, 0.2).period));

    std::vector<double> td;
    for (int i = 0; i <= 3000; ++i) {
        td.push_back(30.0 * i / 3000);
        damped.push_back(std::exp(-td.back()) * std::sin(td.back()));
    }
    CHECK(detect_oscillation(td, damped, 0.0).kind == OscillationKind::damped);

    SUBCASE("time shift and joint rescaling do not change the verdict") {
        std::vector<double> shifted = t, scaled = sine;
        for (double& x : shifted) x += 123.0;
        for (double& x : scaled) x *= 1e-3;
        const auto a = detect_oscillation(shifted, sine, 0.2);
        CHECK(a.kind == s.kind);
        CHECK(a.period == doctest::Approx(s.period));
        const auto b = detect_oscillation(t, scaled, 0.2, 1e-6);
        CHECK(b.kind == s.kind);
        CHECK(b.amplitude == doctest::Approx(s.amplitude * 1e-3));
        std::vector<double> td_shift = td;
        for (double& x : td_shift) x -= 7.0;
        CHECK(detect_oscillation(td_shift, damped, 0.0).kind == OscillationKind::damped);
    }
    SUBCASE("small ripple stays below the threshold") {
        std::vector<double> ripple = sine;
        for (double& x : ripple) x = 1.0 + 1e-5 * x;
        CHECK(detect_oscillation(t, ripple, 0.2).kind == OscillationKind::monotone);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(detect_oscillation(std::vector<double>{0, 1}, std::vector<double>{0, 1}, 0.0), DomainError);
        CHECK_THROWS_AS(detect_oscillation(t, sine, 1.0), DomainError);
        CHECK_THROWS_AS(detect_oscillation(t, std::vector<double>{1.0}, 0.0), DomainError);
    }
}
