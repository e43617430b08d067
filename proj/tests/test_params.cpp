#include "support.hpp"

#include "hes1/params.hpp"

#include <doctest.h>

#include <cmath>

using namespace hes1;

namespace {

// Real root of q^3 + q - 1 = 0 by Cardano's formula.
double cubic_root() {
    const double s = std::sqrt(0.25 + 1.0 / 27.0);
    return std::cbrt(0.5 + s) + std::cbrt(0.5 - s);
}

} // namespace

TEST_CASE("r0 follows the occupancy polynomial") {
    ParamValues v;
    v.n = 3;
    v.k_binding = {1.0, 1.5, 1.5};
    v.gamma = {1.0, 0.5, 0.5};
    const ModelParams p(v);
    CHECK(p.r0() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(p.occupancy_coeffs()[0] == doctest::Approx(1.0));
    CHECK(p.occupancy_coeffs()[1] == doctest::Approx(1.5));
    CHECK(p.occupancy_coeffs()[2] == doctest::Approx(1.5));
    CHECK(p.theta_gamma() == doctest::Approx(1.0 * (1.0 + 2 * 0.5 + 3 * 0.5)));
}

TEST_CASE("supplied r0 is checked against the chain") {
    ParamValues v;
    v.r0 = 2.0;
    CHECK_NOTHROW(ModelParams{v});
    v.r0 = 2.0 * (1 + 5e-13);
    CHECK_NOTHROW(ModelParams{v});
    v.r0 = 2.0 * (1 + 1e-10);
    CHECK_THROWS_AS(ModelParams{v}, DomainError);
}

TEST_CASE("parameter validation") {
    ParamValues v;
    SUBCASE("k0 must be one") {
        v.k_binding = {2.0};
        CHECK_THROWS_AS(ModelParams{v}, DomainError);
    }
    SUBCASE("array sizes") {
        v.n = 2;
        CHECK_THROWS_AS(ModelParams{v}, DomainError);
    }
    SUBCASE("negative rate") {
        v.delta1 = -1.0;
        CHECK_THROWS_AS(ModelParams{v}, DomainError);
    }
    SUBCASE("zero dissociation") {
        v.gamma = {0.0};
        CHECK_THROWS_AS(ModelParams{v}, DomainError);
    }
    SUBCASE("non-finite") {
        v.eps2 = std::nan("");
        CHECK_THROWS_AS(ModelParams{v}, DomainError);
    }
    SUBCASE("kk may vanish") {
        v.kk = 0.0;
        CHECK_NOTHROW(ModelParams{v});
    }
}

TEST_CASE("no binding sites") {
    ParamValues v;
    v.n = 0;
    v.k_binding.clear();
    v.gamma.clear();
    const ModelParams p(v);
    CHECK(p.r0() == 1.0);
    CHECK(p.theta_gamma() == 0.0);
}

TEST_CASE("Hill form") {
    const auto p = ModelParams::hill(5, 10.0, 1e-6, 1.0, 1.0);
    CHECK(p.psi_form() == PsiForm::hill);
    CHECK(p.r0() == 10.0);
    CHECK(p.occupancy_coeffs().size() == 5);
    CHECK(p.occupancy_coeffs()[4] == 9.0);
    CHECK(p.occupancy_coeffs()[0] == 0.0);
    CHECK_THROWS_AS(p.theta_gamma(), DomainError);
    CHECK_THROWS_AS(ModelParams::hill(5, 1.0, 0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(ModelParams::hill(0, 2.0, 0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("copies with modified fields revalidate") {
    const auto p = preset("par-n3");
    const auto q = p.with_eps(1e-3, 2.0);
    CHECK(q.eps1() == 1e-3);
    CHECK(q.eps2() == 2.0);
    CHECK(q.r0() == p.r0());
    CHECK(p.with_kk(0.0).kk() == 0.0);
    CHECK_THROWS_AS(p.with_rates(0.0, 1.0), DomainError);
    CHECK(p.with_theta(3.0).theta() == 3.0);
}

TEST_CASE("nondimensionalization: all rates one") {
    DimensionalParams d;
    const auto nd = derive_nondimensional(d);
    const double q = cubic_root();
    CHECK(nd.q == doctest::Approx(q).epsilon(1e-14));
    CHECK(nd.q == doctest::Approx(0.6823).epsilon(1e-4));
    CHECK(nd.params.k_binding(0) == 1.0);
    CHECK(nd.params.gamma(1) == doctest::Approx(1.0 / (q * q)).epsilon(1e-13));
    CHECK(nd.params.gamma(1) == doctest::Approx(2.1479).epsilon(1e-4));
    CHECK(nd.params.r0() == doctest::Approx(1.0 / q).epsilon(1e-13));
    CHECK(nd.params.r0() == doctest::Approx(1.4656).epsilon(1e-4));
    CHECK(nd.params.kk() == doctest::Approx(2.0 / q));
    CHECK(nd.residual < 1e-14);
}

TEST_CASE("nondimensionalization: scale ratio one half gives q = 1") {
    DimensionalParams d;
    d.delta_y = 1.0;
    d.delta_z = 0.5;
    const auto nd = derive_nondimensional(d);
    CHECK(nd.q == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(nd.params.r0() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(nd.params.delta1() == doctest::Approx(1.0));
    CHECK(nd.params.delta2() == doctest::Approx(0.5));
}

TEST_CASE("nondimensionalization satisfies the r0 identity for random inputs") {
    testing::Draw draw(11);
    for (int trial = 0; trial < 500; ++trial) {
        DimensionalParams d;
        d.n = draw.integer(1, 6);
        d.k_dim.clear();
        d.gamma_dim.clear();
        for (int j = 0; j < d.n; ++j) {
            d.k_dim.push_back(draw.log_uniform());
            d.gamma_dim.push_back(draw.log_uniform());
        }
        d.k_y = draw.log_uniform();
        d.gamma_y = draw.log_uniform();
        d.r_y = draw.log_uniform();
        d.r_z = draw.log_uniform();
        d.delta_y = draw.log_uniform();
        d.delta_z = draw.log_uniform();
        // The constructor rejects r0 mismatches beyond 1e-12 relative.
        const auto nd = derive_nondimensional(d);
        CHECK(nd.q > 0.0);
        CHECK(nd.params.k_binding(0) == 1.0);
    }
}

TEST_CASE("dimensional validation") {
    DimensionalParams d;
    d.r_y = 0.0;
    CHECK_THROWS_AS(derive_nondimensional(d), DomainError);
}

TEST_CASE("presets") {
    CHECK(preset("par-common").r0() == doctest::Approx(2.0));
    CHECK(preset("par-n3").r0() == doctest::Approx(5.0));
    const auto p5 = preset("par-n5");
    CHECK(p5.n() == 5);
    CHECK(p5.r0() == doctest::Approx(1 + 0.5 + 0.5 + 0.5 + 0.5 + 70.0));
    CHECK(preset("par-n9").n() == 9);
    CHECK(preset("par-n9-eps005").eps1() == 0.05);
    CHECK_THROWS_AS(preset("par-n7"), DomainError);
    CHECK(preset_names().size() == 5);
}
