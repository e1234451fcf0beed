#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlq/dispersion.hpp"
#include "support.hpp"

using namespace nlq;
using namespace nlq::testing;

namespace {

HamiltonianSpec kinetic_spec() {
    HamiltonianSpec h;
    h.terms.push_back(TermSpec::kinetic());
    return h;
}

const std::vector<int> kModes = {1, 2, 3, 4, 5, 6, 7, 8};

}  // namespace

TEST_CASE("linear kinetic dispersion is k^2/2") {
    GridPtr g = make_grid(1, 256, 20.0);
    auto samples = extract_dispersion(kinetic_spec(), g, kModes, {0.5, 0.0});
    for (const auto& s : samples) {
        CHECK(std::abs(s.omega - 0.5 * s.k * s.k) <= 1e-6 * std::abs(s.omega));
    }
}

TEST_CASE("DG leaves plane-wave dispersion untouched") {
    GridPtr g = make_grid(1, 256, 20.0);
    HamiltonianSpec dg = kinetic_spec();
    dg.terms.push_back(TermSpec::dg_imag());
    dg.constants.D = 0.05;
    auto lin = extract_dispersion(kinetic_spec(), g, kModes, {0.5, 0.0});
    auto with_dg = extract_dispersion(dg, g, kModes, {0.5, 0.0});
    for (std::size_t i = 0; i < lin.size(); ++i) {
        CHECK(std::abs(with_dg[i].omega - lin[i].omega) <=
              1e-6 * std::abs(lin[i].omega));
    }
}

TEST_CASE("BBM shifts the dispersion by a constant set by the amplitude") {
    GridPtr g = make_grid(1, 256, 20.0);
    HamiltonianSpec bbm = kinetic_spec();
    bbm.terms.push_back(TermSpec::bbm_log());
    bbm.constants.p_bbm = 0.1;
    auto samples = extract_dispersion(bbm, g, kModes, {0.5, 0.0});
    const double shift = 0.1 * std::log(1.0 / std::sqrt(20.0));  // p ln(L^{-1/2})
    for (const auto& s : samples) {
        CHECK(std::abs(s.omega - (0.5 * s.k * s.k + shift)) <= 1e-6);
    }
}

TEST_CASE("extraction is stable under halving the probe window") {
    GridPtr g = make_grid(1, 256, 20.0);
    auto full = extract_dispersion(kinetic_spec(), g, std::vector<int>{3}, {0.5, 0.0});
    auto half = extract_dispersion(kinetic_spec(), g, std::vector<int>{3}, {0.25, 0.0});
    CHECK(std::abs(full[0].omega - half[0].omega) <= 1e-8 * std::abs(full[0].omega));
}

TEST_CASE("non-eigenmodes are rejected by the shape guard") {
    GridPtr g = make_grid(1, 256, 20.0);
    HamiltonianSpec h = kinetic_spec();
    RealField v(g);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 0.5 * std::cos(2.0 * kPi * g->coordinate(g->index_along(i, 0)) / 20.0);
    }
    h.terms.push_back(TermSpec::potential_term(v));
    CHECK_THROWS_AS(static_cast<void>(extract_dispersion(h, g, std::vector<int>{2}, {0.5, 0.0})),
                    NotPlaneWaveError);
}

TEST_CASE("cubic fit of dispersion samples") {
    GridPtr g = make_grid(1, 256, 20.0);

    SUBCASE("linear samples: c2 = 1/2, c3 = 0") {
        auto samples = extract_dispersion(kinetic_spec(), g, kModes, {0.5, 0.0});
        DispersionFit fit = fit_dispersion(samples);
        CHECK(std::abs(fit.c[2] - 0.5) <= 1e-6);
        CHECK(std::abs(fit.c[3]) <= 1e-8);
    }

    SUBCASE("constant-shift samples keep c3 = 0 and pick up c0") {
        HamiltonianSpec bbm = kinetic_spec();
        bbm.terms.push_back(TermSpec::bbm_log());
        bbm.constants.p_bbm = 0.1;
        auto samples = extract_dispersion(bbm, g, kModes, {0.5, 0.0});
        DispersionFit fit = fit_dispersion(samples);
        CHECK(std::abs(fit.c[0] - 0.1 * std::log(1.0 / std::sqrt(20.0))) <= 1e-5);
        CHECK(std::abs(fit.c[3]) <= 1e-8);
    }

    SUBCASE("too few distinct |k| values") {
        std::vector<DispersionSample> few = {{1.0, 0.5, 1.0}, {2.0, 2.0, 1.0},
                                             {3.0, 4.5, 1.0}, {1.0, 0.5, 1.0},
                                             {2.0, 2.0, 1.0}};
        CHECK_THROWS_AS(static_cast<void>(fit_dispersion(few)), std::invalid_argument);
    }
}

TEST_CASE("modified dispersion relation") {
    SUBCASE("kappa = 0 reduces to the standard relation") {
        CHECK(modified_dispersion_energy(2.0, 3.0, 0.0, 1e-3) ==
              doctest::Approx(std::sqrt(13.0)).epsilon(1e-14));
    }

    SUBCASE("massless, kappa = 0: E = p") {
        CHECK(modified_dispersion_energy(0.0, 1.7, 0.0, 1e-3) ==
              doctest::Approx(1.7).epsilon(1e-14));
    }

    SUBCASE("negative E^2 is an error") {
        CHECK_THROWS_AS(
            static_cast<void>(modified_dispersion_energy(0.0, 10.0, -1.0, 1.0)),
            std::domain_error);
    }

    SUBCASE("synthetic samples refit the generating kappa within 1%") {
        std::vector<double> momenta;
        for (int i = 0; i < 12; ++i) momenta.push_back(0.1 + 0.9 * i / 11.0);
        auto samples = modified_dispersion_samples(1.0, 1.0, 1e-3, momenta);
        ModifiedDispersionRefit refit = refit_modified_dispersion(samples, 1e-3);
        CHECK(std::abs(refit.kappa - 1.0) <= 0.01);
        CHECK(refit.c2 == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(refit.mass_sq == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("planck ratio reproduces the reference scale") {
        CHECK(std::abs(planck_ratio() / 3.17e7 - 1.0) <= 0.01);
        CHECK(planck_ratio(1e28, 1e21) == doctest::Approx(1e7));
    }
}
