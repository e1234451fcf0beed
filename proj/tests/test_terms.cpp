#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlq/terms.hpp"
#include "support.hpp"

using namespace nlq;
using namespace nlq::testing;

namespace {
PhysicalConstants defaults() { return PhysicalConstants{}; }
}  // namespace

TEST_CASE("physical constants guards") {
    PhysicalConstants c;
    CHECK_NOTHROW(c.validate());
    c.amplitude_floor = 1e-3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = PhysicalConstants{};
    c.mass = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("dg functional on eigenstructures") {
    GridPtr g = make_grid(1, 256, 20.0);
    PhysicalConstants c = defaults();

    SUBCASE("plane wave: N psi = k^2 psi") {
        ComplexField e = plane_wave(g, 6);
        const double k = 2.0 * kPi * 6 / 20.0;
        ComplexField n = dg_functional(e, c.amplitude_floor);
        ComplexField expect = Complex{k * k, 0.0} * e;
        CHECK(rel_l2_diff(n, expect) <= 1e-10);
    }

    SUBCASE("constant field maps to zero") {
        ComplexField cf(g);
        for (std::size_t i = 0; i < cf.size(); ++i) cf[i] = Complex{0.3, 0.4};
        CHECK(dg_functional(cf, c.amplitude_floor).norm() <= 1e-10);
    }

    SUBCASE("normalized gaussian: x^2 psi away from the tails") {
        ComplexField psi(g);
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double u = g->coordinate(g->index_along(i, 0)) - 10.0;
            psi[i] = std::exp(-u * u / 2.0) / std::pow(kPi, 0.25);
        }
        ComplexField n = dg_functional(psi, c.amplitude_floor);
        double worst = 0.0;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const double u = g->coordinate(g->index_along(i, 0)) - 10.0;
            if (std::abs(u) > 4.0) continue;
            worst = std::max(worst, std::abs(n[i] - u * u * psi[i]));
        }
        CHECK(worst <= 1e-6);
    }

    SUBCASE("identically zero field is rejected") {
        ComplexField z(g);
        CHECK_THROWS_AS(dg_functional(z, c.amplitude_floor), std::domain_error);
    }
}

TEST_CASE("apply_term catalog values") {
    GridPtr g = make_grid(1, 256, 20.0);
    PhysicalConstants c = defaults();
    c.D = 0.05;
    c.p_bbm = 0.3;
    c.q_kostin = 0.2;

    SUBCASE("DG vanishes exactly on plane waves") {
        ComplexField e = plane_wave(g, 5);
        ComplexField out = apply_term(TermSpec::dg_imag(), e, c);
        CHECK(out.norm() <= 1e-12 * e.norm());
    }

    SUBCASE("BBM vanishes on unit-modulus fields") {
        ComplexField f(g);
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = std::polar(1.0, 0.3 * g->coordinate(g->index_along(i, 0)));
        }
        ComplexField out = apply_term(TermSpec::bbm_log(), f, c);
        CHECK(out.norm() <= 1e-12 * f.norm());
    }

    SUBCASE("kinetic eigenvalue on plane waves") {
        ComplexField e = plane_wave(g, 7);
        const double k = 2.0 * kPi * 7 / 20.0;
        ComplexField out = apply_term(TermSpec::kinetic(), e, c);
        ComplexField expect = Complex{k * k / 2.0, 0.0} * e;
        CHECK(rel_l2_diff(out, expect) <= 1e-10);
    }

    SUBCASE("kostin on a constant-phase field") {
        ComplexField f(g);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(2.0, 0.8);
        ComplexField out = apply_term(TermSpec::kostin(), f, c);
        ComplexField expect = Complex{-2.0 * c.q_kostin * 0.8, 0.0} * f;
        CHECK(rel_l2_diff(out, expect) <= 1e-13);
    }

    SUBCASE("cubic pointwise") {
        ComplexField f = random_band_limited(g, 12, 5);
        ComplexField out = apply_term(TermSpec::cubic_nls(1.7), f, defaults());
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            worst = std::max(worst,
                             std::abs(out[i] - 1.7 * std::norm(f[i]) * f[i]));
        }
        CHECK(worst <= 1e-14);
    }

    SUBCASE("generic_r grad_ratio equals the dg functional") {
        ComplexField f = random_band_limited(g, 12, 6);
        ComplexField a = apply_term(TermSpec::generic_r("grad_ratio"), f, c);
        ComplexField b = dg_functional(f, c.amplitude_floor);
        CHECK(rel_l2_diff(a, b) <= 1e-14);
    }
}

TEST_CASE("homogeneity checks match declarations") {
    GridPtr g = make_grid(1, 128, 16.0);
    PhysicalConstants c = defaults();
    c.D = 0.05;
    c.p_bbm = 0.3;
    ComplexField psi = random_band_limited(g, 12, 11);

    SUBCASE("DG is degree-one homogeneous for complex z") {
        HomogeneityReport r =
            check_homogeneity(TermSpec::dg_imag(), psi, Complex{2.0, 3.0}, c);
        CHECK(r.residual <= 1e-10);
        CHECK(r.pass);
    }

    SUBCASE("BBM fails with the ln|z| residual") {
        HomogeneityReport r =
            check_homogeneity(TermSpec::bbm_log(), psi, Complex{2.0, 0.0}, c);
        // ||p ln2 z psi|| / ||z p ln|psi| psi||
        ComplexField lnpsi = apply_term(TermSpec::bbm_log(), psi, c);
        const double expect = c.p_bbm * std::log(2.0) * psi.norm() / lnpsi.norm();
        CHECK(r.residual == doctest::Approx(expect).epsilon(1e-6));
        CHECK(r.residual > 0.0);
        CHECK(r.pass);  // pass = behaves as declared (non-homogeneous)
    }

    SUBCASE("kinetic is linear") {
        HomogeneityReport r =
            check_homogeneity(TermSpec::kinetic(), psi, Complex{0.5, -1.25}, c);
        CHECK(r.residual <= 1e-12);
        CHECK(r.pass);
    }

    SUBCASE("zero z is rejected") {
        CHECK_THROWS_AS(check_homogeneity(TermSpec::kinetic(), psi, Complex{0.0, 0.0}, c),
                        std::invalid_argument);
    }
}

TEST_CASE("every catalog term is norm-preserving: Im(psi, T psi) = 0") {
    GridPtr g = make_grid(1, 128, 16.0);
    PhysicalConstants c = defaults();
    c.D = 0.07;
    c.p_bbm = 0.4;
    c.q_kostin = 0.3;
    RealField v(g);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::cos(2.0 * kPi * g->coordinate(g->index_along(i, 0)) / 16.0);
    }
    const TermSpec terms[] = {TermSpec::kinetic(),        TermSpec::potential_term(v),
                              TermSpec::dg_imag(),        TermSpec::bbm_log(),
                              TermSpec::kostin(),         TermSpec::cubic_nls(1.3),
                              TermSpec::generic_r("grad_ratio")};
    for (unsigned seed : {21u, 22u, 23u}) {
        ComplexField psi = random_band_limited(g, 14, seed);
        for (const TermSpec& t : terms) {
            ComplexField out = apply_term(t, psi, c);
            const double denom = psi.norm() * out.norm();
            if (denom == 0.0) continue;
            const double residual = std::abs(inner_product(psi, out).imag()) / denom;
            INFO(term_kind_name(t.kind));
            CHECK(residual <= 1e-9);
        }
    }
}

TEST_CASE("DG output picks up a global phase exactly") {
    GridPtr g = make_grid(1, 128, 16.0);
    PhysicalConstants c = defaults();
    c.D = 0.05;
    ComplexField psi = random_band_limited(g, 10, 31);
    const Complex phase = std::polar(1.0, 1.1);
    ComplexField a = apply_term(TermSpec::dg_imag(), phase * psi, c);
    ComplexField b = phase * apply_term(TermSpec::dg_imag(), psi, c);
    CHECK(rel_l2_diff(a, b) <= 1e-12);
}

TEST_CASE("terms commute with whole-grid translations") {
    GridPtr g = make_grid(1, 128, 16.0);
    PhysicalConstants c = defaults();
    c.D = 0.05;
    c.p_bbm = 0.2;
    c.q_kostin = 0.1;
    ComplexField psi = random_band_limited(g, 12, 41);
    const std::vector<int> shift = {37};
    const TermSpec terms[] = {TermSpec::kinetic(), TermSpec::dg_imag(),
                              TermSpec::bbm_log(), TermSpec::kostin(),
                              TermSpec::cubic_nls(0.8)};
    for (const TermSpec& t : terms) {
        ComplexField a = translate(apply_term(t, psi, c), shift);
        ComplexField b = apply_term(t, translate(psi, shift), c);
        INFO(term_kind_name(t.kind));
        CHECK(rel_l2_diff(a, b) <= 1e-12);
    }
}

TEST_CASE("hamiltonian spec validation") {
    HamiltonianSpec h;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
    h.terms.push_back(TermSpec::kinetic());
    CHECK_NOTHROW(h.validate());
    CHECK_THROWS_AS(TermSpec::generic_r("unknown_tag"), std::invalid_argument);
}

TEST_CASE("declared property triples") {
    CHECK(properties_of(TermKind::DgImag).separating);
    CHECK(properties_of(TermKind::DgImag).homogeneous);
    CHECK(properties_of(TermKind::BbmLog).separating);
    CHECK_FALSE(properties_of(TermKind::BbmLog).homogeneous);
    CHECK(properties_of(TermKind::Kostin).separating);
    CHECK_FALSE(properties_of(TermKind::CubicNls).separating);
    for (TermKind k : {TermKind::Kinetic, TermKind::Potential, TermKind::DgImag,
                       TermKind::BbmLog, TermKind::Kostin, TermKind::CubicNls,
                       TermKind::GenericR}) {
        CHECK(properties_of(k).norm_preserving);
    }
}
