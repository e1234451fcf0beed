#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlq/separation.hpp"
#include "support.hpp"

using namespace nlq;
using namespace nlq::testing;

namespace {

HamiltonianSpec spec_with(TermKind kind, double coeff) {
    HamiltonianSpec h;
    h.terms.push_back(TermSpec::kinetic());
    switch (kind) {
        case TermKind::DgImag:
            h.terms.push_back(TermSpec::dg_imag());
            h.constants.D = coeff;
            break;
        case TermKind::BbmLog:
            h.terms.push_back(TermSpec::bbm_log());
            h.constants.p_bbm = coeff;
            break;
        case TermKind::Kostin:
            h.terms.push_back(TermSpec::kostin());
            h.constants.q_kostin = coeff;
            break;
        case TermKind::CubicNls:
            h.terms.push_back(TermSpec::cubic_nls(coeff));
            break;
        default:
            break;
    }
    return h;
}

// Wide wrapped packets: the joint product stays above the amplitude floor
// everywhere on the 40-box, so the factorization identities hold exactly and
// the defect is pure time-discretization error.
struct Setup {
    GridPtr grid = make_grid(1, 64, 40.0);
    ComplexField psi1;
    ComplexField psi2;
    EvolutionParams params;

    Setup(double dt, long steps, int boost1 = 0, int boost2 = 0) {
        psi1 = gaussian_packet(grid, 5.5, 20.0, boost1);
        psi2 = gaussian_packet(grid, 5.6, 18.0, boost2);
        params.dt = dt;
        params.steps = steps;
        params.record_every = std::max<long>(1, steps / 10);
    }
};

EvolutionParams halved(const EvolutionParams& p) {
    EvolutionParams h = p;
    h.dt = 0.5 * p.dt;
    h.steps = 2 * p.steps;
    h.record_every = 2 * p.record_every;
    return h;
}

}  // namespace

TEST_CASE("linear kinetic factors separate to the solver floor") {
    Setup s(0.01, 100);
    TwoParticleHamiltonian tp{spec_with(TermKind::Kinetic, 0.0),
                              spec_with(TermKind::Kinetic, 0.0), nullptr};
    SeparationReport r = separation_defect(s.psi1, s.psi2, tp, s.params);
    CHECK(r.separating);
    CHECK(r.verdict == "separating");
    CHECK(r.max_defect <= 1e-8);
    CHECK(r.defect.front() <= 1e-12);
}

TEST_CASE("DG factors remain separating over T = 1") {
    Setup s(0.05, 20, 4, 3);
    TwoParticleHamiltonian tp{spec_with(TermKind::DgImag, 0.05),
                              spec_with(TermKind::DgImag, 0.05), nullptr};
    SeparationReport r = separation_defect(s.psi1, s.psi2, tp, s.params);
    CHECK(r.separating);
    CHECK(r.max_defect <= 1e-5);
}

TEST_CASE("species may differ across the factors") {
    Setup s(0.05, 20, 2, 0);
    HamiltonianSpec k1 = spec_with(TermKind::DgImag, 0.05);
    HamiltonianSpec k2 = spec_with(TermKind::DgImag, 0.02);
    k2.constants.mass = 1.7;
    TwoParticleHamiltonian tp{k1, k2, nullptr};
    SeparationReport r = separation_defect(s.psi1, s.psi2, tp, s.params);
    CHECK(r.separating);
}

TEST_CASE("BBM and Kostin terms are separating") {
    for (TermKind kind : {TermKind::BbmLog, TermKind::Kostin}) {
        Setup s(0.05, 20, kind == TermKind::BbmLog ? 4 : 0, 0);
        TwoParticleHamiltonian tp{spec_with(kind, 0.05), spec_with(kind, 0.05),
                                  nullptr};
        SeparationReport r = separation_defect(s.psi1, s.psi2, tp, s.params);
        INFO(term_kind_name(kind));
        CHECK(r.separating);
        CHECK(r.max_defect <= 1e-5);
    }
}

TEST_CASE("mismatched universal constants are rejected in composition") {
    Setup s(0.05, 1);
    HamiltonianSpec k1 = spec_with(TermKind::BbmLog, 0.05);
    HamiltonianSpec k2 = spec_with(TermKind::BbmLog, 0.07);
    TwoParticleHamiltonian tp{k1, k2, nullptr};
    CHECK_THROWS_AS(
        static_cast<void>(separation_defect(s.psi1, s.psi2, tp, s.params)),
        std::invalid_argument);
}

TEST_CASE("cubic NLS generates correlations with an early monotone defect") {
    Setup s(0.01, 100);
    TwoParticleHamiltonian tp{spec_with(TermKind::CubicNls, 1.0),
                              spec_with(TermKind::CubicNls, 1.0), nullptr};
    SeparationReport r = separation_defect(s.psi1, s.psi2, tp, s.params);
    CHECK_FALSE(r.separating);
    CHECK(r.verdict == "correlation-generating");
    CHECK(r.max_defect > 1e-4);
    for (std::size_t i = 1; i < std::min<std::size_t>(5, r.defect.size()); ++i) {
        CHECK(r.defect[i] >= r.defect[i - 1]);
    }
}

TEST_CASE("refinement separates numerical defect from true correlation") {
    SUBCASE("DG defect drops by at least 8x under dt halving") {
        Setup s(0.05, 20, 4, 3);
        TwoParticleHamiltonian tp{spec_with(TermKind::DgImag, 0.05),
                                  spec_with(TermKind::DgImag, 0.05), nullptr};
        SeparationReport rc = separation_defect(s.psi1, s.psi2, tp, s.params);
        SeparationReport rf = separation_defect(s.psi1, s.psi2, tp, halved(s.params));
        if (rf.max_defect > 1e-12) {
            CHECK(rc.max_defect / rf.max_defect >= 8.0);
        }
    }

    SUBCASE("cubic defect is refinement-stable") {
        Setup s(0.01, 100);
        TwoParticleHamiltonian tp{spec_with(TermKind::CubicNls, 1.0),
                                  spec_with(TermKind::CubicNls, 1.0), nullptr};
        SeparationReport rc = separation_defect(s.psi1, s.psi2, tp, s.params);
        SeparationReport rf = separation_defect(s.psi1, s.psi2, tp, halved(s.params));
        CHECK(rf.max_defect >= 0.5 * rc.max_defect);
    }
}

TEST_CASE("a product-vanishing Q leaves the early defect unchanged") {
    Setup s(0.01, 20, 4, 3);
    s.params.record_every = 1;
    HamiltonianSpec k = spec_with(TermKind::DgImag, 0.05);
    TwoParticleHamiltonian without{k, k, nullptr};
    TwoParticleHamiltonian with{k, k, make_projector_q(0.5)};
    SeparationReport r0 = separation_defect(s.psi1, s.psi2, without, s.params);
    SeparationReport rq = separation_defect(s.psi1, s.psi2, with, s.params);
    const double d0 = r0.defect[1];
    const double dq = rq.defect[1];
    CHECK(std::abs(dq - d0) <= 0.05 * d0 + 1e-12);
}

TEST_CASE("unnormalized factors are rejected") {
    Setup s(0.01, 10);
    ComplexField bad = s.psi1;
    bad *= Complex{2.0, 0.0};
    TwoParticleHamiltonian tp{spec_with(TermKind::Kinetic, 0.0),
                              spec_with(TermKind::Kinetic, 0.0), nullptr};
    CHECK_THROWS_AS(
        static_cast<void>(separation_defect(bad, s.psi2, tp, s.params)),
        std::invalid_argument);
}
