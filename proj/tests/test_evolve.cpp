#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlq/evolve.hpp"
#include "support.hpp"

using namespace nlq;
using namespace nlq::testing;

namespace {

HamiltonianSpec kinetic_spec(double d = 0.0) {
    HamiltonianSpec h;
    h.terms.push_back(TermSpec::kinetic());
    if (d != 0.0) {
        h.terms.push_back(TermSpec::dg_imag());
        h.constants.D = d;
    }
    return h;
}

double packet_width_sq(const ComplexField& psi) {
    // 2 * Var(x) for a 1D density, the sigma^2(t) of a gaussian e^{-x^2/2s^2}.
    const Grid& g = *psi.grid();
    double mass = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double w = std::norm(psi[i]);
        mass += w;
        mean += w * g.coordinate(g.index_along(i, 0));
    }
    mean /= mass;
    double var = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double d = g.coordinate(g.index_along(i, 0)) - mean;
        var += std::norm(psi[i]) * d * d;
    }
    return 2.0 * var / mass;
}

}  // namespace

TEST_CASE("free gaussian spreading follows width^2 = 1 + t^2") {
    GridPtr g = make_grid(1, 256, 40.0);
    ComplexField psi0 = gaussian_packet(g, 1.0, 20.0);
    EvolutionParams p;
    p.dt = 5e-3;
    p.steps = 200;
    p.record_every = 200;
    Trajectory traj = evolve(psi0, kinetic_spec(), p);
    const double w2 = packet_width_sq(traj.final_state());
    CHECK(std::abs(w2 - 2.0) / 2.0 <= 1e-4);  // sigma^2(1) = 1 + 1^2
}

TEST_CASE("DG evolution conserves the norm; halved dt confirms convergence") {
    GridPtr g = make_grid(1, 256, 20.0);
    ComplexField psi0 = gaussian_packet(g, 1.0, 10.0);
    EvolutionParams p;
    p.dt = 1e-3;
    p.steps = 1000;
    p.record_every = 1000;
    Trajectory coarse = evolve(psi0, kinetic_spec(0.05), p);
    CHECK(std::abs(coarse.norms.back() - 1.0) <= 1e-6);

    EvolutionParams ph = p;
    ph.dt = 5e-4;
    ph.steps = 2000;
    ph.record_every = 2000;
    Trajectory fine = evolve(psi0, kinetic_spec(0.05), ph);
    // Converged in dt: the two endpoints agree far below the norm tolerance.
    CHECK(rel_l2_diff(coarse.final_state(), fine.final_state()) <= 1e-7);
}

TEST_CASE("zero steps returns only the initial state") {
    GridPtr g = make_grid(1, 64, 10.0);
    ComplexField psi0 = gaussian_packet(g, 1.0, 5.0);
    EvolutionParams p;
    p.dt = 1e-3;
    p.steps = 0;
    Trajectory traj = evolve(psi0, kinetic_spec(), p);
    CHECK(traj.snapshots.size() == 1);
    CHECK(traj.times.front() == 0.0);
    CHECK(rel_l2_diff(traj.snapshots.front(), psi0) <= 1e-15);
}

TEST_CASE("rk4 convergence order is about four") {
    GridPtr g = make_grid(1, 128, 16.0);
    HamiltonianSpec h = kinetic_spec();
    RealField v(g);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::cos(2.0 * kPi * g->coordinate(g->index_along(i, 0)) / 16.0);
    }
    h.terms.push_back(TermSpec::potential_term(v));
    // A boosted, narrow packet keeps the time-discretization error well above
    // the roundoff floor so the order ratio is clean.
    ComplexField psi0 = gaussian_packet(g, 0.8, 8.0, 4);

    auto final_at = [&](double dt, long steps) {
        EvolutionParams p;
        p.dt = dt;
        p.steps = steps;
        p.record_every = steps;
        return evolve(psi0, h, p).final_state();
    };
    ComplexField ref = final_at(1.5e-3, 500);
    const double e_coarse = rel_l2_diff(final_at(6e-3, 125), ref);
    const double e_fine = rel_l2_diff(final_at(3e-3, 250), ref);
    const double ratio = e_coarse / e_fine;
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 22.0);
}

TEST_CASE("linear evolution is unitary on pairs of states") {
    GridPtr g = make_grid(1, 128, 16.0);
    ComplexField a = random_band_limited(g, 10, 51);
    ComplexField b = random_band_limited(g, 10, 52);
    const Complex before = inner_product(a, b);
    EvolutionParams p;
    p.dt = 2e-3;
    p.steps = 250;
    p.record_every = 250;
    const Complex after = inner_product(evolve(a, kinetic_spec(), p).final_state(),
                                        evolve(b, kinetic_spec(), p).final_state());
    CHECK(std::abs(before - after) <= 1e-8);
}

TEST_CASE("time reversal probe: DG is asymmetric, linear flow is not") {
    GridPtr g = make_grid(1, 256, 20.0);
    ComplexField psi0 = gaussian_packet(g, 1.2, 10.0);
    EvolutionParams p;
    p.dt = 1e-3;
    p.steps = 300;
    p.record_every = 300;

    auto reversal_residual = [&](const HamiltonianSpec& h) {
        ComplexField forward = evolve(psi0, h, p).final_state();
        ComplexField conj_state = forward;
        for (std::size_t i = 0; i < conj_state.size(); ++i) {
            conj_state[i] = std::conj(conj_state[i]);
        }
        ComplexField back = evolve(conj_state, h, p).final_state();
        for (std::size_t i = 0; i < back.size(); ++i) back[i] = std::conj(back[i]);
        return rel_l2_diff(back, psi0);
    };

    const double linear_residual = reversal_residual(kinetic_spec());
    const double dg_residual = reversal_residual(kinetic_spec(0.05));
    CHECK(dg_residual > 10.0 * linear_residual);
}

TEST_CASE("stability bound is enforced and overridable") {
    GridPtr g = make_grid(1, 256, 20.0);
    ComplexField psi0 = gaussian_packet(g, 1.0, 10.0);
    EvolutionParams p;
    p.dt = 0.1;  // far above 0.5 dx^2
    p.steps = 1;
    CHECK_THROWS_WITH_AS(static_cast<void>(evolve(psi0, kinetic_spec(), p)),
                         doctest::Contains("stability bound"), std::invalid_argument);
    p.override_stability = true;
    CHECK_NOTHROW(static_cast<void>(evolve(psi0, kinetic_spec(), p)));
}

TEST_CASE("split step matches rk4 for pointwise nonlinearities") {
    GridPtr g = make_grid(1, 128, 16.0);
    HamiltonianSpec h;
    h.terms.push_back(TermSpec::kinetic());
    h.terms.push_back(TermSpec::cubic_nls(0.8));
    ComplexField psi0 = gaussian_packet(g, 1.5, 8.0);

    EvolutionParams rk;
    rk.dt = 5e-4;
    rk.steps = 400;
    rk.record_every = 400;
    ComplexField a = evolve(psi0, h, rk).final_state();

    EvolutionParams ss = rk;
    ss.integrator = Integrator::SplitStep;
    ComplexField b = evolve(psi0, h, ss).final_state();
    CHECK(rel_l2_diff(a, b) <= 1e-5);

    HamiltonianSpec dg = kinetic_spec(0.05);
    CHECK_THROWS_AS(static_cast<void>(evolve(psi0, dg, ss)), std::invalid_argument);
}

TEST_CASE("unnormalized initial states are rejected") {
    GridPtr g = make_grid(1, 64, 10.0);
    ComplexField psi0 = gaussian_packet(g, 1.0, 5.0);
    psi0 *= Complex{1.1, 0.0};
    EvolutionParams p;
    p.dt = 1e-3;
    p.steps = 1;
    CHECK_THROWS_AS(static_cast<void>(evolve(psi0, kinetic_spec(), p)),
                    std::invalid_argument);
}

TEST_CASE("two-particle composition") {
    GridPtr g1 = make_grid(1, 64, 16.0);
    GridPtr jg = joint_grid(*g1);

    SUBCASE("joint kinetic eigenmode") {
        TwoParticleHamiltonian tp{kinetic_spec(), kinetic_spec(), nullptr};
        Hamiltonian joint = compose_two_particle(tp, jg);
        ComplexField e1 = plane_wave(g1, 2);
        ComplexField e2 = plane_wave(g1, -3);
        ComplexField prod = tensor_product(e1, e2);
        const double k1 = 2.0 * kPi * 2 / 16.0;
        const double k2 = 2.0 * kPi * -3 / 16.0;
        ComplexField out = joint.apply(prod);
        ComplexField expect = Complex{(k1 * k1 + k2 * k2) / 2.0, 0.0} * prod;
        CHECK(rel_l2_diff(out, expect) <= 1e-10);
    }

    SUBCASE("one-particle operators act on their own blocks") {
        HamiltonianSpec ha = kinetic_spec();
        HamiltonianSpec hb = kinetic_spec(0.05);
        TwoParticleHamiltonian tp{ha, hb, nullptr};
        Hamiltonian joint = compose_two_particle(tp, jg);
        // Wide packets keep the joint product above the amplitude floor
        // everywhere, so the block identity holds to spectral precision.
        ComplexField a = gaussian_packet(g1, 2.4, 8.0);
        ComplexField b = gaussian_packet(g1, 2.3, 8.0);
        ComplexField lhs = joint.apply(tensor_product(a, b));
        ComplexField rhs = tensor_product(apply_hamiltonian(ha, a), b);
        rhs += tensor_product(a, apply_hamiltonian(hb, b));
        CHECK(rel_l2_diff(lhs, rhs) <= 1e-8);
    }

    SUBCASE("projector Q vanishes on products") {
        auto q = make_projector_q(0.7);
        ComplexField a = gaussian_packet(g1, 1.5, 8.0);
        ComplexField b = gaussian_packet(g1, 2.0, 6.0);
        ComplexField out = q(tensor_product(a, b));
        CHECK(out.norm() <= 1e-10);
    }

    SUBCASE("q invariant holds on random products") {
        auto q = make_projector_q(1.0);
        for (unsigned seed : {61u, 62u}) {
            ComplexField a = random_band_limited(g1, 8, seed);
            ComplexField b = random_band_limited(g1, 8, seed + 10);
            CHECK(q(tensor_product(a, b)).norm() <= 1e-10);
        }
    }

    SUBCASE("schmidt coefficients of a product state") {
        ComplexField a = gaussian_packet(g1, 1.5, 8.0);
        ComplexField b = gaussian_packet(g1, 2.0, 6.0);
        std::vector<double> sv = schmidt_coefficients(tensor_product(a, b));
        CHECK(sv[0] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(sv[1] <= 1e-10);
    }
}

TEST_CASE("instability aborts with a diagnostic") {
    GridPtr g = make_grid(1, 64, 10.0);
    ComplexField psi0 = gaussian_packet(g, 0.8, 5.0);
    HamiltonianSpec h = kinetic_spec();
    EvolutionParams p;
    p.dt = 0.04;  // just above the bound: blows up quickly
    p.steps = 400;
    p.record_every = 10;
    p.override_stability = true;
    CHECK_THROWS_AS(static_cast<void>(evolve(psi0, h, p)), InstabilityError);
}
