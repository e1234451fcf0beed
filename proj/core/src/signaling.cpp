#include "nlq/signaling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlq/parallel.hpp"
#include "nlq/regularization.hpp"
#include "nlq/spectral.hpp"

namespace nlq {

namespace {

constexpr double kWeightCutoff = 1e-13;

GridPtr one_particle_grid(const Grid& joint) {
    return make_grid(1, joint.points_per_dim(), joint.extent());
}

int measured_axis(const ObservableSpec& a) {
    if (a.subsystem != 1 && a.subsystem != 2) {
        throw std::invalid_argument("measurement: subsystem must be 1 or 2");
    }
    return a.subsystem - 1;
}

/// DFT along one axis of a 2D field using cached 1D plans. sign = -1 forward,
/// +1 backward (unnormalized, FFTW convention).
std::vector<Complex> axis_dft(const ComplexField& f, int axis, int sign) {
    const Grid& g = *f.grid();
    if (g.n_dims() != 2) throw std::logic_error("axis_dft: 2D fields only");
    const std::size_t m = static_cast<std::size_t>(g.points_per_dim());
    std::vector<Complex> out(f.size());
    std::vector<Complex> line(m), transformed(m);

    GridPtr line_grid = make_grid(1, g.points_per_dim(), g.extent());
    for (std::size_t other = 0; other < m; ++other) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t flat = axis == 0 ? i * m + other : other * m + i;
            line[i] = f[flat];
        }
        ComplexField lf(line_grid, line);
        if (sign < 0) {
            transformed = fft_forward(lf);
        } else {
            // Unnormalized backward: conjugate trick around the forward plan.
            std::vector<Complex> tmp(m);
            for (std::size_t i = 0; i < m; ++i) tmp[i] = std::conj(line[i]);
            ComplexField cf(line_grid, std::move(tmp));
            transformed = fft_forward(cf);
            for (std::size_t i = 0; i < m; ++i) transformed[i] = std::conj(transformed[i]);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t flat = axis == 0 ? i * m + other : other * m + i;
            out[flat] = transformed[i];
        }
    }
    return out;
}

void finalize_ensemble(ConditionalEnsemble& ens) {
    std::erase_if(ens.outcomes, [](const ConditionalOutcome& o) {
        return o.weight <= kWeightCutoff;
    });
    if (ens.outcomes.empty()) {
        throw EnsembleError("measurement produced no outcomes above the weight cutoff");
    }
    double total = 0.0;
    for (const auto& o : ens.outcomes) total += o.weight;
    for (auto& o : ens.outcomes) {
        o.weight /= total;
        o.state.normalize();
    }
}

void check_degenerate(const std::vector<ConditionalOutcome>& outcomes,
                      const char* what) {
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        for (std::size_t j = i + 1; j < outcomes.size(); ++j) {
            if (outcomes[i].weight <= kWeightCutoff || outcomes[j].weight <= kWeightCutoff) {
                continue;
            }
            const double scale =
                std::max({1.0, std::abs(outcomes[i].value), std::abs(outcomes[j].value)});
            if (std::abs(outcomes[i].value - outcomes[j].value) <= 1e-10 * scale) {
                throw EnsembleError(std::string(what) +
                                    ": degenerate outcome with nonzero weight "
                                    "(non-degenerate spectrum required)");
            }
        }
    }
}

ConditionalEnsemble momentum_conditionals(const ComplexField& phi, int axis) {
    const Grid& g = *phi.grid();
    const std::size_t m = static_cast<std::size_t>(g.points_per_dim());
    GridPtr g1 = one_particle_grid(g);
    std::vector<Complex> f = axis_dft(phi, axis, -1);

    // Phi = sum_j chi_j(y) e_j(x), e_j = e^{i k_j x}/sqrt(L);
    // chi_j(y) = F[j,y] dx / sqrt(L). Parseval makes the weights complete.
    const double scale = g.dx() / std::sqrt(g.extent());
    ConditionalEnsemble ens;
    ens.measured_subsystem = axis + 1;
    for (std::size_t j = 0; j < m; ++j) {
        ComplexField chi(g1);
        for (std::size_t y = 0; y < m; ++y) {
            const std::size_t flat = axis == 0 ? j * m + y : y * m + j;
            chi[y] = f[flat] * scale;
        }
        const double w = chi.norm2();
        ens.outcomes.push_back(
            ConditionalOutcome{g.wavenumber(static_cast<int>(j)), w, std::move(chi)});
    }
    finalize_ensemble(ens);
    return ens;
}

ConditionalEnsemble position_conditionals(const ComplexField& phi, int axis,
                                          double s_loc) {
    if (!(s_loc > 0.0)) {
        throw std::invalid_argument("position measurement: s_loc must be positive");
    }
    const Grid& g = *phi.grid();
    const std::size_t m = static_cast<std::size_t>(g.points_per_dim());
    GridPtr g1 = one_particle_grid(g);

    // L2-normalized Gaussian window in mode space: c_j = nu exp(-k_j^2/(4 s)).
    std::vector<double> taper(m);
    double sum2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double k = g.wavenumber(static_cast<int>(j));
        taper[j] = std::exp(-k * k / (4.0 * s_loc));
        sum2 += taper[j] * taper[j];
    }
    const double nu = 1.0 / std::sqrt(g.extent() * sum2);
    for (double& t : taper) t *= nu;

    // Conditionals for every center w at once: one forward DFT along the
    // measured axis, taper, one backward DFT.
    std::vector<Complex> f = axis_dft(phi, axis, -1);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::size_t j = axis == 0 ? i / m : i % m;
        f[i] *= taper[j];
    }
    ComplexField tapered(phi.grid(), std::move(f));
    std::vector<Complex> gathered = axis_dft(tapered, axis, +1);

    ConditionalEnsemble ens;
    ens.measured_subsystem = axis + 1;
    const double dx = g.dx();
    for (std::size_t w = 0; w < m; ++w) {
        ComplexField chi(g1);
        for (std::size_t y = 0; y < m; ++y) {
            const std::size_t flat = axis == 0 ? w * m + y : y * m + w;
            chi[y] = gathered[flat] * dx;
        }
        const double weight = chi.norm2();
        ens.outcomes.push_back(
            ConditionalOutcome{g.coordinate(static_cast<int>(w)), weight, std::move(chi)});
    }
    finalize_ensemble(ens);
    return ens;
}

ConditionalEnsemble diagonal_conditionals(const ComplexField& phi, int axis,
                                          const RealField& diag) {
    const Grid& g = *phi.grid();
    const std::size_t m = static_cast<std::size_t>(g.points_per_dim());
    if (diag.size() != m) {
        throw std::invalid_argument("custom diagonal observable: size mismatch");
    }
    GridPtr g1 = one_particle_grid(g);
    ConditionalEnsemble ens;
    ens.measured_subsystem = axis + 1;
    const double dx = g.dx();
    for (std::size_t i = 0; i < m; ++i) {
        ComplexField chi(g1);
        for (std::size_t y = 0; y < m; ++y) {
            const std::size_t flat = axis == 0 ? i * m + y : y * m + i;
            chi[y] = phi[flat] * std::sqrt(dx);
        }
        ens.outcomes.push_back(ConditionalOutcome{diag[i], chi.norm2(), std::move(chi)});
    }
    check_degenerate(ens.outcomes, "custom diagonal measurement");
    finalize_ensemble(ens);
    return ens;
}

ConditionalEnsemble matrix_conditionals(const ComplexField& phi, int axis,
                                        const std::vector<Complex>& matrix) {
    const Grid& g = *phi.grid();
    const std::size_t m = static_cast<std::size_t>(g.points_per_dim());
    if (matrix.size() != m * m) {
        throw std::invalid_argument("custom matrix observable: size mismatch");
    }
    using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
    CMat a(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                matrix[i * m + j];
        }
    }
    const double herm = (a - a.adjoint()).norm();
    if (herm > 1e-10 * std::max(1.0, a.norm())) {
        throw std::invalid_argument("custom matrix observable: not hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMat> solver(a);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("custom matrix observable: eigensolve failed");
    }

    GridPtr g1 = one_particle_grid(g);
    ConditionalEnsemble ens;
    ens.measured_subsystem = axis + 1;
    const double sq_dx = std::sqrt(g.dx());
    for (std::size_t l = 0; l < m; ++l) {
        ComplexField chi(g1);
        for (std::size_t y = 0; y < m; ++y) {
            Complex acc{0.0, 0.0};
            for (std::size_t x = 0; x < m; ++x) {
                const std::size_t flat = axis == 0 ? x * m + y : y * m + x;
                acc += std::conj(solver.eigenvectors()(static_cast<Eigen::Index>(x),
                                                       static_cast<Eigen::Index>(l))) *
                       phi[flat];
            }
            chi[y] = acc * sq_dx;
        }
        ens.outcomes.push_back(ConditionalOutcome{
            solver.eigenvalues()(static_cast<Eigen::Index>(l)), chi.norm2(),
            std::move(chi)});
    }
    check_degenerate(ens.outcomes, "custom matrix measurement");
    finalize_ensemble(ens);
    return ens;
}

}  // namespace

ObservableSpec ObservableSpec::position(int subsystem, double s_loc) {
    ObservableSpec o;
    o.kind = ObservableKind::Position;
    o.subsystem = subsystem;
    o.s_loc = s_loc;
    o.label = "position";
    return o;
}

ObservableSpec ObservableSpec::momentum(int subsystem) {
    ObservableSpec o;
    o.kind = ObservableKind::Momentum;
    o.subsystem = subsystem;
    o.label = "momentum";
    return o;
}

ObservableSpec ObservableSpec::multiplication(int subsystem, RealField values,
                                              std::string label) {
    ObservableSpec o;
    o.kind = ObservableKind::CustomDiagonal;
    o.subsystem = subsystem;
    o.diagonal = std::move(values);
    o.label = std::move(label);
    return o;
}

ObservableSpec ObservableSpec::matrix_observable(int subsystem, std::vector<Complex> m,
                                                 std::string label) {
    ObservableSpec o;
    o.kind = ObservableKind::CustomMatrix;
    o.subsystem = subsystem;
    o.matrix = std::move(m);
    o.label = std::move(label);
    return o;
}

ComplexField apply_observable(const ObservableSpec& b, const ComplexField& psi,
                              double hbar) {
    const Grid& g = *psi.grid();
    switch (b.kind) {
        case ObservableKind::Position: {
            ComplexField out(psi.grid());
            for (std::size_t i = 0; i < psi.size(); ++i) {
                out[i] = g.coordinate(g.index_along(i, 0)) * psi[i];
            }
            return out;
        }
        case ObservableKind::Momentum: {
            ComplexField d = partial_derivative(psi, 0);
            d *= Complex{0.0, -hbar};
            return d;
        }
        case ObservableKind::CustomDiagonal: {
            if (b.diagonal.size() != psi.size()) {
                throw std::invalid_argument("observable: diagonal size mismatch");
            }
            ComplexField out(psi.grid());
            for (std::size_t i = 0; i < psi.size(); ++i) out[i] = b.diagonal[i] * psi[i];
            return out;
        }
        case ObservableKind::CustomMatrix: {
            const std::size_t m = psi.size();
            if (b.matrix.size() != m * m) {
                throw std::invalid_argument("observable: matrix size mismatch");
            }
            ComplexField out(psi.grid());
            for (std::size_t i = 0; i < m; ++i) {
                Complex acc{0.0, 0.0};
                for (std::size_t j = 0; j < m; ++j) acc += b.matrix[i * m + j] * psi[j];
                out[i] = acc * g.dx();  // kernel convention, hermitian under the dx inner product
            }
            return out;
        }
    }
    throw std::logic_error("apply_observable: unknown kind");
}

double ConditionalEnsemble::weight_sum() const {
    double s = 0.0;
    for (const auto& o : outcomes) s += o.weight;
    return s;
}

EprState epr_state(const GridPtr& one_particle, int band, double s_loc) {
    const Grid& g1 = *one_particle;
    if (g1.n_dims() != 1) {
        throw std::invalid_argument("epr_state: one-particle grid must be 1D");
    }
    const int m = g1.points_per_dim();
    if (band < 0 || band > (m - 1) / 2) {
        throw std::invalid_argument("epr_state: band must satisfy 0 <= band <= (points-1)/2");
    }
    GridPtr jg = joint_grid(g1);
    // Spectrum: modes (j, -j) for |j| <= band, equal amplitudes.
    std::vector<Complex> spec(jg->size(), Complex{0.0, 0.0});
    const std::size_t mm = static_cast<std::size_t>(m);
    for (int j = -band; j <= band; ++j) {
        const int jx = j >= 0 ? j : j + m;
        const int jy = -j >= 0 ? -j : -j + m;
        spec[static_cast<std::size_t>(jx) * mm + static_cast<std::size_t>(jy)] =
            Complex{1.0, 0.0};
    }
    ComplexField field = fft_backward(jg, std::move(spec));
    field.normalize();
    return EprState{std::move(field), band, s_loc};
}

ComplexField two_mode_entangled(const GridPtr& one_particle, int mode,
                                const ComplexField& g1, const ComplexField& g2) {
    const Grid& g = *one_particle;
    if (g.n_dims() != 1) {
        throw std::invalid_argument("two_mode_entangled: 1D one-particle grid required");
    }
    if (mode <= 0 || mode > (g.points_per_dim() - 1) / 2) {
        throw std::invalid_argument("two_mode_entangled: mode must be in the grid band");
    }
    if (!g1.is_normalized(1e-8) || !g2.is_normalized(1e-8)) {
        throw std::invalid_argument("two_mode_entangled: factors must be normalized");
    }
    const double k = 2.0 * std::numbers::pi * mode / g.extent();
    const double amp = 1.0 / std::sqrt(g.extent());
    ComplexField e_plus(one_particle), e_minus(one_particle);
    for (std::size_t i = 0; i < e_plus.size(); ++i) {
        const double x = g.coordinate(g.index_along(i, 0));
        e_plus[i] = std::polar(amp, k * x);
        e_minus[i] = std::polar(amp, -k * x);
    }
    ComplexField phi = tensor_product(e_plus, g1);
    phi += tensor_product(e_minus, g2);
    phi *= Complex{1.0 / std::sqrt(2.0), 0.0};
    return phi;
}

ConditionalEnsemble measure_conditionals(const ComplexField& phi,
                                         const ObservableSpec& a) {
    if (phi.grid()->n_dims() != 2) {
        throw std::invalid_argument("measure_conditionals: two-particle field required");
    }
    const int axis = measured_axis(a);
    ConditionalEnsemble ens;
    switch (a.kind) {
        case ObservableKind::Momentum:
            ens = momentum_conditionals(phi, axis);
            break;
        case ObservableKind::Position:
            ens = position_conditionals(phi, axis, a.s_loc);
            break;
        case ObservableKind::CustomDiagonal:
            ens = diagonal_conditionals(phi, axis, a.diagonal);
            break;
        case ObservableKind::CustomMatrix:
            ens = matrix_conditionals(phi, axis, a.matrix);
            break;
    }
    ens.observable_label = a.label;
    return ens;
}

namespace {

double checked_expectation(const ComplexField& state, const ObservableSpec& b,
                           double hbar) {
    const Complex e = inner_product(state, apply_observable(b, state, hbar));
    if (std::abs(e.imag()) > 1e-12 * std::max(1.0, std::abs(e.real()))) {
        throw EnsembleError("observable expectation has imaginary residue " +
                            std::to_string(e.imag()) + "; observable not hermitian?");
    }
    return e.real();
}

double ensemble_rate(const ConditionalEnsemble& ens, const ObservableSpec& b,
                     const Hamiltonian& h) {
    const double hbar = h.hbar();
    std::vector<double> rates = parallel_map(ens.outcomes.size(), [&](std::size_t i) {
        const ConditionalOutcome& o = ens.outcomes[i];
        ComplexField b_phi = apply_observable(b, o.state, hbar);
        const Complex z = inner_product(b_phi, h.apply(o.state));
        return (2.0 / hbar) * z.imag();
    });
    double total = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        total += ens.outcomes[i].weight * rates[i];
    }
    return total;
}

}  // namespace

double expected_value(const ConditionalEnsemble& ens, const ObservableSpec& b,
                      double hbar) {
    double total = 0.0;
    for (const auto& o : ens.outcomes) {
        total += o.weight * checked_expectation(o.state, b, hbar);
    }
    return total;
}

double expected_value_after(const ConditionalEnsemble& ens, const ObservableSpec& b,
                            const HamiltonianSpec& h, double t,
                            const EvolutionParams& params) {
    if (t < 0.0) throw std::invalid_argument("expected_value_after: t must be >= 0");
    const double hbar = h.constants.hbar;
    if (t == 0.0) return expected_value(ens, b, hbar);

    Hamiltonian op = Hamiltonian::from_spec(h);
    EvolutionParams run = params;
    run.steps = std::max<long>(1, std::lround(t / params.dt));
    run.dt = t / static_cast<double>(run.steps);
    run.record_every = run.steps;  // only the endpoint is needed

    std::vector<double> values = parallel_map(ens.outcomes.size(), [&](std::size_t i) {
        Trajectory traj = evolve(ens.outcomes[i].state, op, run);
        return checked_expectation(traj.final_state(), b, hbar);
    });
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        total += ens.outcomes[i].weight * values[i];
    }
    return total;
}

namespace {

struct ArmPair {
    ConditionalEnsemble a;
    ConditionalEnsemble a_prime;
    double e0_a;
    double e0_ap;
};

ArmPair build_arms(const ComplexField& phi, const ObservableSpec& a,
                   const ObservableSpec& a_prime, const ObservableSpec& b,
                   double hbar) {
    ArmPair arms{measure_conditionals(phi, a), measure_conditionals(phi, a_prime),
                 0.0, 0.0};
    arms.e0_a = expected_value(arms.a, b, hbar);
    arms.e0_ap = expected_value(arms.a_prime, b, hbar);
    const double delta0 = arms.e0_a - arms.e0_ap;
    if (std::abs(delta0) > 1e-9) {
        throw EnsembleError(
            "Delta(B,0|A,A') = " + std::to_string(delta0) +
            " exceeds 1e-9: ensemble construction broken (decompositions of the "
            "reduced state disagree at t=0)");
    }
    return arms;
}

double localized_arm_rate(const ConditionalEnsemble& position_arm,
                          const ObservableSpec& b, const Hamiltonian& h,
                          double s_loc, const GridPtr& g1) {
    std::vector<double> rates =
        parallel_map(position_arm.outcomes.size(), [&](std::size_t i) {
            RegularizedDelta delta =
                gaussian_delta(g1, s_loc, {position_arm.outcomes[i].value});
            return localized_signal_rate(delta, b.diagonal, h);
        });
    double total = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        total += position_arm.outcomes[i].weight * rates[i];
    }
    return total;
}

}  // namespace

SignalReport first_order_signal(const ComplexField& phi, const ObservableSpec& a,
                                const ObservableSpec& a_prime, const ObservableSpec& b,
                                const HamiltonianSpec& h) {
    h.validate();
    Hamiltonian op = Hamiltonian::from_spec(h);
    const double hbar = h.constants.hbar;
    ArmPair arms = build_arms(phi, a, a_prime, b, hbar);

    SignalReport report;
    report.e_a = arms.e0_a;
    report.e_aprime = arms.e0_ap;
    report.delta = arms.e0_a - arms.e0_ap;
    report.delta1 = ensemble_rate(arms.a, b, op) - ensemble_rate(arms.a_prime, b, op);
    report.t = 0.0;
    report.s = a_prime.kind == ObservableKind::Position ? a_prime.s_loc : 0.0;
    report.d_b = h.constants.D;

    if (a_prime.kind == ObservableKind::Position &&
        b.kind == ObservableKind::CustomDiagonal) {
        GridPtr g1 = one_particle_grid(*phi.grid());
        const AdmissibleSRange range = admissible_s_range(*g1);
        if (a_prime.s_loc >= range.s_min && a_prime.s_loc <= range.s_max) {
            report.delta1_localized =
                localized_arm_rate(arms.a_prime, b, op, a_prime.s_loc, g1);
            report.has_localized = true;
        }
    }
    return report;
}

SignalReport signal_difference(const ComplexField& phi, const ObservableSpec& a,
                               const ObservableSpec& a_prime, const ObservableSpec& b,
                               const HamiltonianSpec& h, double t,
                               const EvolutionParams& params) {
    if (!(t > 0.0)) throw std::invalid_argument("signal_difference: t must be positive");
    h.validate();
    Hamiltonian op = Hamiltonian::from_spec(h);
    const double hbar = h.constants.hbar;
    ArmPair arms = build_arms(phi, a, a_prime, b, hbar);
    const double delta0 = arms.e0_a - arms.e0_ap;

    const double e_a_t = expected_value_after(arms.a, b, h, t, params);
    const double e_ap_t = expected_value_after(arms.a_prime, b, h, t, params);
    const double e_a_half = expected_value_after(arms.a, b, h, 0.5 * t, params);
    const double e_ap_half = expected_value_after(arms.a_prime, b, h, 0.5 * t, params);

    SignalReport report;
    report.e_a = e_a_t;
    report.e_aprime = e_ap_t;
    report.delta = e_a_t - e_ap_t;
    report.delta1 = ensemble_rate(arms.a, b, op) - ensemble_rate(arms.a_prime, b, op);
    report.fd_slope = (report.delta - delta0) / t;
    report.fd_slope_half = ((e_a_half - e_ap_half) - delta0) / (0.5 * t);
    report.t = t;
    report.s = a_prime.kind == ObservableKind::Position ? a_prime.s_loc : 0.0;
    report.d_b = h.constants.D;

    // Delta(t) = Delta0 + t Delta1 + a t^2: |a t| = 2|slope - slope_half|.
    const double quad = 2.0 * std::abs(report.fd_slope - report.fd_slope_half);
    if (std::abs(report.delta1) > 1e-12) {
        report.curvature_ok = quad <= 0.1 * std::abs(report.delta1);
    }
    return report;
}

}  // namespace nlq
