#include "nlq/evolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace nlq {

void EvolutionParams::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("evolution: dt must be positive");
    if (steps < 0) throw std::invalid_argument("evolution: steps must be >= 0");
    if (record_every < 1) {
        throw std::invalid_argument("evolution: record_every must be >= 1");
    }
}

Hamiltonian Hamiltonian::from_spec(const HamiltonianSpec& spec) {
    spec.validate();
    Hamiltonian h;
    for (const TermSpec& t : spec.terms) {
        h.add(Entry{t, spec.constants, {}});
    }
    return h;
}

ComplexField Hamiltonian::apply(const ComplexField& psi) const {
    if (entries_.empty() && !extra_) {
        throw std::logic_error("hamiltonian: empty operator");
    }
    ComplexField out(psi.grid());
    for (const Entry& e : entries_) {
        out += apply_term(e.term, psi, e.constants, e.axes);
    }
    if (extra_) out += extra_(psi);
    return out;
}

bool Hamiltonian::split_step_eligible() const {
    if (extra_) return false;
    int full_kinetic = 0;
    for (const Entry& e : entries_) {
        switch (e.term.kind) {
            case TermKind::Kinetic:
                if (!e.axes.empty()) return false;
                ++full_kinetic;
                break;
            case TermKind::Potential:
            case TermKind::BbmLog:
            case TermKind::Kostin:
            case TermKind::CubicNls:
                break;
            default:
                return false;  // DgImag / GenericR carry gradients, not pointwise
        }
    }
    return full_kinetic == 1;
}

double Hamiltonian::hbar() const {
    if (entries_.empty()) throw std::logic_error("hamiltonian: no entries");
    const double h = entries_.front().constants.hbar;
    for (const Entry& e : entries_) {
        if (e.constants.hbar != h) {
            throw std::invalid_argument("hamiltonian: inconsistent hbar across terms");
        }
    }
    return h;
}

double Hamiltonian::stability_dt_bound(const Grid& grid) const {
    double bound = std::numeric_limits<double>::infinity();
    const double dx2 = grid.dx() * grid.dx();
    for (const Entry& e : entries_) {
        const double mh = e.constants.mass / e.constants.hbar;
        const double b = 0.5 * dx2 * mh / (1.0 + std::abs(e.constants.D) * mh);
        bound = std::min(bound, b);
    }
    return bound;
}

namespace {

void check_state(const ComplexField& psi, double norm0, long step, double time) {
    if (!psi.all_finite()) {
        throw InstabilityError("evolution aborted: non-finite amplitudes at step " +
                                   std::to_string(step),
                               step, time, std::numeric_limits<double>::quiet_NaN());
    }
    const double drift = std::abs(psi.norm() - norm0);
    if (drift > 1e-3) {
        throw InstabilityError(
            "evolution aborted: norm drift " + std::to_string(drift) +
                " exceeds 1e-3 at step " + std::to_string(step),
            step, time, drift);
    }
}

void rk4_step(const Hamiltonian& h, double dt, double inv_hbar, ComplexField& psi) {
    const Complex minus_i_over_hbar{0.0, -inv_hbar};
    ComplexField k1 = minus_i_over_hbar * h.apply(psi);
    ComplexField stage = psi;
    axpy(0.5 * dt, k1, stage);
    ComplexField k2 = minus_i_over_hbar * h.apply(stage);
    stage = psi;
    axpy(0.5 * dt, k2, stage);
    ComplexField k3 = minus_i_over_hbar * h.apply(stage);
    stage = psi;
    axpy(dt, k3, stage);
    ComplexField k4 = minus_i_over_hbar * h.apply(stage);
    axpy(dt / 6.0, k1, psi);
    axpy(dt / 3.0, k2, psi);
    axpy(dt / 3.0, k3, psi);
    axpy(dt / 6.0, k4, psi);
}

class SplitStepper {
public:
    SplitStepper(const Hamiltonian& h, const Grid& grid, double dt) : h_(h), dt_(dt) {
        // Half-step kinetic phase per spectral point.
        const Hamiltonian::Entry* kin = nullptr;
        for (const auto& e : h.entries()) {
            if (e.term.kind == TermKind::Kinetic) kin = &e;
        }
        const double hbar = kin->constants.hbar;
        const double mass = kin->constants.mass;
        half_kick_.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double k2 = 0.0;
            for (int d = 0; d < grid.n_dims(); ++d) {
                const double k = grid.wavenumber(grid.index_along(i, d));
                k2 += k * k;
            }
            const double phase = -hbar * k2 / (2.0 * mass) * (0.5 * dt);
            half_kick_[i] = std::polar(1.0, phase);
        }
    }

    void step(ComplexField& psi) const {
        kinetic_half(psi);
        nonlinear_full(psi);
        kinetic_half(psi);
    }

private:
    void kinetic_half(ComplexField& psi) const {
        std::vector<Complex> spec = fft_forward(psi);
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= half_kick_[i];
        psi = fft_backward(psi.grid(), std::move(spec));
    }

    // The pointwise terms are real multipliers, so the modulus is constant
    // along the subflow and the phase obeys a linear ODE per point:
    //   theta' = -(V + p ln A + g A^2)/hbar + (2q/hbar) theta.
    void nonlinear_full(ComplexField& psi) const {
        for (const auto& e : h_.entries()) {
            if (e.term.kind == TermKind::Kinetic) continue;
            const PhysicalConstants& c = e.constants;
            const double hbar = c.hbar;
            switch (e.term.kind) {
                case TermKind::Potential: {
                    const RealField& v = e.term.potential;
                    for (std::size_t i = 0; i < psi.size(); ++i) {
                        psi[i] *= std::polar(1.0, -v[i] * dt_ / hbar);
                    }
                    break;
                }
                case TermKind::BbmLog: {
                    double cap = 0.0;
                    for (std::size_t i = 0; i < psi.size(); ++i) {
                        cap = std::max(cap, std::norm(psi[i]));
                    }
                    cap *= c.amplitude_floor;
                    for (std::size_t i = 0; i < psi.size(); ++i) {
                        const double lnmod =
                            0.5 * std::log(std::max(std::norm(psi[i]), cap));
                        psi[i] *= std::polar(1.0, -c.p_bbm * lnmod * dt_ / hbar);
                    }
                    break;
                }
                case TermKind::CubicNls: {
                    for (std::size_t i = 0; i < psi.size(); ++i) {
                        psi[i] *= std::polar(
                            1.0, -e.term.cubic_g * std::norm(psi[i]) * dt_ / hbar);
                    }
                    break;
                }
                case TermKind::Kostin: {
                    // theta' = (2q/hbar) theta, exact exponential per point.
                    const double factor = std::exp(2.0 * c.q_kostin * dt_ / hbar);
                    for (std::size_t i = 0; i < psi.size(); ++i) {
                        const double a = std::abs(psi[i]);
                        if (a == 0.0) continue;
                        psi[i] = std::polar(a, std::arg(psi[i]) * factor);
                    }
                    break;
                }
                default:
                    throw std::logic_error("split-step: non-pointwise term");
            }
        }
    }

    const Hamiltonian& h_;
    double dt_;
    std::vector<Complex> half_kick_;
};

}  // namespace

Trajectory evolve(const ComplexField& psi0, const Hamiltonian& h,
                  const EvolutionParams& params) {
    params.validate();
    if (!psi0.is_normalized(1e-8)) {
        throw std::invalid_argument("evolve: initial state must be normalized");
    }
    const Grid& grid = *psi0.grid();

    if (params.integrator == Integrator::Rk4 && !params.override_stability) {
        const double bound = h.stability_dt_bound(grid);
        if (params.dt > bound) {
            throw std::invalid_argument(
                "evolve: dt = " + std::to_string(params.dt) +
                " exceeds the stability bound " + std::to_string(bound) +
                " (use the override flag to force)");
        }
    }
    if (params.integrator == Integrator::SplitStep && !h.split_step_eligible()) {
        throw std::invalid_argument(
            "evolve: split-step requires one full kinetic term plus pointwise "
            "nonlinear terms only");
    }

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.snapshots.push_back(psi0);
    const double norm0 = psi0.norm();
    traj.norms.push_back(norm0);

    ComplexField psi = psi0;
    const double inv_hbar = 1.0 / h.hbar();
    std::optional<SplitStepper> split;
    if (params.integrator == Integrator::SplitStep) {
        split.emplace(h, grid, params.dt);
    }

    for (long step = 1; step <= params.steps; ++step) {
        if (split) {
            split->step(psi);
        } else {
            rk4_step(h, params.dt, inv_hbar, psi);
        }
        const double t = params.dt * step;
        if (step % params.record_every == 0 || step == params.steps) {
            check_state(psi, norm0, step, t);
            traj.times.push_back(t);
            traj.snapshots.push_back(psi);
            traj.norms.push_back(psi.norm());
        }
    }
    traj.final_norm_drift = std::abs(traj.norms.back() - norm0);
    return traj;
}

Trajectory evolve(const ComplexField& psi0, const HamiltonianSpec& h,
                  const EvolutionParams& params) {
    return evolve(psi0, Hamiltonian::from_spec(h), params);
}

GridPtr joint_grid(const Grid& one_particle) {
    if (one_particle.n_dims() != 1) {
        throw std::invalid_argument("joint_grid: only 1D one-particle grids supported");
    }
    return make_grid(2, one_particle.points_per_dim(), one_particle.extent());
}

namespace {

bool universal_pointwise(TermKind kind) {
    // Whole-state terms built from |Psi| or arg(Psi): they enter the joint
    // operator once, not once per coordinate block. Their separation rests on
    // ln|psi1 psi2| = ln|psi1| + ln|psi2| (and the arg analogue), not on a
    // block restriction.
    return kind == TermKind::BbmLog || kind == TermKind::Kostin ||
           kind == TermKind::CubicNls;
}

double universal_coefficient(const TermSpec& t, const PhysicalConstants& c) {
    switch (t.kind) {
        case TermKind::BbmLog: return c.p_bbm;
        case TermKind::Kostin: return c.q_kostin;
        case TermKind::CubicNls: return t.cubic_g;
        default: return 0.0;
    }
}

}  // namespace

Hamiltonian compose_two_particle(const TwoParticleHamiltonian& tp,
                                 const GridPtr& joint) {
    tp.k1.validate();
    tp.k2.validate();
    if (joint->n_dims() != 2) {
        throw std::invalid_argument("compose_two_particle: joint grid must be 2D");
    }
    if (tp.k1.constants.hbar != tp.k2.constants.hbar) {
        throw std::invalid_argument("compose_two_particle: species disagree on hbar");
    }

    Hamiltonian h;
    struct Universal {
        TermSpec term;
        PhysicalConstants constants;
    };
    std::vector<Universal> universal;
    auto add_spec = [&](const HamiltonianSpec& spec, int axis) {
        for (const TermSpec& t : spec.terms) {
            if (universal_pointwise(t.kind)) {
                for (const Universal& u : universal) {
                    if (u.term.kind == t.kind &&
                        universal_coefficient(u.term, u.constants) !=
                            universal_coefficient(t, spec.constants)) {
                        throw std::invalid_argument(
                            std::string("compose_two_particle: the ") +
                            term_kind_name(t.kind) +
                            " constant is universal and must agree across species");
                    }
                }
                const bool seen =
                    std::any_of(universal.begin(), universal.end(),
                                [&](const Universal& u) { return u.term.kind == t.kind; });
                if (!seen) universal.push_back(Universal{t, spec.constants});
            } else {
                h.add(Hamiltonian::Entry{t, spec.constants, {axis}});
            }
        }
    };
    add_spec(tp.k1, 0);
    add_spec(tp.k2, 1);
    for (Universal& u : universal) {
        h.add(Hamiltonian::Entry{std::move(u.term), u.constants, {}});
    }
    if (tp.q) h.set_extra(tp.q);
    return h;
}

ComplexField tensor_product(const ComplexField& a, const ComplexField& b) {
    const Grid& ga = *a.grid();
    const Grid& gb = *b.grid();
    if (ga.n_dims() != 1 || gb.n_dims() != 1 || !ga.compatible(gb)) {
        throw std::invalid_argument("tensor_product: matching 1D grids required");
    }
    GridPtr jg = joint_grid(ga);
    ComplexField out(jg);
    const std::size_t m = ga.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out[i * m + j] = a[i] * b[j];
        }
    }
    return out;
}

namespace {

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

CMatrix as_matrix(const ComplexField& joint) {
    const Grid& g = *joint.grid();
    if (g.n_dims() != 2) {
        throw std::invalid_argument("two-particle state must live on a 2D joint grid");
    }
    const int m = g.points_per_dim();
    CMatrix mat(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            mat(i, j) = joint[static_cast<std::size_t>(i) * m + j];
        }
    }
    return mat;
}

}  // namespace

std::function<ComplexField(const ComplexField&)> make_projector_q(double coupling) {
    return [coupling](const ComplexField& psi) {
        CMatrix mat = as_matrix(psi);
        Eigen::JacobiSVD<CMatrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        CMatrix rank1 = sv(0) * svd.matrixU().col(0) * svd.matrixV().col(0).adjoint();
        ComplexField out(psi.grid());
        const int m = psi.grid()->points_per_dim();
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                out[static_cast<std::size_t>(i) * m + j] =
                    coupling * (mat(i, j) - rank1(i, j));
            }
        }
        return out;
    };
}

std::vector<double> schmidt_coefficients(const ComplexField& joint) {
    CMatrix mat = as_matrix(joint);
    Eigen::JacobiSVD<CMatrix> svd(mat);
    const auto& sv = svd.singularValues();
    // The matrix carries raw amplitudes; scale by dx so squared coefficients
    // sum to the L2 norm^2 of the joint state.
    const double dx = joint.grid()->dx();
    std::vector<double> out(static_cast<std::size_t>(sv.size()));
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        out[static_cast<std::size_t>(i)] = sv(i) * dx;
    }
    return out;
}

}  // namespace nlq
