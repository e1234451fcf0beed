#ifndef NLQ_EVOLVE_HPP
#define NLQ_EVOLVE_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlq/terms.hpp"

namespace nlq {

enum class Integrator { Rk4, SplitStep };

struct EvolutionParams {
    double dt = 1e-3;
    long steps = 0;
    Integrator integrator = Integrator::Rk4;
    long record_every = 1;
    bool override_stability = false;

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ComplexField> snapshots;  // first entry is the initial state
    std::vector<double> norms;
    double final_norm_drift = 0.0;

    const ComplexField& final_state() const { return snapshots.back(); }
};

struct InstabilityError : std::runtime_error {
    InstabilityError(const std::string& msg, long step, double time, double drift)
        : std::runtime_error(msg), step(step), time(time), norm_drift(drift) {}
    long step;
    double time;
    double norm_drift;
};

/// Runtime Hamiltonian: a sum of axis-scoped catalog terms plus an optional
/// extra operator (the two-particle Q).
class Hamiltonian {
public:
    struct Entry {
        TermSpec term;
        PhysicalConstants constants;
        std::vector<int> axes;  // empty = all axes
    };

    Hamiltonian() = default;
    static Hamiltonian from_spec(const HamiltonianSpec& spec);

    void add(Entry e) { entries_.push_back(std::move(e)); }
    void set_extra(std::function<ComplexField(const ComplexField&)> q) {
        extra_ = std::move(q);
    }

    ComplexField apply(const ComplexField& psi) const;
    const std::vector<Entry>& entries() const { return entries_; }
    bool has_extra() const { return static_cast<bool>(extra_); }

    /// All of Potential/BbmLog/Kostin/CubicNls plus exactly one full-axes
    /// Kinetic entry; the split-step integrator accepts only this shape.
    bool split_step_eligible() const;

    double hbar() const;
    /// min over entries of 0.5 dx^2 (m/hbar) / (1 + |D| m/hbar).
    double stability_dt_bound(const Grid& grid) const;

private:
    std::vector<Entry> entries_;
    std::function<ComplexField(const ComplexField&)> extra_;
};

/// Integrates i hbar d_t psi = H psi. RK4 applies the full right-hand side;
/// SplitStep alternates the exact spectral kinetic flow with the exact
/// pointwise nonlinear phase flow (Strang). Aborts with InstabilityError on
/// norm drift > 1e-3 or non-finite values.
Trajectory evolve(const ComplexField& psi0, const Hamiltonian& h,
                  const EvolutionParams& params);
Trajectory evolve(const ComplexField& psi0, const HamiltonianSpec& h,
                  const EvolutionParams& params);

struct TwoParticleHamiltonian {
    HamiltonianSpec k1;  // acts on the first coordinate block
    HamiltonianSpec k2;  // acts on the second coordinate block
    std::function<ComplexField(const ComplexField&)> q;  // optional; vanishes on products
    std::string species_a = "a";
    std::string species_b = "b";
};

/// Joint grid for two matching one-particle grids (1D factors only).
GridPtr joint_grid(const Grid& one_particle);

/// Joint operator on the product grid; one-particle functionals evaluated
/// with derivatives restricted to their own coordinate block.
Hamiltonian compose_two_particle(const TwoParticleHamiltonian& tp,
                                 const GridPtr& joint);

/// psi(x,y) = a(x) b(y) on the joint grid.
ComplexField tensor_product(const ComplexField& a, const ComplexField& b);

/// Sample Q: coupling * (psi - best rank-1 approximation); vanishes
/// identically on product states. Plumbing, not a physical model.
std::function<ComplexField(const ComplexField&)> make_projector_q(double coupling);

/// Schmidt coefficients (singular values of the amplitude matrix, descending)
/// of a two-particle state on a joint 2D grid, in the normalized convention
/// where their squares sum to norm^2.
std::vector<double> schmidt_coefficients(const ComplexField& joint);

}  // namespace nlq

#endif
