#ifndef NLQ_SIGNALING_HPP
#define NLQ_SIGNALING_HPP

#include "nlq/evolve.hpp"

namespace nlq {

enum class ObservableKind { Position, Momentum, CustomDiagonal, CustomMatrix };

/// A hermitian observable on one subsystem of a two-particle state (or on a
/// one-particle state after collapse). Position measurements are regularized:
/// outcomes are Gaussian windows of sharpness s_loc (width 1/sqrt(2 s_loc)).
struct ObservableSpec {
    ObservableKind kind = ObservableKind::CustomDiagonal;
    int subsystem = 1;  // 1 | 2
    std::string label;
    RealField diagonal;            // CustomDiagonal: multiplication values
    std::vector<Complex> matrix;   // CustomMatrix: row-major m x m
    double s_loc = 0.0;            // Position only

    static ObservableSpec position(int subsystem, double s_loc);
    static ObservableSpec momentum(int subsystem);
    static ObservableSpec multiplication(int subsystem, RealField values,
                                         std::string label = "b");
    static ObservableSpec matrix_observable(int subsystem, std::vector<Complex> m,
                                            std::string label = "custom");
};

/// Applies the observable to a one-particle field (hbar needed for Momentum).
ComplexField apply_observable(const ObservableSpec& b, const ComplexField& psi,
                              double hbar);

struct ConditionalOutcome {
    double value;        // eigenvalue / outcome coordinate
    double weight;       // Born weight, normalized over the ensemble
    ComplexField state;  // normalized conditional state of the other subsystem
};

struct ConditionalEnsemble {
    std::vector<ConditionalOutcome> outcomes;
    std::string observable_label;
    int measured_subsystem = 1;

    double weight_sum() const;
};

struct EnsembleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EprState {
    ComplexField field;  // on the joint 2D grid
    int band = 0;
    double s_loc = 0.0;  // regularization for position-conditional states
};

/// Phi(x,y) proportional to sum_{|j|<=band} e^{i k_j x} e^{-i k_j y},
/// normalized; zero total momentum by construction.
EprState epr_state(const GridPtr& one_particle, int band, double s_loc);

/// Phi = (e_{+mode} (x) g1 + e_{-mode} (x) g2)/sqrt(2): a two-outcome
/// entangled state whose momentum-arm conditionals are g1, g2. The +-mode
/// pair keeps the regularized position measurement unbiased at t = 0.
ComplexField two_mode_entangled(const GridPtr& one_particle, int mode,
                                const ComplexField& g1, const ComplexField& g2);

/// Born weights and normalized conditional states of the unmeasured
/// subsystem. Position outcomes use Gaussian-regularized projectors of
/// sharpness a.s_loc; Momentum outcomes are the grid modes; Custom kinds
/// require a non-degenerate spectrum among outcomes with nonzero weight.
ConditionalEnsemble measure_conditionals(const ComplexField& phi,
                                         const ObservableSpec& a);

/// Sum_l w_l <phi_l, B phi_l> at t = 0. The imaginary residue of each
/// expectation must stay below 1e-12; it is asserted, not dropped.
double expected_value(const ConditionalEnsemble& ens, const ObservableSpec& b,
                      double hbar);

/// Each conditional state evolved for time t under h (one-particle), then the
/// weighted B-expectation. Outcome evolutions run in parallel.
double expected_value_after(const ConditionalEnsemble& ens, const ObservableSpec& b,
                            const HamiltonianSpec& h, double t,
                            const EvolutionParams& params);

struct SignalReport {
    double e_a = 0.0;             // E(B,t|A)
    double e_aprime = 0.0;        // E(B,t|A')
    double delta = 0.0;           // E(B,t|A) - E(B,t|A')
    double delta1 = 0.0;          // (2/hbar) sum_l w_l Im(B phi_l, H phi_l) difference
    double delta1_localized = 0.0;  // sharp-localization calculus, position arm
    bool has_localized = false;
    double fd_slope = 0.0;        // (Delta(t) - Delta(0))/t
    double fd_slope_half = 0.0;
    bool curvature_ok = true;     // O(t^2) <= 10% of t*Delta1 when resolvable
    double t = 0.0;
    double s = 0.0;               // position-arm localization sharpness
    double d_b = 0.0;
};

/// First-order signal amplitude from the quoted rate formula. Verifies
/// Delta(B,0|A,A') <= 1e-9 first and throws EnsembleError otherwise.
/// When A' is a position measurement and B a multiplication observable, the
/// report also carries the sharp-localization rate (one regularized delta
/// paired against B as a test function, averaged over the position measure).
SignalReport first_order_signal(const ComplexField& phi, const ObservableSpec& a,
                                const ObservableSpec& a_prime, const ObservableSpec& b,
                                const HamiltonianSpec& h);

/// Full nonlinear Delta(B,t|A,A') with the finite-difference slope against
/// delta1, including the halved-t curvature check.
SignalReport signal_difference(const ComplexField& phi, const ObservableSpec& a,
                               const ObservableSpec& a_prime, const ObservableSpec& b,
                               const HamiltonianSpec& h, double t,
                               const EvolutionParams& params);

}  // namespace nlq

#endif
