#ifndef NLQ_REGULARIZATION_HPP
#define NLQ_REGULARIZATION_HPP

#include "nlq/evolve.hpp"
#include "nlq/fit.hpp"

namespace nlq {

/// Gaussian-regularized delta delta^(s)(y) = (s/pi)^{n/2} exp(-s(y-w)^2),
/// realized as an exactly periodic field with unit integral (the DC Fourier
/// coefficient is pinned to 1/L^n).
struct RegularizedDelta {
    double s = 0.0;
    std::vector<double> center;
    ComplexField field;
    double integral = 0.0;  // recorded at construction
    double width = 0.0;     // sigma = 1/sqrt(2 s)
};

struct AdmissibleSRange {
    double s_min;  // in-box mass >= 1 - 1e-6
    double s_max;  // sigma >= 4 dx resolvability guard
};

AdmissibleSRange admissible_s_range(const Grid& grid);

/// Throws (naming the admissible maximum) if s violates the guards.
RegularizedDelta gaussian_delta(const GridPtr& grid, double s,
                                const std::vector<double>& center);

/// integral of f * N(delta^(s)) dy^n with N from the term catalog;
/// delta^(s) > 0 everywhere so the floor never activates.
double pair_nl_with_test(double s, const RealField& f, const PhysicalConstants& c,
                         const std::vector<double>& center);

/// Fit pairing(s) = a s + b + c/s over >= 4 s-values spanning a decade.
/// Targets: a -> 2 n f(w), b -> (n/2 + 1) (lap f)(w).
struct AsymptoticFit {
    double a = 0.0, b = 0.0, c = 0.0;
    double rms_residual = 0.0;
    double a_target = 0.0, b_target = 0.0;
    double a_rel_err = 0.0, b_rel_err = 0.0;
    std::vector<double> s_values;
    std::vector<double> pairings;
};

AsymptoticFit asymptotic_slope(std::span<const double> s_values, const RealField& f,
                               const PhysicalConstants& c,
                               const std::vector<double>& center);

/// First-order signal rate of the sharp-localization calculus: one
/// L1-normalized regularized delta paired against the multiplication
/// observable b as a test function,
///   r_s(w) = (2/hbar) Im  integral of b(y) (H delta^(s)_w)(y) dy^n.
/// Real terms pair to zero; the DG term yields 2 D (2 n s b(w) +
/// (n/2 + 2) lap b(w)) + O(1/s).
double localized_signal_rate(const RegularizedDelta& delta, const RealField& b,
                             const Hamiltonian& h);

}  // namespace nlq

#endif
