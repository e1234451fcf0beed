#ifndef NLQ_AMPLIFICATION_HPP
#define NLQ_AMPLIFICATION_HPP

#include "nlq/regularization.hpp"
#include "nlq/signaling.hpp"

namespace nlq {

struct AmplificationReport {
    std::vector<double> s_values;
    std::vector<double> delta1;          // localized first-order rate per s
    std::vector<double> delta1_ensemble; // literal ensemble-formula rate per s
    std::vector<double> b_expect;        // ensemble-averaged (phi, B phi) per s
    double alpha = 0.0;                  // slope of delta1 vs s
    double beta = 0.0;
    double rms_residual = 0.0;
    double remainder_max = 0.0;          // max |delta1 - (alpha s + beta)|
    double b_expectation = 0.0;          // mean over s of the ensemble averages
    double law_ratio = 0.0;              // alpha / (4 n D_b <B>), 0 when D_b = 0
    int n_dims = 1;
    double d_b = 0.0;
    int band = 0;
};

/// Sweeps the localization sharpness on the EPR state: for each s the
/// momentum-vs-position first-order signal is computed and the localized rate
/// fitted as alpha*s + beta, compared against 4 n D_b (phi, B phi) with the
/// B-expectation taken from the same ensembles. The hamiltonian is
/// kinetic + the given nonlinear terms (DG for the amplification law itself,
/// BBM/Kostin/real-R for the bounded controls).
AmplificationReport amplification_experiment(const GridPtr& one_particle, int band,
                                             std::span<const double> s_values,
                                             const HamiltonianSpec& h,
                                             const ObservableSpec& b);

/// Convenience wrapper: kinetic + DG with D = d_b.
AmplificationReport amplification_experiment(const GridPtr& one_particle, int band,
                                             std::span<const double> s_values,
                                             double d_b, const ObservableSpec& b,
                                             PhysicalConstants constants = {});

}  // namespace nlq

#endif
