#ifndef NLQ_SEPARATION_HPP
#define NLQ_SEPARATION_HPP

#include "nlq/evolve.hpp"

namespace nlq {

struct SeparationReport {
    std::vector<double> times;
    std::vector<double> defect;     // phase-aligned L2 distance per recorded time
    double max_defect = 0.0;
    double linear_floor = 0.0;      // max defect of the kinetic-only control run
    bool separating = false;
    std::string verdict;            // "separating" | "correlation-generating"
};

/// Evolves psi1 (x) psi2 jointly under compose_two_particle(tp) and each factor
/// under its own spec; reports the defect ||Psi_joint - e^{i a} psi1 (x) psi2||
/// with a single global phase optimized out. Verdict "separating" means
/// max defect <= tolerance; linear_floor carries the kinetic-only control
/// defect at the same resolution for attribution.
SeparationReport separation_defect(const ComplexField& psi1, const ComplexField& psi2,
                                   const TwoParticleHamiltonian& tp,
                                   const EvolutionParams& params,
                                   double tolerance = 1e-5);

}  // namespace nlq

#endif
