#ifndef NLQ_DIAGNOSTICS_HPP
#define NLQ_DIAGNOSTICS_HPP

#include "nlq/evolve.hpp"

namespace nlq {

struct DensityCurrent {
    RealField rho;                      // |psi|^2
    std::vector<RealField> current;     // J_i = (hbar/m) Im(conj(psi) d_i psi)
};

DensityCurrent density_current(const ComplexField& psi, const PhysicalConstants& c);

/// max over interior snapshot times of ||d_t rho + div J - D lap rho||_2 /
/// ||d_t rho||_2, with d_t by centered differences on the stored snapshots.
/// D = 0 gives the continuity-equation residual. Needs >= 3 uniformly spaced
/// snapshots.
double fokker_planck_residual(const Trajectory& traj, double D,
                              const PhysicalConstants& c);

struct FpSeriesPoint {
    double time;
    double residual;
};

/// Per-interior-snapshot relative residual; fokker_planck_residual is its max.
std::vector<FpSeriesPoint> fokker_planck_residual_series(const Trajectory& traj,
                                                         double D,
                                                         const PhysicalConstants& c);

struct FpScanPoint {
    double D;
    double residual;
};

/// Residual over a scan of D values; the minimizing D is the Fokker-Planck
/// signature of the trajectory.
std::vector<FpScanPoint> fokker_planck_scan(const Trajectory& traj,
                                            std::span<const double> d_values,
                                            const PhysicalConstants& c);

}  // namespace nlq

#endif
