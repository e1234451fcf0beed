#ifndef NLQ_DISPERSION_HPP
#define NLQ_DISPERSION_HPP

#include <array>

#include "nlq/evolve.hpp"
#include "nlq/fit.hpp"

namespace nlq {

struct DispersionSample {
    double k;
    double omega;
    double amplitude;
};

struct DispersionProbe {
    double window = 1.0;  // probe duration per mode
    double dt = 0.0;      // 0 = choose from the stability and phase bounds
};

struct NotPlaneWaveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Evolves box-normalized unit-amplitude plane waves e^{ikx} for each
/// grid-commensurate mode and extracts omega from an unwrapped linear fit of
/// the mode-coefficient phase. Throws NotPlaneWaveError if the modulus shape
/// changes by more than 1e-6 relative over the window.
std::vector<DispersionSample> extract_dispersion(const HamiltonianSpec& h,
                                                 const GridPtr& grid,
                                                 std::span<const int> modes,
                                                 const DispersionProbe& probe = {});

struct DispersionFit {
    std::array<double, 4> c{};  // omega(k) = c0 + c1 k + c2 k^2 + c3 k^3
    double rms_residual = 0.0;
    double condition = 0.0;
};

/// Least-squares cubic: needs >= 6 distinct |k|; throws when the k values are
/// too clustered for a stable fit.
DispersionFit fit_dispersion(std::span<const DispersionSample> samples);

/// E = sqrt(m^2 c^4 + p^2 + kappa l_p p^3) in code units with c = 1.
/// Throws when the cubic correction drives E^2 negative.
double modified_dispersion_energy(double mass, double p, double kappa,
                                  double planck_length);

/// Synthetic (p, E) samples from the closed-form relation.
std::vector<DispersionSample> modified_dispersion_samples(double mass, double kappa,
                                                          double planck_length,
                                                          std::span<const double> momenta);

struct ModifiedDispersionRefit {
    double mass_sq = 0.0;   // fitted constant term of E^2
    double c2 = 0.0;        // fitted p^2 coefficient (1 for the exact relation)
    double kappa = 0.0;     // fitted p^3 coefficient divided by planck_length
    double rms_residual = 0.0;
};

/// Fits E^2(p) = a0 + a2 p^2 + a3 p^3 (the exact polynomial form of the
/// modified relation) and reads kappa off the cubic coefficient.
ModifiedDispersionRefit refit_modified_dispersion(std::span<const DispersionSample> samples,
                                                  double planck_length);

/// Energy ratio E_planck / E_ray; the reference scales give ~3.17e7.
double planck_ratio(double planck_energy_ev = 1e28,
                    double ray_energy_ev = 3.16227766016837933e20);

}  // namespace nlq

#endif
