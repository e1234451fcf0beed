#include "nlq/dispersion.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "nlq/parallel.hpp"
#include "nlq/spectral.hpp"

namespace nlq {

namespace {

DispersionSample probe_mode(const HamiltonianSpec& h, const GridPtr& grid, int mode,
                            const DispersionProbe& probe) {
    const Grid& g = *grid;
    const int m = g.points_per_dim();
    if (mode <= -m / 2 || mode > (m - 1) / 2) {
        throw std::invalid_argument("extract_dispersion: mode outside the grid band");
    }
    const double k = 2.0 * std::numbers::pi * mode / g.extent();

    const double amp = 1.0 / std::sqrt(g.extent());
    ComplexField psi0(grid);
    for (std::size_t i = 0; i < psi0.size(); ++i) {
        psi0[i] = std::polar(amp, k * g.coordinate(g.index_along(i, 0)));
    }

    Hamiltonian op = Hamiltonian::from_spec(h);
    double dt = probe.dt;
    if (dt <= 0.0) {
        const double omega_est =
            h.constants.hbar * k * k / (2.0 * h.constants.mass) + 1.0;
        dt = std::min(0.9 * op.stability_dt_bound(g), 0.5 / omega_est);
    }
    EvolutionParams params;
    params.dt = dt;
    params.steps = std::max<long>(8, std::lround(probe.window / dt));
    params.dt = probe.window / static_cast<double>(params.steps);
    params.record_every = 1;

    Trajectory traj = evolve(psi0, op, params);

    // Shape guard: the modulus must stay that of a plane wave.
    const ComplexField& last = traj.final_state();
    double max0 = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < last.size(); ++i) {
        max0 = std::max(max0, std::abs(psi0[i]));
        drift = std::max(drift, std::abs(std::abs(last[i]) - std::abs(psi0[i])));
    }
    if (drift > 1e-6 * max0) {
        throw NotPlaneWaveError("mode k = " + std::to_string(k) +
                                " is not a plane-wave eigenmode of this hamiltonian "
                                "(relative shape change " +
                                std::to_string(drift / max0) + ")");
    }

    // Unwrapped phase of the k-mode coefficient, linear fit in time.
    std::vector<double> times, phases;
    double prev = 0.0, offset = 0.0;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const Complex c = mode_coefficient(traj.snapshots[i], {mode});
        double ph = std::arg(c);
        if (i > 0) {
            while (ph + offset - prev > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
            while (ph + offset - prev < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
        }
        prev = ph + offset;
        times.push_back(traj.times[i]);
        phases.push_back(prev);
    }
    LeastSquaresFit fit = polynomial_fit(times, phases, 1);
    return DispersionSample{k, -fit.coefficients[1], amp};
}

}  // namespace

std::vector<DispersionSample> extract_dispersion(const HamiltonianSpec& h,
                                                 const GridPtr& grid,
                                                 std::span<const int> modes,
                                                 const DispersionProbe& probe) {
    h.validate();
    if (grid->n_dims() != 1) {
        throw std::invalid_argument("extract_dispersion: 1D grids only");
    }
    std::vector<int> mode_list(modes.begin(), modes.end());
    return parallel_map(mode_list.size(), [&](std::size_t i) {
        return probe_mode(h, grid, mode_list[i], probe);
    });
}

DispersionFit fit_dispersion(std::span<const DispersionSample> samples) {
    std::set<long> distinct;
    for (const auto& s : samples) {
        distinct.insert(std::lround(std::abs(s.k) * 1e12));
    }
    if (distinct.size() < 6) {
        throw std::invalid_argument("fit_dispersion: need >= 6 distinct |k| values");
    }
    std::vector<double> k(samples.size()), w(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        k[i] = samples[i].k;
        w[i] = samples[i].omega;
    }
    LeastSquaresFit ls = polynomial_fit(k, w, 3);
    DispersionFit fit;
    for (int i = 0; i < 4; ++i) fit.c[static_cast<std::size_t>(i)] = ls.coefficients[static_cast<std::size_t>(i)];
    fit.rms_residual = ls.rms_residual;
    fit.condition = ls.condition;
    return fit;
}

double modified_dispersion_energy(double mass, double p, double kappa,
                                  double planck_length) {
    const double e2 = mass * mass + p * p + kappa * planck_length * p * p * p;
    if (e2 < 0.0) {
        throw std::domain_error(
            "modified_dispersion_energy: E^2 < 0 for p = " + std::to_string(p));
    }
    return std::sqrt(e2);
}

std::vector<DispersionSample> modified_dispersion_samples(double mass, double kappa,
                                                          double planck_length,
                                                          std::span<const double> momenta) {
    std::vector<DispersionSample> out;
    out.reserve(momenta.size());
    for (double p : momenta) {
        out.push_back(DispersionSample{p, modified_dispersion_energy(mass, p, kappa,
                                                                     planck_length),
                                       0.0});
    }
    return out;
}

ModifiedDispersionRefit refit_modified_dispersion(std::span<const DispersionSample> samples,
                                                  double planck_length) {
    if (!(planck_length > 0.0)) {
        throw std::invalid_argument("refit: planck_length must be positive");
    }
    std::vector<double> y(samples.size());
    std::vector<std::vector<double>> cols(3, std::vector<double>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double p = samples[i].k;
        y[i] = samples[i].omega * samples[i].omega;
        cols[0][i] = 1.0;
        cols[1][i] = p * p;
        cols[2][i] = p * p * p;
    }
    LeastSquaresFit ls = least_squares(cols, y);
    ModifiedDispersionRefit refit;
    refit.mass_sq = ls.coefficients[0];
    refit.c2 = ls.coefficients[1];
    refit.kappa = ls.coefficients[2] / planck_length;
    refit.rms_residual = ls.rms_residual;
    return refit;
}

double planck_ratio(double planck_energy_ev, double ray_energy_ev) {
    if (!(planck_energy_ev > 0.0) || !(ray_energy_ev > 0.0)) {
        throw std::invalid_argument("planck_ratio: energies must be positive");
    }
    return planck_energy_ev / ray_energy_ev;
}

}  // namespace nlq
