#include "nlq/diagnostics.hpp"

#include <cmath>

namespace nlq {

DensityCurrent density_current(const ComplexField& psi, const PhysicalConstants& c) {
    DensityCurrent dc;
    dc.rho = density_of(psi);
    const double scale = c.hbar / c.mass;
    for (int d = 0; d < psi.grid()->n_dims(); ++d) {
        ComplexField grad = partial_derivative(psi, d);
        RealField j(psi.grid());
        for (std::size_t i = 0; i < psi.size(); ++i) {
            j[i] = scale * std::imag(std::conj(psi[i]) * grad[i]);
        }
        dc.current.push_back(std::move(j));
    }
    return dc;
}

namespace {

ComplexField as_complex(const RealField& f) {
    ComplexField out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = Complex{f[i], 0.0};
    return out;
}

double l2_norm(const RealField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i];
    return std::sqrt(s * f.grid()->cell_volume());
}

RealField divergence(const std::vector<RealField>& current) {
    RealField div(current.front().grid());
    for (int d = 0; d < div.grid()->n_dims(); ++d) {
        ComplexField grad = partial_derivative(as_complex(current[static_cast<std::size_t>(d)]), d);
        for (std::size_t i = 0; i < div.size(); ++i) div[i] += grad[i].real();
    }
    return div;
}

}  // namespace

std::vector<FpSeriesPoint> fokker_planck_residual_series(const Trajectory& traj,
                                                         double D,
                                                         const PhysicalConstants& c) {
    const std::size_t n = traj.snapshots.size();
    if (n < 3) {
        throw std::invalid_argument("fokker_planck_residual: need >= 3 snapshots");
    }
    const double dt0 = traj.times[1] - traj.times[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double step = traj.times[i + 1] - traj.times[i];
        if (std::abs(step - dt0) > 1e-9 * std::max(1.0, std::abs(dt0))) {
            throw std::invalid_argument(
                "fokker_planck_residual: snapshots must be uniformly spaced");
        }
    }

    std::vector<FpSeriesPoint> series;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        RealField rho_prev = density_of(traj.snapshots[i - 1]);
        RealField rho_next = density_of(traj.snapshots[i + 1]);
        RealField drho(rho_prev.grid());
        for (std::size_t p = 0; p < drho.size(); ++p) {
            drho[p] = (rho_next[p] - rho_prev[p]) / (2.0 * dt0);
        }

        DensityCurrent dc = density_current(traj.snapshots[i], c);
        RealField div_j = divergence(dc.current);
        ComplexField lap_rho = laplacian(as_complex(dc.rho));

        RealField residual(rho_prev.grid());
        for (std::size_t p = 0; p < residual.size(); ++p) {
            residual[p] = drho[p] + div_j[p] - D * lap_rho[p].real();
        }
        const double denom = l2_norm(drho);
        if (denom == 0.0) continue;
        series.push_back(FpSeriesPoint{traj.times[i], l2_norm(residual) / denom});
    }
    return series;
}

double fokker_planck_residual(const Trajectory& traj, double D,
                              const PhysicalConstants& c) {
    double worst = 0.0;
    for (const FpSeriesPoint& p : fokker_planck_residual_series(traj, D, c)) {
        worst = std::max(worst, p.residual);
    }
    return worst;
}

std::vector<FpScanPoint> fokker_planck_scan(const Trajectory& traj,
                                            std::span<const double> d_values,
                                            const PhysicalConstants& c) {
    std::vector<FpScanPoint> out;
    out.reserve(d_values.size());
    for (double d : d_values) {
        out.push_back(FpScanPoint{d, fokker_planck_residual(traj, d, c)});
    }
    return out;
}

}  // namespace nlq
