#ifndef NLQ_TESTS_SUPPORT_HPP
#define NLQ_TESTS_SUPPORT_HPP

#include <cmath>
#include <numbers>
#include <random>

#include "nlq/field.hpp"
#include "nlq/spectral.hpp"

namespace nlq::testing {

inline constexpr double kPi = std::numbers::pi;

/// Smooth random field: random complex coefficients on modes |j| <= band per
/// axis, deterministic for a given seed. Normalized.
inline ComplexField random_band_limited(const GridPtr& grid, int band,
                                        unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Complex> spec(grid->size(), Complex{0.0, 0.0});
    const Grid& g = *grid;
    const int m = g.points_per_dim();
    for (std::size_t i = 0; i < spec.size(); ++i) {
        bool in_band = true;
        for (int d = 0; d < g.n_dims(); ++d) {
            int j = g.index_along(i, d);
            if (j > (m - 1) / 2) j -= m;
            in_band &= std::abs(j) <= band;
        }
        if (in_band) spec[i] = Complex{gauss(rng), gauss(rng)};
    }
    ComplexField f = fft_backward(grid, std::move(spec));
    f.normalize();
    return f;
}

/// Wrapped Gaussian wavepacket, normalized on the torus.
inline ComplexField gaussian_packet(const GridPtr& grid, double sigma, double center,
                                    int momentum_mode = 0) {
    const Grid& g = *grid;
    const double l = g.extent();
    const double k = 2.0 * kPi * momentum_mode / l;
    ComplexField psi(grid);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        double d2 = 0.0;
        for (int d = 0; d < g.n_dims(); ++d) {
            double dx = g.coordinate(g.index_along(i, d)) - center;
            dx -= l * std::round(dx / l);
            d2 += dx * dx;
        }
        const double x0 = g.coordinate(g.index_along(i, 0));
        psi[i] = std::polar(std::exp(-d2 / (2.0 * sigma * sigma)), k * x0);
    }
    psi.normalize();
    return psi;
}

/// Box-normalized plane wave e^{i k x} with k = 2 pi mode / L.
inline ComplexField plane_wave(const GridPtr& grid, int mode) {
    const Grid& g = *grid;
    const double k = 2.0 * kPi * mode / g.extent();
    const double amp = 1.0 / std::sqrt(std::pow(g.extent(), g.n_dims()));
    ComplexField psi(grid);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        psi[i] = std::polar(amp, k * g.coordinate(g.index_along(i, 0)));
    }
    return psi;
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double rel_l2_diff(const ComplexField& a, const ComplexField& b) {
    ComplexField d = a;
    d -= b;
    const double nb = b.norm();
    return nb > 0 ? d.norm() / nb : d.norm();
}

/// Fourth-order central second derivative along one axis, periodic.
inline ComplexField fd_second_derivative(const ComplexField& f, int axis) {
    const Grid& g = *f.grid();
    const int m = g.points_per_dim();
    const double dx2 = g.dx() * g.dx();
    ComplexField out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const int j = g.index_along(i, axis);
        const std::size_t stride = g.stride(axis);
        const std::size_t base = i - static_cast<std::size_t>(j) * stride;
        auto at = [&](int jj) {
            int w = ((jj % m) + m) % m;
            return f[base + static_cast<std::size_t>(w) * stride];
        };
        out[i] = (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) -
                  at(j + 2)) /
                 (12.0 * dx2);
    }
    return out;
}

}  // namespace nlq::testing

#endif
