#include "nlq/regularization.hpp"

#include <cmath>
#include <numbers>

namespace nlq {

AdmissibleSRange admissible_s_range(const Grid& grid) {
    const double dx = grid.dx();
    // sigma = 1/sqrt(2s) >= 4 dx  =>  s <= 1/(32 dx^2)
    const double s_max = 1.0 / (32.0 * dx * dx);
    // In-box mass >= 1 - 1e-6 per axis tail: erfc(z/sqrt(2)) <= 1e-6/n at
    // z = (L/2)/sigma gives z ~ 4.9 (one-axis bound, applied per axis).
    const double z = 4.9 + 0.2 * (grid.n_dims() - 1);
    const double sigma_max = grid.extent() / (2.0 * z);
    const double s_min = 1.0 / (2.0 * sigma_max * sigma_max);
    return AdmissibleSRange{s_min, s_max};
}

RegularizedDelta gaussian_delta(const GridPtr& grid, double s,
                                const std::vector<double>& center) {
    const Grid& g = *grid;
    if (static_cast<int>(center.size()) != g.n_dims()) {
        throw std::invalid_argument("gaussian_delta: one center coordinate per axis");
    }
    const AdmissibleSRange range = admissible_s_range(g);
    if (!(s > 0.0) || s > range.s_max) {
        throw std::invalid_argument(
            "gaussian_delta: s = " + std::to_string(s) +
            " outside the resolvability guard; maximum admissible s = " +
            std::to_string(range.s_max));
    }
    if (s < range.s_min) {
        throw std::invalid_argument(
            "gaussian_delta: s = " + std::to_string(s) +
            " too small; the in-box mass guard requires s >= " +
            std::to_string(range.s_min));
    }

    // Spectral construction: the Fourier transform of the Gaussian is
    // exp(-k^2/(4s)), so setting coefficients c_k = exp(-k^2/4s) e^{-i k w}/L^n
    // realizes the periodized delta with integral exactly 1.
    std::vector<Complex> spec(g.size());
    const double ln = std::pow(g.extent(), g.n_dims());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double k2 = 0.0;
        double kw = 0.0;
        for (int d = 0; d < g.n_dims(); ++d) {
            const double k = g.wavenumber(g.index_along(i, d));
            k2 += k * k;
            kw += k * center[static_cast<std::size_t>(d)];
        }
        spec[i] = std::exp(-k2 / (4.0 * s)) * std::polar(1.0, -kw) / ln *
                  static_cast<double>(g.size());
    }
    ComplexField field = fft_backward(grid, std::move(spec));

    RegularizedDelta delta;
    delta.s = s;
    delta.center = center;
    delta.width = 1.0 / std::sqrt(2.0 * s);
    double integral = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) integral += field[i].real();
    delta.integral = integral * g.cell_volume();
    delta.field = std::move(field);
    return delta;
}

double pair_nl_with_test(double s, const RealField& f, const PhysicalConstants& c,
                         const std::vector<double>& center) {
    (void)c;
    const GridPtr& grid = f.grid();
    RegularizedDelta delta = gaussian_delta(grid, s, center);
    // The regularized delta is strictly positive, so the functional needs no
    // amplitude floor here; a floor would clip the exponential tail and bias
    // the fitted coefficients at the 1e-4 level.
    ComplexField n_delta = dg_functional(delta.field, 1e-300);
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        sum += f[i] * n_delta[i].real();
    }
    const double result = sum * grid->cell_volume();
    if (!std::isfinite(result)) {
        throw std::runtime_error("pair_nl_with_test: non-finite pairing");
    }
    return result;
}

namespace {

double value_at(const RealField& f, const std::vector<double>& point) {
    const Grid& g = *f.grid();
    std::size_t flat = 0;
    for (int d = 0; d < g.n_dims(); ++d) {
        const double x = point[static_cast<std::size_t>(d)];
        const long idx = std::lround(x / g.dx());
        if (std::abs(idx * g.dx() - x) > 1e-9 * g.extent()) {
            throw std::invalid_argument("center must lie on a grid point");
        }
        long wrapped = idx % g.points_per_dim();
        if (wrapped < 0) wrapped += g.points_per_dim();
        flat += static_cast<std::size_t>(wrapped) * g.stride(d);
    }
    return f[flat];
}

}  // namespace

AsymptoticFit asymptotic_slope(std::span<const double> s_values, const RealField& f,
                               const PhysicalConstants& c,
                               const std::vector<double>& center) {
    if (s_values.size() < 4) {
        throw std::invalid_argument("asymptotic_slope: need >= 4 s values");
    }
    double lo = s_values.front(), hi = s_values.front();
    for (double s : s_values) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (hi < 10.0 * lo) {
        throw std::invalid_argument("asymptotic_slope: s values must span a decade");
    }

    AsymptoticFit fit;
    fit.s_values.assign(s_values.begin(), s_values.end());
    for (double s : s_values) {
        fit.pairings.push_back(pair_nl_with_test(s, f, c, center));
    }

    std::vector<std::vector<double>> cols(3, std::vector<double>(s_values.size()));
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        cols[0][i] = s_values[i];
        cols[1][i] = 1.0;
        cols[2][i] = 1.0 / s_values[i];
    }
    LeastSquaresFit ls = least_squares(cols, fit.pairings);
    fit.a = ls.coefficients[0];
    fit.b = ls.coefficients[1];
    fit.c = ls.coefficients[2];
    fit.rms_residual = ls.rms_residual;

    const int n = f.grid()->n_dims();
    ComplexField fc(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) fc[i] = Complex{f[i], 0.0};
    RealField lap_f(f.grid());
    ComplexField lap_c = laplacian(fc);
    for (std::size_t i = 0; i < f.size(); ++i) lap_f[i] = lap_c[i].real();

    fit.a_target = 2.0 * n * value_at(f, center);
    fit.b_target = (0.5 * n + 1.0) * value_at(lap_f, center);
    const auto rel = [](double got, double want) {
        const double scale = std::max(std::abs(want), 1e-30);
        return std::abs(got - want) / scale;
    };
    fit.a_rel_err = rel(fit.a, fit.a_target);
    fit.b_rel_err = rel(fit.b, fit.b_target);
    return fit;
}

double localized_signal_rate(const RegularizedDelta& delta, const RealField& b,
                             const Hamiltonian& h) {
    if (!b.grid()->compatible(*delta.field.grid())) {
        throw std::invalid_argument("localized_signal_rate: grid mismatch");
    }
    ComplexField h_delta = h.apply(delta.field);
    Complex pairing{0.0, 0.0};
    for (std::size_t i = 0; i < b.size(); ++i) {
        pairing += b[i] * h_delta[i];
    }
    pairing *= b.grid()->cell_volume();
    return (2.0 / h.hbar()) * pairing.imag();
}

}  // namespace nlq
