#include "nlq/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace nlq {

namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// Plans are cached per (rank, points). Creation is serialized; execution via
// fftw_execute_dft on caller-owned arrays is thread-safe.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    PlanPair get(int rank, int points) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(rank, points);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::vector<int> dims(static_cast<std::size_t>(rank), points);
        std::size_t total = 1;
        for (int d : dims) total *= static_cast<std::size_t>(d);
        std::vector<Complex> in(total), out(total);
        auto* in_p = reinterpret_cast<fftw_complex*>(in.data());
        auto* out_p = reinterpret_cast<fftw_complex*>(out.data());
        PlanPair p;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        p.forward = fftw_plan_dft(rank, dims.data(), in_p, out_p, FFTW_FORWARD, flags);
        p.backward = fftw_plan_dft(rank, dims.data(), in_p, out_p, FFTW_BACKWARD, flags);
        if (!p.forward || !p.backward) {
            throw std::runtime_error("fftw plan creation failed");
        }
        plans_[key] = p;
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::pair<int, int>, PlanPair> plans_;
};

void execute(fftw_plan plan, const std::vector<Complex>& in, std::vector<Complex>& out) {
    auto* in_p = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
    auto* out_p = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(plan, in_p, out_p);
}

std::vector<int> all_axes(const Grid& g) {
    std::vector<int> axes(static_cast<std::size_t>(g.n_dims()));
    for (int d = 0; d < g.n_dims(); ++d) axes[static_cast<std::size_t>(d)] = d;
    return axes;
}

void check_axes(const Grid& g, std::span<const int> axes) {
    for (int a : axes) {
        if (a < 0 || a >= g.n_dims()) {
            throw std::invalid_argument("spectral: axis out of range");
        }
    }
}

}  // namespace

std::vector<Complex> fft_forward(const ComplexField& f) {
    const Grid& g = *f.grid();
    PlanPair plans = PlanCache::instance().get(g.n_dims(), g.points_per_dim());
    std::vector<Complex> spec(f.size());
    execute(plans.forward, f.amplitudes(), spec);
    return spec;
}

ComplexField fft_backward(const GridPtr& grid, std::vector<Complex> spectrum) {
    const Grid& g = *grid;
    if (spectrum.size() != g.size()) {
        throw std::invalid_argument("fft_backward: spectrum size mismatch");
    }
    PlanPair plans = PlanCache::instance().get(g.n_dims(), g.points_per_dim());
    std::vector<Complex> out(spectrum.size());
    execute(plans.backward, spectrum, out);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (Complex& a : out) a *= inv;
    return ComplexField(grid, std::move(out));
}

ComplexField laplacian(const ComplexField& f) {
    auto axes = all_axes(*f.grid());
    return laplacian(f, axes);
}

ComplexField laplacian(const ComplexField& f, std::span<const int> axes) {
    const Grid& g = *f.grid();
    check_axes(g, axes);
    std::vector<Complex> spec = fft_forward(f);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        double k2 = 0.0;
        for (int a : axes) {
            const double k = g.wavenumber(g.index_along(i, a));
            k2 += k * k;
        }
        spec[i] *= -k2;
    }
    return fft_backward(f.grid(), std::move(spec));
}

ComplexField partial_derivative(const ComplexField& f, int axis) {
    const Grid& g = *f.grid();
    if (axis < 0 || axis >= g.n_dims()) {
        throw std::invalid_argument("partial_derivative: axis out of range");
    }
    std::vector<Complex> spec = fft_forward(f);
    const int m = g.points_per_dim();
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const int j = g.index_along(i, axis);
        double k = g.wavenumber(j);
        // Zero the unmatched Nyquist mode: its derivative has no consistent sign.
        if (m % 2 == 0 && j == m / 2) k = 0.0;
        spec[i] *= Complex{0.0, k};
    }
    return fft_backward(f.grid(), std::move(spec));
}

RealField gradient_norm_sq(const ComplexField& f) {
    auto axes = all_axes(*f.grid());
    return gradient_norm_sq(f, axes);
}

RealField gradient_norm_sq(const ComplexField& f, std::span<const int> axes) {
    check_axes(*f.grid(), axes);
    RealField out(f.grid());
    for (int a : axes) {
        ComplexField d = partial_derivative(f, a);
        for (std::size_t i = 0; i < d.size(); ++i) out[i] += std::norm(d[i]);
    }
    return out;
}

Complex mode_coefficient(const ComplexField& f, const std::vector<int>& mode) {
    const Grid& g = *f.grid();
    if (static_cast<int>(mode.size()) != g.n_dims()) {
        throw std::invalid_argument("mode_coefficient: one index per axis required");
    }
    const int m = g.points_per_dim();
    std::vector<Complex> spec = fft_forward(f);
    std::size_t flat = 0;
    for (int d = 0; d < g.n_dims(); ++d) {
        int j = mode[static_cast<std::size_t>(d)];
        if (j < -m / 2 || j > (m - 1) / 2) {
            throw std::invalid_argument("mode_coefficient: mode outside grid band");
        }
        if (j < 0) j += m;
        flat += static_cast<std::size_t>(j) * g.stride(d);
    }
    return spec[flat] / static_cast<double>(g.size());
}

double spectral_norm2(const ComplexField& f) {
    const Grid& g = *f.grid();
    std::vector<Complex> spec = fft_forward(f);
    double s = 0.0;
    for (const Complex& c : spec) s += std::norm(c);
    // Parseval: sum |psi|^2 dx^n = sum |c_j|^2 L^n / M^n with c_j = spec/M^n.
    const double scale = g.cell_volume() / static_cast<double>(g.size());
    return s * scale;
}

}  // namespace nlq
