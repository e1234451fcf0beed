#ifndef NLQ_SPECTRAL_HPP
#define NLQ_SPECTRAL_HPP

#include <span>
#include <vector>

#include "nlq/field.hpp"

namespace nlq {

/// Forward/backward n-dimensional FFT. Backward is normalized so that
/// backward(forward(f)) == f. Thread-safe (plans are cached per shape
/// under a mutex; execution uses FFTW's new-array interface).
std::vector<Complex> fft_forward(const ComplexField& f);
ComplexField fft_backward(const GridPtr& grid, std::vector<Complex> spectrum);

/// Spectral Laplacian restricted to the given axes (all axes if empty).
ComplexField laplacian(const ComplexField& f);
ComplexField laplacian(const ComplexField& f, std::span<const int> axes);

/// Spectral partial derivative along one axis.
ComplexField partial_derivative(const ComplexField& f, int axis);

/// Sum_i |d_i f|^2 over the given axes (all axes if empty), per point.
RealField gradient_norm_sq(const ComplexField& f);
RealField gradient_norm_sq(const ComplexField& f, std::span<const int> axes);

/// Fourier coefficient of the mode with per-axis integer indices
/// (negative allowed), with the convention psi = sum c_j e^{i k_j x}:
/// c = <e_j, psi>/L^n computed via the FFT.
Complex mode_coefficient(const ComplexField& f, const std::vector<int>& mode);

/// Wavenumber-space norm^2, for Parseval checks.
double spectral_norm2(const ComplexField& f);

}  // namespace nlq

#endif
