#ifndef NLQ_FIELD_HPP
#define NLQ_FIELD_HPP

#include <complex>
#include <functional>
#include <vector>

#include "nlq/grid.hpp"

namespace nlq {

using Complex = std::complex<double>;

/// Real scalar field over a Grid (densities, potentials, observables).
class RealField {
public:
    RealField() = default;
    explicit RealField(GridPtr grid);
    RealField(GridPtr grid, std::vector<double> values);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    /// Sum of values times the volume element.
    double integral() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Complex amplitudes over a Grid. Value semantics; the grid is shared.
class ComplexField {
public:
    ComplexField() = default;
    explicit ComplexField(GridPtr grid);
    ComplexField(GridPtr grid, std::vector<Complex> amplitudes);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return amp_.size(); }
    Complex& operator[](std::size_t i) { return amp_[i]; }
    const Complex& operator[](std::size_t i) const { return amp_[i]; }
    std::vector<Complex>& amplitudes() { return amp_; }
    const std::vector<Complex>& amplitudes() const { return amp_; }

    /// Sum |psi|^2 dx^n.
    double norm2() const;
    double norm() const;
    bool is_normalized(double tol = 1e-12) const;
    /// Scales to unit norm; throws on an identically zero field.
    void normalize();
    bool all_finite() const;

    ComplexField& operator+=(const ComplexField& rhs);
    ComplexField& operator-=(const ComplexField& rhs);
    ComplexField& operator*=(Complex z);

private:
    GridPtr grid_;
    std::vector<Complex> amp_;
};

ComplexField operator+(ComplexField lhs, const ComplexField& rhs);
ComplexField operator-(ComplexField lhs, const ComplexField& rhs);
ComplexField operator*(Complex z, ComplexField f);

/// y += a*x (grids must match).
void axpy(Complex a, const ComplexField& x, ComplexField& y);

/// Sum conj(f)*g dx^n; conjugate-linear in the first argument.
/// Throws on grid mismatch.
Complex inner_product(const ComplexField& f, const ComplexField& g);

/// Pointwise |psi|^2 as a real field.
RealField density_of(const ComplexField& psi);

/// Builds a field from a coordinate callback (x has n_dims entries).
ComplexField sample_field(const GridPtr& grid,
                          const std::function<Complex(const std::vector<double>&)>& f);
RealField sample_real_field(const GridPtr& grid,
                            const std::function<double(const std::vector<double>&)>& f);

/// Circular shift by whole grid cells along each axis.
ComplexField translate(const ComplexField& f, const std::vector<int>& shifts);

}  // namespace nlq

#endif
