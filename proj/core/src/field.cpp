#include "nlq/field.hpp"

#include <cmath>
#include <stdexcept>

namespace nlq {

namespace {
void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
    if (!a || !b || !a->compatible(*b)) {
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
    }
}
}  // namespace

RealField::RealField(GridPtr grid)
    : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

RealField::RealField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) {
        throw std::invalid_argument("real field: value count != grid point count");
    }
}

double RealField::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_->cell_volume();
}

ComplexField::ComplexField(GridPtr grid)
    : grid_(std::move(grid)), amp_(grid_->size(), Complex{0.0, 0.0}) {}

ComplexField::ComplexField(GridPtr grid, std::vector<Complex> amplitudes)
    : grid_(std::move(grid)), amp_(std::move(amplitudes)) {
    if (amp_.size() != grid_->size()) {
        throw std::invalid_argument("field: amplitude count != grid point count");
    }
}

double ComplexField::norm2() const {
    double s = 0.0;
    for (const Complex& a : amp_) s += std::norm(a);
    return s * grid_->cell_volume();
}

double ComplexField::norm() const { return std::sqrt(norm2()); }

bool ComplexField::is_normalized(double tol) const {
    return std::abs(norm2() - 1.0) <= tol;
}

void ComplexField::normalize() {
    const double n = norm();
    if (!(n > 0.0)) {
        throw std::domain_error("field: cannot normalize an identically zero field");
    }
    const double inv = 1.0 / n;
    for (Complex& a : amp_) a *= inv;
}

bool ComplexField::all_finite() const {
    for (const Complex& a : amp_) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    }
    return true;
}

ComplexField& ComplexField::operator+=(const ComplexField& rhs) {
    require_same_grid(grid_, rhs.grid_, "field +=");
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] += rhs.amp_[i];
    return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& rhs) {
    require_same_grid(grid_, rhs.grid_, "field -=");
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] -= rhs.amp_[i];
    return *this;
}

ComplexField& ComplexField::operator*=(Complex z) {
    for (Complex& a : amp_) a *= z;
    return *this;
}

ComplexField operator+(ComplexField lhs, const ComplexField& rhs) {
    lhs += rhs;
    return lhs;
}

ComplexField operator-(ComplexField lhs, const ComplexField& rhs) {
    lhs -= rhs;
    return lhs;
}

ComplexField operator*(Complex z, ComplexField f) {
    f *= z;
    return f;
}

void axpy(Complex a, const ComplexField& x, ComplexField& y) {
    require_same_grid(x.grid(), y.grid(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Complex inner_product(const ComplexField& f, const ComplexField& g) {
    require_same_grid(f.grid(), g.grid(), "inner_product");
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * g[i];
    return s * f.grid()->cell_volume();
}

RealField density_of(const ComplexField& psi) {
    RealField rho(psi.grid());
    for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
    return rho;
}

namespace {
template <typename Out, typename Fn>
Out sample_impl(const GridPtr& grid, const Fn& f) {
    Out out(grid);
    const int n = grid->n_dims();
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < grid->size(); ++i) {
        for (int d = 0; d < n; ++d) {
            x[static_cast<std::size_t>(d)] = grid->coordinate(grid->index_along(i, d));
        }
        out[i] = f(x);
    }
    return out;
}
}  // namespace

ComplexField sample_field(const GridPtr& grid,
                          const std::function<Complex(const std::vector<double>&)>& f) {
    return sample_impl<ComplexField>(grid, f);
}

RealField sample_real_field(const GridPtr& grid,
                            const std::function<double(const std::vector<double>&)>& f) {
    return sample_impl<RealField>(grid, f);
}

ComplexField translate(const ComplexField& f, const std::vector<int>& shifts) {
    const GridPtr& g = f.grid();
    if (static_cast<int>(shifts.size()) != g->n_dims()) {
        throw std::invalid_argument("translate: one shift per axis required");
    }
    ComplexField out(g);
    const int m = g->points_per_dim();
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::size_t j = 0;
        for (int d = 0; d < g->n_dims(); ++d) {
            int idx = g->index_along(i, d) + shifts[static_cast<std::size_t>(d)];
            idx %= m;
            if (idx < 0) idx += m;
            j += static_cast<std::size_t>(idx) * g->stride(d);
        }
        out[j] = f[i];
    }
    return out;
}

}  // namespace nlq
