#ifndef NLQ_GRID_HPP
#define NLQ_GRID_HPP

#include <cstddef>
#include <memory>
#include <vector>

namespace nlq {

/// Periodic lattice with points_per_dim samples per axis over [0, extent).
/// Wavenumbers follow FFT layout: k_j = 2*pi*f_j/extent with
/// f_j = j for j < (M+1)/2, f_j = j - M otherwise.
class Grid {
public:
    Grid(int n_dims, int points_per_dim, double extent);

    int n_dims() const { return n_dims_; }
    int points_per_dim() const { return points_; }
    double extent() const { return extent_; }
    double dx() const { return dx_; }
    std::size_t size() const { return size_; }
    /// dx^n, the volume element used by all quadratures and norms.
    double cell_volume() const { return cell_volume_; }

    /// Wavenumber of FFT index j along any axis.
    double wavenumber(int j) const { return wavenumbers_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& wavenumbers() const { return wavenumbers_; }
    /// Largest commensurate |k| = pi/dx scaled down by one index step.
    double max_wavenumber() const;

    double coordinate(int i) const { return dx_ * i; }
    std::size_t stride(int axis) const;
    int index_along(std::size_t flat, int axis) const;

    bool compatible(const Grid& other) const {
        return n_dims_ == other.n_dims_ && points_ == other.points_ &&
               extent_ == other.extent_;
    }

private:
    int n_dims_;
    int points_;
    double extent_;
    double dx_;
    std::size_t size_;
    double cell_volume_;
    std::vector<double> wavenumbers_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Validates arguments (n_dims in {1,2,3}, points >= 8, extent > 0,
/// total points <= 2^24) and precomputes wavenumbers.
GridPtr make_grid(int n_dims, int points_per_dim, double extent);

}  // namespace nlq

#endif
