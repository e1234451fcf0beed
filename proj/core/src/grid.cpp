#include "nlq/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nlq {

namespace {
constexpr std::size_t kMaxTotalPoints = std::size_t{1} << 24;
}

Grid::Grid(int n_dims, int points_per_dim, double extent)
    : n_dims_(n_dims), points_(points_per_dim), extent_(extent) {
    if (n_dims_ < 1 || n_dims_ > 3) {
        throw std::invalid_argument("grid: n_dims must be 1, 2 or 3, got " +
                                    std::to_string(n_dims_));
    }
    if (points_ < 8) {
        throw std::invalid_argument("grid: points_per_dim must be >= 8, got " +
                                    std::to_string(points_));
    }
    if (!(extent_ > 0.0)) {
        throw std::invalid_argument("grid: extent must be positive");
    }
    size_ = 1;
    for (int d = 0; d < n_dims_; ++d) {
        size_ *= static_cast<std::size_t>(points_);
        if (size_ > kMaxTotalPoints) {
            throw std::invalid_argument(
                "grid: total point count exceeds 2^24 memory guard");
        }
    }
    dx_ = extent_ / points_;
    cell_volume_ = std::pow(dx_, n_dims_);
    wavenumbers_.resize(static_cast<std::size_t>(points_));
    const double dk = 2.0 * std::numbers::pi / extent_;
    for (int j = 0; j < points_; ++j) {
        const int f = (j <= (points_ - 1) / 2) ? j : j - points_;
        wavenumbers_[static_cast<std::size_t>(j)] = dk * f;
    }
}

double Grid::max_wavenumber() const {
    double m = 0.0;
    for (double k : wavenumbers_) m = std::max(m, std::abs(k));
    return m;
}

std::size_t Grid::stride(int axis) const {
    // Row-major: axis 0 is the slowest-varying.
    std::size_t s = 1;
    for (int d = n_dims_ - 1; d > axis; --d) s *= static_cast<std::size_t>(points_);
    return s;
}

int Grid::index_along(std::size_t flat, int axis) const {
    return static_cast<int>((flat / stride(axis)) % static_cast<std::size_t>(points_));
}

GridPtr make_grid(int n_dims, int points_per_dim, double extent) {
    return std::make_shared<const Grid>(n_dims, points_per_dim, extent);
}

}  // namespace nlq
