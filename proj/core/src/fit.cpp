#include "nlq/fit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace nlq {

LeastSquaresFit least_squares(const std::vector<std::vector<double>>& columns,
                              std::span<const double> y) {
    if (columns.empty()) throw std::invalid_argument("least_squares: no basis columns");
    const std::size_t n = y.size();
    const std::size_t p = columns.size();
    if (n < p) throw std::invalid_argument("least_squares: fewer samples than parameters");
    for (const auto& col : columns) {
        if (col.size() != n) {
            throw std::invalid_argument("least_squares: column length mismatch");
        }
    }

    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        b(static_cast<Eigen::Index>(i)) = y[i];
        for (std::size_t j = 0; j < p; ++j) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
        }
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smin > 1e-12 * smax)) {
        throw std::invalid_argument("least_squares: ill-conditioned design (samples too clustered)");
    }
    Eigen::VectorXd c = svd.solve(b);

    LeastSquaresFit fit;
    fit.coefficients.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        fit.coefficients[j] = c(static_cast<Eigen::Index>(j));
    }
    fit.rms_residual = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(n));
    fit.condition = smax / smin;
    return fit;
}

LeastSquaresFit polynomial_fit(std::span<const double> x, std::span<const double> y,
                               int degree) {
    if (degree < 0) throw std::invalid_argument("polynomial_fit: negative degree");
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(degree) + 1,
                                          std::vector<double>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = 1.0;
        for (int j = 0; j <= degree; ++j) {
            cols[static_cast<std::size_t>(j)][i] = v;
            v *= x[i];
        }
    }
    return least_squares(cols, y);
}

}  // namespace nlq
