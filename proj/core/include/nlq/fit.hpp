#ifndef NLQ_FIT_HPP
#define NLQ_FIT_HPP

#include <span>
#include <vector>

namespace nlq {

/// Least-squares coefficients for y ~ sum_j c_j * basis_j(x), given the design
/// matrix columns evaluated at the sample points. Throws on rank deficiency.
/// Returns coefficients and the rms residual.
struct LeastSquaresFit {
    std::vector<double> coefficients;
    double rms_residual;
    double condition;  // ratio of largest to smallest retained singular value
};

LeastSquaresFit least_squares(const std::vector<std::vector<double>>& columns,
                              std::span<const double> y);

/// Polynomial fit y ~ sum_{j<=degree} c_j x^j.
LeastSquaresFit polynomial_fit(std::span<const double> x, std::span<const double> y,
                               int degree);

}  // namespace nlq

#endif
