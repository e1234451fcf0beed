#include "nlq/amplification.hpp"

#include <cmath>

namespace nlq {

AmplificationReport amplification_experiment(const GridPtr& one_particle, int band,
                                             std::span<const double> s_values,
                                             const HamiltonianSpec& h,
                                             const ObservableSpec& b) {
    h.validate();
    if (s_values.size() < 2) {
        throw std::invalid_argument("amplification: need >= 2 s values");
    }
    if (b.kind != ObservableKind::CustomDiagonal) {
        throw std::invalid_argument(
            "amplification: B must be a smooth multiplication observable");
    }
    const AdmissibleSRange range = admissible_s_range(*one_particle);
    for (double s : s_values) {
        if (s < range.s_min || s > range.s_max) {
            throw std::invalid_argument(
                "amplification: s = " + std::to_string(s) +
                " outside the admissible range [" + std::to_string(range.s_min) +
                ", " + std::to_string(range.s_max) + "]");
        }
    }

    AmplificationReport report;
    report.n_dims = one_particle->n_dims();
    report.d_b = h.constants.D;
    report.band = band;
    report.s_values.assign(s_values.begin(), s_values.end());

    const ObservableSpec a = ObservableSpec::momentum(1);
    for (double s : s_values) {
        EprState epr = epr_state(one_particle, band, s);
        const ObservableSpec a_prime = ObservableSpec::position(1, s);
        SignalReport sig = first_order_signal(epr.field, a, a_prime, b, h);
        if (!sig.has_localized) {
            throw std::runtime_error("amplification: localized rate unavailable");
        }
        report.delta1.push_back(sig.delta1_localized);
        report.delta1_ensemble.push_back(sig.delta1);
        report.b_expect.push_back(sig.e_aprime);
    }

    std::vector<std::vector<double>> cols(2, std::vector<double>(s_values.size()));
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        cols[0][i] = report.s_values[i];
        cols[1][i] = 1.0;
    }
    LeastSquaresFit ls = least_squares(cols, report.delta1);
    report.alpha = ls.coefficients[0];
    report.beta = ls.coefficients[1];
    report.rms_residual = ls.rms_residual;
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        const double model = report.alpha * report.s_values[i] + report.beta;
        report.remainder_max =
            std::max(report.remainder_max, std::abs(report.delta1[i] - model));
    }

    double mean_b = 0.0;
    for (double v : report.b_expect) mean_b += v;
    mean_b /= static_cast<double>(report.b_expect.size());
    report.b_expectation = mean_b;

    const double denom = 4.0 * report.n_dims * report.d_b * mean_b;
    report.law_ratio = denom != 0.0 ? report.alpha / denom : 0.0;
    return report;
}

AmplificationReport amplification_experiment(const GridPtr& one_particle, int band,
                                             std::span<const double> s_values,
                                             double d_b, const ObservableSpec& b,
                                             PhysicalConstants constants) {
    constants.D = d_b;
    HamiltonianSpec h;
    h.constants = constants;
    h.terms.push_back(TermSpec::kinetic());
    h.terms.push_back(TermSpec::dg_imag());
    return amplification_experiment(one_particle, band, s_values, h, b);
}

}  // namespace nlq
