#include "nlq/terms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlq {

void PhysicalConstants::validate() const {
    if (!(hbar > 0.0)) throw std::invalid_argument("constants: hbar must be positive");
    if (!(mass > 0.0)) throw std::invalid_argument("constants: mass must be positive");
    if (!(planck_length > 0.0)) {
        throw std::invalid_argument("constants: planck_length must be positive");
    }
    if (!(amplitude_floor > 0.0) || amplitude_floor > 1e-6) {
        throw std::invalid_argument("constants: amplitude_floor must lie in (0, 1e-6]");
    }
}

TermProperties properties_of(TermKind kind) {
    switch (kind) {
        case TermKind::Kinetic:  return {true, true, true};
        case TermKind::Potential: return {true, true, true};
        case TermKind::DgImag:   return {true, true, true};
        case TermKind::BbmLog:   return {false, true, true};
        case TermKind::Kostin:   return {false, true, true};
        case TermKind::CubicNls: return {false, true, false};
        case TermKind::GenericR: return {true, true, true};
    }
    throw std::logic_error("properties_of: unknown term kind");
}

const char* term_kind_name(TermKind kind) {
    switch (kind) {
        case TermKind::Kinetic:  return "kinetic";
        case TermKind::Potential: return "potential";
        case TermKind::DgImag:   return "dg_imag";
        case TermKind::BbmLog:   return "bbm_log";
        case TermKind::Kostin:   return "kostin";
        case TermKind::CubicNls: return "cubic_nls";
        case TermKind::GenericR: return "generic_r";
    }
    return "?";
}

std::optional<TermKind> parse_term_kind(const std::string& name) {
    for (TermKind k : {TermKind::Kinetic, TermKind::Potential, TermKind::DgImag,
                       TermKind::BbmLog, TermKind::Kostin, TermKind::CubicNls,
                       TermKind::GenericR}) {
        if (name == term_kind_name(k)) return k;
    }
    return std::nullopt;
}

bool generic_r_registered(const std::string& tag) { return tag == "grad_ratio"; }

namespace {
TermSpec make(TermKind kind) {
    TermSpec t;
    t.kind = kind;
    t.properties = properties_of(kind);
    return t;
}
}  // namespace

TermSpec TermSpec::kinetic() { return make(TermKind::Kinetic); }

TermSpec TermSpec::potential_term(RealField v) {
    TermSpec t = make(TermKind::Potential);
    t.potential = std::move(v);
    return t;
}

TermSpec TermSpec::dg_imag() { return make(TermKind::DgImag); }
TermSpec TermSpec::bbm_log() { return make(TermKind::BbmLog); }
TermSpec TermSpec::kostin() { return make(TermKind::Kostin); }

TermSpec TermSpec::cubic_nls(double g) {
    TermSpec t = make(TermKind::CubicNls);
    t.cubic_g = g;
    return t;
}

TermSpec TermSpec::generic_r(const std::string& tag) {
    if (!generic_r_registered(tag)) {
        throw std::invalid_argument("generic_r: unknown functional tag '" + tag + "'");
    }
    TermSpec t = make(TermKind::GenericR);
    t.functional = tag;
    return t;
}

void HamiltonianSpec::validate() const {
    if (terms.empty()) {
        throw std::invalid_argument("hamiltonian: term list must be nonempty");
    }
    constants.validate();
    for (const TermSpec& t : terms) {
        if (t.kind == TermKind::GenericR && !generic_r_registered(t.functional)) {
            throw std::invalid_argument("hamiltonian: unknown GenericR tag '" +
                                        t.functional + "'");
        }
    }
}

namespace {

void require_nonzero(const ComplexField& psi, const char* what) {
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (psi[i] != Complex{0.0, 0.0}) return;
    }
    throw std::domain_error(std::string(what) +
                            ": undefined phase/amplitude on an identically zero field");
}

double max_abs2(const ComplexField& psi) {
    double m = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) m = std::max(m, std::norm(psi[i]));
    return m;
}

/// |grad psi|^2 / max(|psi|^2, floor*max|psi|^2) as a real multiplier field.
/// For a proper axis block, the relative floor is taken per transverse slice:
/// on product states it then reduces exactly to the factor's own floor, so
/// the block functional separates including its regularization.
RealField floored_gradient_ratio(const ComplexField& psi, double floor,
                                 std::span<const int> axes) {
    const Grid& g = *psi.grid();
    RealField g2 = axes.empty() ? gradient_norm_sq(psi) : gradient_norm_sq(psi, axes);
    RealField r(psi.grid());
    const bool whole = axes.empty() || axes.size() == static_cast<std::size_t>(g.n_dims());
    if (whole) {
        const double cap = floor * max_abs2(psi);
        for (std::size_t i = 0; i < psi.size(); ++i) {
            r[i] = g2[i] / std::max(std::norm(psi[i]), cap);
        }
        return r;
    }
    std::vector<double> slice_max(psi.size(), 0.0);
    auto transverse_key = [&](std::size_t i) {
        std::size_t key = i;
        for (int a : axes) {
            key -= static_cast<std::size_t>(g.index_along(i, a)) * g.stride(a);
        }
        return key;
    };
    for (std::size_t i = 0; i < psi.size(); ++i) {
        std::size_t key = transverse_key(i);
        slice_max[key] = std::max(slice_max[key], std::norm(psi[i]));
    }
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double cap = floor * slice_max[transverse_key(i)];
        const double denom = std::max(std::norm(psi[i]), cap);
        r[i] = denom > 0.0 ? g2[i] / denom : 0.0;
    }
    return r;
}

ComplexField multiply(const RealField& f, const ComplexField& psi) {
    ComplexField out(psi.grid());
    for (std::size_t i = 0; i < psi.size(); ++i) out[i] = f[i] * psi[i];
    return out;
}

/// Broadcast a factor-grid potential over the block `axes` of a joint grid.
ComplexField multiply_broadcast(const RealField& v, const ComplexField& psi,
                                std::span<const int> axes) {
    const Grid& g = *psi.grid();
    const Grid& vg = *v.grid();
    if (vg.n_dims() == g.n_dims() &&
        (axes.empty() || axes.size() == static_cast<std::size_t>(g.n_dims()))) {
        return multiply(v, psi);
    }
    if (static_cast<int>(axes.size()) != vg.n_dims() ||
        vg.points_per_dim() != g.points_per_dim()) {
        throw std::invalid_argument("potential: field shape incompatible with axis block");
    }
    ComplexField out(psi.grid());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        std::size_t vi = 0;
        for (int d = 0; d < vg.n_dims(); ++d) {
            vi += static_cast<std::size_t>(g.index_along(i, axes[static_cast<std::size_t>(d)])) *
                  vg.stride(d);
        }
        out[i] = v[vi] * psi[i];
    }
    return out;
}

}  // namespace

ComplexField dg_functional(const ComplexField& psi, double floor) {
    return dg_functional(psi, floor, {});
}

ComplexField dg_functional(const ComplexField& psi, double floor,
                           std::span<const int> axes) {
    if (!(floor > 0.0)) throw std::invalid_argument("dg_functional: floor must be > 0");
    require_nonzero(psi, "dg_functional");
    return multiply(floored_gradient_ratio(psi, floor, axes), psi);
}

ComplexField apply_term(const TermSpec& term, const ComplexField& psi,
                        const PhysicalConstants& c) {
    return apply_term(term, psi, c, {});
}

ComplexField apply_term(const TermSpec& term, const ComplexField& psi,
                        const PhysicalConstants& c, std::span<const int> axes) {
    require_nonzero(psi, "apply_term");
    switch (term.kind) {
        case TermKind::Kinetic: {
            ComplexField lap = axes.empty() ? laplacian(psi) : laplacian(psi, axes);
            lap *= Complex{-c.hbar * c.hbar / (2.0 * c.mass), 0.0};
            return lap;
        }
        case TermKind::Potential:
            return multiply_broadcast(term.potential, psi, axes);
        case TermKind::DgImag: {
            ComplexField out = axes.empty() ? laplacian(psi) : laplacian(psi, axes);
            out += dg_functional(psi, c.amplitude_floor, axes);
            out *= Complex{0.0, c.D * c.hbar};
            return out;
        }
        case TermKind::BbmLog: {
            const double cap = c.amplitude_floor * max_abs2(psi);
            ComplexField out(psi.grid());
            for (std::size_t i = 0; i < psi.size(); ++i) {
                const double mod2 = std::max(std::norm(psi[i]), cap);
                out[i] = c.p_bbm * 0.5 * std::log(mod2) * psi[i];
            }
            return out;
        }
        case TermKind::Kostin: {
            // i q ln(psi/conj psi) psi = -2 q arg(psi) psi, principal branch.
            ComplexField out(psi.grid());
            for (std::size_t i = 0; i < psi.size(); ++i) {
                out[i] = -2.0 * c.q_kostin * std::arg(psi[i]) * psi[i];
            }
            return out;
        }
        case TermKind::CubicNls: {
            ComplexField out(psi.grid());
            for (std::size_t i = 0; i < psi.size(); ++i) {
                out[i] = term.cubic_g * std::norm(psi[i]) * psi[i];
            }
            return out;
        }
        case TermKind::GenericR: {
            if (term.functional == "grad_ratio") {
                return multiply(floored_gradient_ratio(psi, c.amplitude_floor, axes), psi);
            }
            throw std::invalid_argument("apply_term: unknown GenericR tag '" +
                                        term.functional + "'");
        }
    }
    throw std::logic_error("apply_term: unknown term kind");
}

ComplexField apply_hamiltonian(const HamiltonianSpec& h, const ComplexField& psi) {
    h.validate();
    ComplexField out = apply_term(h.terms.front(), psi, h.constants);
    for (std::size_t i = 1; i < h.terms.size(); ++i) {
        out += apply_term(h.terms[i], psi, h.constants);
    }
    return out;
}

HomogeneityReport check_homogeneity(const TermSpec& term, const ComplexField& psi,
                                    Complex z, const PhysicalConstants& c) {
    if (z == Complex{0.0, 0.0}) {
        throw std::invalid_argument("check_homogeneity: z must be nonzero");
    }
    require_nonzero(psi, "check_homogeneity");
    ComplexField scaled = z * psi;
    ComplexField lhs = apply_term(term, scaled, c);
    ComplexField rhs = z * apply_term(term, psi, c);
    const double denom = rhs.norm();
    if (!(denom > 0.0)) {
        // Both sides vanish (e.g. DG on plane waves): homogeneity holds trivially.
        HomogeneityReport r{0.0, term.properties.homogeneous, term.properties.homogeneous};
        return r;
    }
    lhs -= rhs;
    const double residual = lhs.norm() / denom;
    const bool looks_homogeneous = residual <= 1e-9;
    return HomogeneityReport{residual, term.properties.homogeneous,
                             looks_homogeneous == term.properties.homogeneous};
}

}  // namespace nlq
