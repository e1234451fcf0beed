#ifndef NLQ_TERMS_HPP
#define NLQ_TERMS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlq/field.hpp"
#include "nlq/spectral.hpp"

namespace nlq {

struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;
    double D = 0.0;              // DG diffusion constant (per species)
    double p_bbm = 0.0;          // logarithmic-term constant
    double q_kostin = 0.0;       // friction-term constant
    double kappa = 1.0;          // dispersion-correction coefficient
    double planck_length = 1.0;  // code units
    double amplitude_floor = 1e-12;

    /// hbar, mass, planck_length > 0; amplitude_floor in (0, 1e-6].
    void validate() const;
};

enum class TermKind {
    Kinetic,    // -(hbar^2/2m) Lap psi
    Potential,  // V(x) psi
    DgImag,     // i D hbar (Lap psi + N(psi) psi),  N = |grad psi|^2/|psi|^2
    BbmLog,     // p ln|psi| psi (floored modulus)
    Kostin,     // i q ln(psi/conj(psi)) psi = -2 q arg(psi) psi, principal branch
    CubicNls,   // g |psi|^2 psi
    GenericR,   // R(psi) psi with R a registered real degree-zero functional
};

struct TermProperties {
    bool homogeneous;
    bool norm_preserving;
    bool separating;
};

/// Algebraic property triple, fixed per kind (CubicNls declared non-separating).
TermProperties properties_of(TermKind kind);

const char* term_kind_name(TermKind kind);
std::optional<TermKind> parse_term_kind(const std::string& name);

/// Registered degree-zero real functionals for GenericR.
/// "grad_ratio": R(psi) = |grad psi|^2/|psi|^2 (floored), applied as a real term.
bool generic_r_registered(const std::string& tag);

struct TermSpec {
    TermKind kind;
    std::string species = "a";
    RealField potential;           // Potential only, on the one-particle grid
    double cubic_g = 0.0;          // CubicNls only
    std::string functional = "grad_ratio";  // GenericR registry tag
    TermProperties properties = {false, false, false};

    static TermSpec kinetic();
    static TermSpec potential_term(RealField v);
    static TermSpec dg_imag();
    static TermSpec bbm_log();
    static TermSpec kostin();
    static TermSpec cubic_nls(double g);
    static TermSpec generic_r(const std::string& tag);
};

struct HamiltonianSpec {
    std::vector<TermSpec> terms;
    PhysicalConstants constants;

    void validate() const;  // nonempty, constants valid, GenericR tags known
};

/// (|grad psi|^2 / max(|psi|^2, floor*max|psi|^2)) psi, derivatives over the
/// given axes (all if empty). Throws on an identically zero field.
ComplexField dg_functional(const ComplexField& psi, double floor);
ComplexField dg_functional(const ComplexField& psi, double floor,
                           std::span<const int> axes);

/// Applies one term; differential/functional parts restricted to `axes`
/// (all axes if empty). Throws on a zero field.
ComplexField apply_term(const TermSpec& term, const ComplexField& psi,
                        const PhysicalConstants& c);
ComplexField apply_term(const TermSpec& term, const ComplexField& psi,
                        const PhysicalConstants& c, std::span<const int> axes);

/// Sum of apply_term over the spec's terms, all axes.
ComplexField apply_hamiltonian(const HamiltonianSpec& h, const ComplexField& psi);

struct HomogeneityReport {
    double residual;            // ||T(z psi) - z T(psi)|| / ||z T(psi)||
    bool declared_homogeneous;
    bool pass;                  // residual verdict matches the declaration
};

/// Compares T(z psi) against z T(psi); pass threshold 1e-9 on the residual.
HomogeneityReport check_homogeneity(const TermSpec& term, const ComplexField& psi,
                                    Complex z, const PhysicalConstants& c);

}  // namespace nlq

#endif
