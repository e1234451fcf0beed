#ifndef NLQ_EXPERIMENT_CONFIG_HPP
#define NLQ_EXPERIMENT_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "nlq/terms.hpp"

namespace nlq::experiment {

enum class Kind {
    Evolve,
    Separation,
    Signal,
    Amplification,
    Regcheck,
    Dispersion,
    FokkerPlanck,
};

const char* kind_name(Kind k);

struct GridBlock {
    int n_dims = 1;
    int points = 0;
    double extent = 0.0;
};

struct HamiltonianBlock {
    std::vector<std::string> terms;
    PhysicalConstants constants;
    double cubic_g = 0.0;
    std::string potential_kind = "constant";  // constant | cosine
    double potential_const = 0.0;
    double potential_amp = 0.0;
    int potential_mode = 1;
    std::string generic_r = "grad_ratio";
};

struct StateBlock {
    std::string kind = "gaussian";  // gaussian | plane_wave
    double sigma = 1.0;
    double center = -1.0;  // resolved to extent/2 when negative
    int momentum_mode = 0;
    int mode = 1;  // plane_wave
};

struct EvolutionBlock {
    double dt = 1e-3;
    long steps = 0;
    std::string integrator = "rk4";  // rk4 | split_step
    long record_every = 1;
    bool override_stability = false;
};

struct SeparationBlock {
    double sigma1 = 2.0, sigma2 = 2.0;
    double center1 = -1.0, center2 = -1.0;
    bool refine = true;
    std::string q_sample = "none";  // none | projector
    double q_coupling = 0.0;
    double tolerance = 1e-5;
};

struct SignalBlock {
    int band = 4;
    double s_loc = 1.0;
    std::vector<double> t_values;
    double b_const = 1.0;
    double b_cos_amp = 0.5;
    int b_cos_mode = 1;
    std::string state = "epr";  // epr | two_mode
    int state_mode = 1;         // two_mode: +-mode index
    double sigma1 = 1.5, sigma2 = 2.5;
    double center1 = -1.0, center2 = -1.0;
};

struct AmplificationBlock {
    int band = 8;
    double s_min = 0.0, s_max = 0.0;
    int s_count = 8;
    double b_const = 1.0;
    double b_cos_amp = 0.5;
    int b_cos_mode = 1;
    bool double_check = true;  // rerun at 2 D_b and compare slopes
};

struct RegcheckBlock {
    double s_min = 0.0, s_max = 0.0;
    int s_count = 8;
    double f_const = 1.0;
    double f_cos_amp = 0.5;
    int f_cos_mode = 1;
};

struct DispersionBlock {
    std::vector<int> modes;
    double window = 1.0;
    bool synthetic = true;
    double syn_mass = 1.0;
    double syn_kappa = 1.0;
    double syn_lp = 1e-3;
    double syn_p_min = 0.1;
    double syn_p_max = 1.0;
    int syn_count = 12;
};

struct FokkerPlanckBlock {
    double d_scan_min = 0.0;
    double d_scan_max = 0.1;
    int d_scan_steps = 11;
};

struct ExperimentConfig {
    Kind kind = Kind::Evolve;
    unsigned long seed = 0;  // reserved for randomized controls
    GridBlock grid;
    HamiltonianBlock hamiltonian;
    HamiltonianBlock hamiltonian2;
    bool has_hamiltonian2 = false;
    StateBlock state;
    EvolutionBlock evolution;
    SeparationBlock separation;
    SignalBlock signal;
    AmplificationBlock amplification;
    RegcheckBlock regcheck;
    DispersionBlock dispersion;
    FokkerPlanckBlock fokker_planck;
    std::string output_directory = ".";
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> errs);
    std::vector<std::string> errors;
};

/// Strict parse + full guard validation of the INI-style config text.
/// No partial acceptance: every violation is collected and reported at once.
ExperimentConfig validate_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace nlq::experiment

#endif
