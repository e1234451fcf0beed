#include "nlq/experiment/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nlq/regularization.hpp"

namespace nlq::experiment {

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Evolve: return "evolve";
        case Kind::Separation: return "separation";
        case Kind::Signal: return "signal";
        case Kind::Amplification: return "amplification";
        case Kind::Regcheck: return "regcheck";
        case Kind::Dispersion: return "dispersion";
        case Kind::FokkerPlanck: return "fokker_planck";
    }
    return "?";
}

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct KeyValue {
    std::string key;
    std::string value;
    int line;
};

struct RawSection {
    std::string name;
    std::vector<KeyValue> entries;
    int line;
};

std::vector<RawSection> tokenize(const std::string& text,
                                 std::vector<std::string>& errors) {
    std::vector<RawSection> sections;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                errors.push_back("line " + std::to_string(line) +
                                 ": malformed section header '" + s + "'");
                continue;
            }
            sections.push_back(RawSection{trim(s.substr(1, s.size() - 2)), {}, line});
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line) +
                             ": expected 'key = value', got '" + s + "'");
            continue;
        }
        if (sections.empty()) {
            errors.push_back("line " + std::to_string(line) +
                             ": key outside any [section]");
            continue;
        }
        sections.back().entries.push_back(
            KeyValue{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line});
    }
    return sections;
}

/// Typed key access over one section with consumed-key tracking; leftovers
/// are reported as unknown keys.
class Section {
public:
    Section() = default;
    Section(const RawSection* raw, std::vector<std::string>* errors)
        : raw_(raw), errors_(errors) {}

    bool present() const { return raw_ != nullptr; }
    const std::string& name() const { return raw_->name; }

    std::string get_string(const std::string& key, const std::string& def) {
        const KeyValue* kv = find(key);
        return kv ? kv->value : def;
    }

    double get_double(const std::string& key, double def) {
        const KeyValue* kv = find(key);
        if (!kv) return def;
        try {
            std::size_t pos = 0;
            const double v = std::stod(kv->value, &pos);
            if (pos != kv->value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            fail(*kv, "expected a real number");
            return def;
        }
    }

    long get_long(const std::string& key, long def) {
        const KeyValue* kv = find(key);
        if (!kv) return def;
        try {
            std::size_t pos = 0;
            const long v = std::stol(kv->value, &pos);
            if (pos != kv->value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            fail(*kv, "expected an integer");
            return def;
        }
    }

    bool get_bool(const std::string& key, bool def) {
        const KeyValue* kv = find(key);
        if (!kv) return def;
        if (kv->value == "true") return true;
        if (kv->value == "false") return false;
        fail(*kv, "expected true or false");
        return def;
    }

    std::vector<std::string> get_list(const std::string& key) {
        const KeyValue* kv = find(key);
        std::vector<std::string> out;
        if (!kv) return out;
        std::stringstream ss(kv->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    std::vector<double> get_double_list(const std::string& key) {
        std::vector<double> out;
        const KeyValue* kv = find(key);
        if (!kv) return out;
        for (const std::string& item : get_list_value(kv->value)) {
            try {
                out.push_back(std::stod(item));
            } catch (...) {
                fail(*kv, "expected a comma-separated list of reals");
                return {};
            }
        }
        return out;
    }

    std::vector<int> get_int_list(const std::string& key) {
        std::vector<int> out;
        const KeyValue* kv = find(key);
        if (!kv) return out;
        for (const std::string& item : get_list_value(kv->value)) {
            try {
                out.push_back(std::stoi(item));
            } catch (...) {
                fail(*kv, "expected a comma-separated list of integers");
                return {};
            }
        }
        return out;
    }

    bool has(const std::string& key) const {
        if (!raw_) return false;
        return std::any_of(raw_->entries.begin(), raw_->entries.end(),
                           [&](const KeyValue& kv) { return kv.key == key; });
    }

    void report_unknown() {
        if (!raw_) return;
        for (const KeyValue& kv : raw_->entries) {
            if (!consumed_.count(kv.key)) {
                errors_->push_back("[" + raw_->name + "] line " +
                                   std::to_string(kv.line) + ": unknown key '" +
                                   kv.key + "'");
            }
        }
    }

private:
    static std::vector<std::string> get_list_value(const std::string& value) {
        std::vector<std::string> out;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    const KeyValue* find(const std::string& key) {
        if (!raw_) return nullptr;
        consumed_.insert(key);
        for (const KeyValue& kv : raw_->entries) {
            if (kv.key == key) return &kv;
        }
        return nullptr;
    }

    void fail(const KeyValue& kv, const char* what) {
        errors_->push_back("[" + raw_->name + "] line " + std::to_string(kv.line) +
                           ": key '" + kv.key + "': " + what + ", got '" + kv.value +
                           "'");
    }

    const RawSection* raw_ = nullptr;
    std::vector<std::string>* errors_ = nullptr;
    std::set<std::string> consumed_;
};

HamiltonianBlock parse_hamiltonian(Section& s, std::vector<std::string>& errors,
                                   const std::string& label) {
    HamiltonianBlock h;
    h.terms = s.get_list("terms");
    if (h.terms.empty()) {
        errors.push_back("[" + label + "]: 'terms' must list at least one term");
    }
    for (const std::string& t : h.terms) {
        if (!parse_term_kind(t)) {
            errors.push_back("[" + label + "]: unknown term kind '" + t +
                             "' (admissible: kinetic, potential, dg_imag, bbm_log, "
                             "kostin, cubic_nls, generic_r)");
        }
    }
    h.constants.hbar = s.get_double("hbar", 1.0);
    h.constants.mass = s.get_double("mass", 1.0);
    h.constants.D = s.get_double("D", 0.0);
    h.constants.p_bbm = s.get_double("p", 0.0);
    h.constants.q_kostin = s.get_double("q", 0.0);
    h.constants.kappa = s.get_double("kappa", 1.0);
    h.constants.planck_length = s.get_double("planck_length", 1.0);
    h.constants.amplitude_floor = s.get_double("amplitude_floor", 1e-12);
    h.cubic_g = s.get_double("g", 0.0);
    h.potential_kind = s.get_string("potential_kind", "constant");
    h.potential_const = s.get_double("potential_const", 0.0);
    h.potential_amp = s.get_double("potential_amp", 0.0);
    h.potential_mode = static_cast<int>(s.get_long("potential_mode", 1));
    h.generic_r = s.get_string("generic_r", "grad_ratio");

    try {
        h.constants.validate();
    } catch (const std::exception& e) {
        errors.push_back("[" + label + "]: " + e.what());
    }
    if (h.potential_kind != "constant" && h.potential_kind != "cosine") {
        errors.push_back("[" + label + "]: potential_kind must be constant or cosine");
    }
    if (!generic_r_registered(h.generic_r)) {
        errors.push_back("[" + label + "]: unknown generic_r functional '" +
                         h.generic_r + "'");
    }
    return h;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> errs)
    : std::runtime_error("config validation failed:\n  " + join(errs, "\n  ")),
      errors(std::move(errs)) {}

ExperimentConfig validate_config(const std::string& text) {
    std::vector<std::string> errors;
    std::vector<RawSection> raw = tokenize(text, errors);

    auto section_of = [&](const std::string& name) -> Section {
        for (const RawSection& s : raw) {
            if (s.name == name) return Section(&s, &errors);
        }
        return Section(nullptr, &errors);
    };

    ExperimentConfig cfg;

    Section exp = section_of("experiment");
    if (!exp.present()) {
        errors.push_back("missing required [experiment] section");
    }
    const std::string kind_str = exp.present() ? exp.get_string("kind", "") : "";
    bool kind_ok = false;
    for (Kind k : {Kind::Evolve, Kind::Separation, Kind::Signal, Kind::Amplification,
                   Kind::Regcheck, Kind::Dispersion, Kind::FokkerPlanck}) {
        if (kind_str == kind_name(k)) {
            cfg.kind = k;
            kind_ok = true;
        }
    }
    if (exp.present() && !kind_ok) {
        errors.push_back("[experiment]: kind must be one of evolve, separation, "
                         "signal, amplification, regcheck, dispersion, fokker_planck; "
                         "got '" + kind_str + "'");
    }
    if (exp.present()) {
        cfg.seed = static_cast<unsigned long>(exp.get_long("seed", 0));
        exp.report_unknown();
    }

    // Allowed sections per experiment kind; anything else is an error.
    std::set<std::string> allowed = {"experiment", "grid", "hamiltonian", "output"};
    switch (cfg.kind) {
        case Kind::Evolve:
            allowed.insert({"state", "evolution"});
            break;
        case Kind::FokkerPlanck:
            allowed.insert({"state", "evolution", "fokker_planck"});
            break;
        case Kind::Separation:
            allowed.insert({"hamiltonian2", "evolution", "separation"});
            break;
        case Kind::Signal:
            allowed.insert({"evolution", "signal"});
            break;
        case Kind::Amplification:
            allowed.insert({"amplification"});
            break;
        case Kind::Regcheck:
            allowed.insert({"regcheck"});
            break;
        case Kind::Dispersion:
            allowed.insert({"dispersion"});
            break;
    }
    for (const RawSection& s : raw) {
        if (!allowed.count(s.name)) {
            errors.push_back("line " + std::to_string(s.line) + ": section [" +
                             s.name + "] not recognized for experiment '" +
                             kind_str + "'");
        }
    }

    Section grid = section_of("grid");
    if (!grid.present()) {
        errors.push_back("missing required [grid] section");
    } else {
        cfg.grid.n_dims = static_cast<int>(grid.get_long("n_dims", 1));
        cfg.grid.points = static_cast<int>(grid.get_long("points", 0));
        cfg.grid.extent = grid.get_double("extent", 0.0);
        if (cfg.grid.n_dims < 1 || cfg.grid.n_dims > 3) {
            errors.push_back("[grid]: n_dims must be 1, 2 or 3");
        }
        if (cfg.grid.points < 8) {
            errors.push_back("[grid]: points must be >= 8 (points below minimum)");
        }
        if (!(cfg.grid.extent > 0.0)) {
            errors.push_back("[grid]: extent must be positive");
        }
        double total = 1.0;
        for (int d = 0; d < std::max(1, cfg.grid.n_dims); ++d) total *= cfg.grid.points;
        if (total > static_cast<double>(std::size_t{1} << 24)) {
            errors.push_back("[grid]: total point count exceeds the 2^24 memory guard");
        }
        grid.report_unknown();
    }

    Section ham = section_of("hamiltonian");
    if (!ham.present()) {
        errors.push_back("missing required [hamiltonian] section");
    } else {
        cfg.hamiltonian = parse_hamiltonian(ham, errors, "hamiltonian");
        ham.report_unknown();
    }
    Section ham2 = section_of("hamiltonian2");
    if (ham2.present()) {
        cfg.hamiltonian2 = parse_hamiltonian(ham2, errors, "hamiltonian2");
        cfg.has_hamiltonian2 = true;
        ham2.report_unknown();
    } else {
        cfg.hamiltonian2 = cfg.hamiltonian;
    }

    Section state = section_of("state");
    if (state.present()) {
        cfg.state.kind = state.get_string("kind", "gaussian");
        cfg.state.sigma = state.get_double("sigma", 1.0);
        cfg.state.center = state.get_double("center", -1.0);
        cfg.state.momentum_mode = static_cast<int>(state.get_long("momentum_mode", 0));
        cfg.state.mode = static_cast<int>(state.get_long("mode", 1));
        if (cfg.state.kind != "gaussian" && cfg.state.kind != "plane_wave") {
            errors.push_back("[state]: kind must be gaussian or plane_wave");
        }
        if (!(cfg.state.sigma > 0.0)) {
            errors.push_back("[state]: sigma must be positive");
        }
        state.report_unknown();
    } else if (cfg.kind == Kind::Evolve || cfg.kind == Kind::FokkerPlanck) {
        errors.push_back("missing required [state] section");
    }

    Section evo = section_of("evolution");
    const bool needs_evolution = cfg.kind == Kind::Evolve ||
                                 cfg.kind == Kind::FokkerPlanck ||
                                 cfg.kind == Kind::Separation ||
                                 cfg.kind == Kind::Signal;
    if (evo.present()) {
        cfg.evolution.dt = evo.get_double("dt", 1e-3);
        cfg.evolution.steps = evo.get_long("steps", 0);
        cfg.evolution.integrator = evo.get_string("integrator", "rk4");
        cfg.evolution.record_every = evo.get_long("record_every", 1);
        cfg.evolution.override_stability = evo.get_bool("override_stability", false);
        if (!(cfg.evolution.dt > 0.0)) errors.push_back("[evolution]: dt must be positive");
        if (cfg.evolution.steps < 0) errors.push_back("[evolution]: steps must be >= 0");
        if (cfg.evolution.record_every < 1) {
            errors.push_back("[evolution]: record_every must be >= 1");
        }
        if (cfg.evolution.integrator != "rk4" && cfg.evolution.integrator != "split_step") {
            errors.push_back("[evolution]: integrator must be rk4 or split_step");
        }
        evo.report_unknown();
    } else if (needs_evolution) {
        errors.push_back("missing required [evolution] section");
    }

    // Stability guard at validation time: explicit RK4 on a
    // Laplacian-dominated equation.
    if (evo.present() && grid.present() && ham.present() &&
        cfg.evolution.integrator == "rk4" && !cfg.evolution.override_stability &&
        cfg.grid.points >= 8 && cfg.grid.extent > 0.0) {
        const double dx = cfg.grid.extent / cfg.grid.points;
        auto bound_of = [dx](const PhysicalConstants& c) {
            const double mh = c.mass / c.hbar;
            return 0.5 * dx * dx * mh / (1.0 + std::abs(c.D) * mh);
        };
        double bound = bound_of(cfg.hamiltonian.constants);
        if (cfg.has_hamiltonian2) {
            bound = std::min(bound, bound_of(cfg.hamiltonian2.constants));
        }
        if (cfg.evolution.dt > bound) {
            errors.push_back(
                "[evolution]: dt = " + std::to_string(cfg.evolution.dt) +
                " exceeds the stability bound " + std::to_string(bound) +
                " (set override_stability = true to force)");
        }
    }

    Section sep = section_of("separation");
    if (sep.present()) {
        cfg.separation.sigma1 = sep.get_double("sigma1", 2.0);
        cfg.separation.sigma2 = sep.get_double("sigma2", 2.0);
        cfg.separation.center1 = sep.get_double("center1", -1.0);
        cfg.separation.center2 = sep.get_double("center2", -1.0);
        cfg.separation.refine = sep.get_bool("refine", true);
        cfg.separation.q_sample = sep.get_string("q_sample", "none");
        cfg.separation.q_coupling = sep.get_double("q_coupling", 0.0);
        cfg.separation.tolerance = sep.get_double("tolerance", 1e-5);
        if (cfg.separation.q_sample != "none" && cfg.separation.q_sample != "projector") {
            errors.push_back("[separation]: q_sample must be none or projector");
        }
        if (!(cfg.separation.sigma1 > 0.0) || !(cfg.separation.sigma2 > 0.0)) {
            errors.push_back("[separation]: sigma1/sigma2 must be positive");
        }
        sep.report_unknown();
    } else if (cfg.kind == Kind::Separation) {
        errors.push_back("missing required [separation] section");
    }

    Section sig = section_of("signal");
    if (sig.present()) {
        cfg.signal.band = static_cast<int>(sig.get_long("band", 4));
        cfg.signal.s_loc = sig.get_double("s_loc", 1.0);
        cfg.signal.t_values = sig.get_double_list("t_values");
        cfg.signal.b_const = sig.get_double("b_const", 1.0);
        cfg.signal.b_cos_amp = sig.get_double("b_cos_amp", 0.5);
        cfg.signal.b_cos_mode = static_cast<int>(sig.get_long("b_cos_mode", 1));
        cfg.signal.state = sig.get_string("state", "epr");
        cfg.signal.state_mode = static_cast<int>(sig.get_long("state_mode", 1));
        cfg.signal.sigma1 = sig.get_double("sigma1", 1.5);
        cfg.signal.sigma2 = sig.get_double("sigma2", 2.5);
        cfg.signal.center1 = sig.get_double("center1", -1.0);
        cfg.signal.center2 = sig.get_double("center2", -1.0);
        if (cfg.signal.state != "epr" && cfg.signal.state != "two_mode") {
            errors.push_back("[signal]: state must be epr or two_mode");
        }
        if (cfg.signal.band < 0 || (cfg.grid.points > 0 &&
                                    cfg.signal.band > (cfg.grid.points - 1) / 2)) {
            errors.push_back("[signal]: band must satisfy 0 <= band <= (points-1)/2");
        }
        if (!(cfg.signal.s_loc > 0.0)) errors.push_back("[signal]: s_loc must be positive");
        for (double t : cfg.signal.t_values) {
            if (t < 0.0) errors.push_back("[signal]: t_values must be >= 0");
        }
        sig.report_unknown();
    } else if (cfg.kind == Kind::Signal) {
        errors.push_back("missing required [signal] section");
    }

    Section amp = section_of("amplification");
    if (amp.present()) {
        cfg.amplification.band = static_cast<int>(amp.get_long("band", 8));
        cfg.amplification.s_min = amp.get_double("s_min", 0.0);
        cfg.amplification.s_max = amp.get_double("s_max", 0.0);
        cfg.amplification.s_count = static_cast<int>(amp.get_long("s_count", 8));
        cfg.amplification.b_const = amp.get_double("b_const", 1.0);
        cfg.amplification.b_cos_amp = amp.get_double("b_cos_amp", 0.5);
        cfg.amplification.b_cos_mode = static_cast<int>(amp.get_long("b_cos_mode", 1));
        cfg.amplification.double_check = amp.get_bool("double_check", true);
        if (!(cfg.amplification.s_min > 0.0) ||
            !(cfg.amplification.s_max > cfg.amplification.s_min)) {
            errors.push_back("[amplification]: need 0 < s_min < s_max");
        }
        if (cfg.amplification.s_count < 4) {
            errors.push_back("[amplification]: s_count must be >= 4");
        }
        if (grid.present() && cfg.grid.points >= 8 && cfg.grid.extent > 0.0 &&
            cfg.grid.n_dims == 1) {
            Grid g(1, cfg.grid.points, cfg.grid.extent);
            const AdmissibleSRange r = admissible_s_range(g);
            if (cfg.amplification.s_min < r.s_min || cfg.amplification.s_max > r.s_max) {
                errors.push_back("[amplification]: s range outside the admissible [" +
                                 std::to_string(r.s_min) + ", " +
                                 std::to_string(r.s_max) + "] for this grid");
            }
        }
        amp.report_unknown();
    } else if (cfg.kind == Kind::Amplification) {
        errors.push_back("missing required [amplification] section");
    }

    Section reg = section_of("regcheck");
    if (reg.present()) {
        cfg.regcheck.s_min = reg.get_double("s_min", 0.0);
        cfg.regcheck.s_max = reg.get_double("s_max", 0.0);
        cfg.regcheck.s_count = static_cast<int>(reg.get_long("s_count", 8));
        cfg.regcheck.f_const = reg.get_double("f_const", 1.0);
        cfg.regcheck.f_cos_amp = reg.get_double("f_cos_amp", 0.5);
        cfg.regcheck.f_cos_mode = static_cast<int>(reg.get_long("f_cos_mode", 1));
        if (!(cfg.regcheck.s_min > 0.0) || !(cfg.regcheck.s_max > cfg.regcheck.s_min)) {
            errors.push_back("[regcheck]: need 0 < s_min < s_max");
        }
        if (cfg.regcheck.s_max < 10.0 * cfg.regcheck.s_min) {
            errors.push_back("[regcheck]: s range must span at least a decade");
        }
        if (cfg.regcheck.s_count < 4) {
            errors.push_back("[regcheck]: s_count must be >= 4");
        }
        reg.report_unknown();
    } else if (cfg.kind == Kind::Regcheck) {
        errors.push_back("missing required [regcheck] section");
    }

    Section disp = section_of("dispersion");
    if (disp.present()) {
        cfg.dispersion.modes = disp.get_int_list("modes");
        cfg.dispersion.window = disp.get_double("window", 1.0);
        cfg.dispersion.synthetic = disp.get_bool("synthetic", true);
        cfg.dispersion.syn_mass = disp.get_double("syn_mass", 1.0);
        cfg.dispersion.syn_kappa = disp.get_double("syn_kappa", 1.0);
        cfg.dispersion.syn_lp = disp.get_double("syn_lp", 1e-3);
        cfg.dispersion.syn_p_min = disp.get_double("syn_p_min", 0.1);
        cfg.dispersion.syn_p_max = disp.get_double("syn_p_max", 1.0);
        cfg.dispersion.syn_count = static_cast<int>(disp.get_long("syn_count", 12));
        if (cfg.dispersion.modes.size() < 6) {
            errors.push_back("[dispersion]: need >= 6 modes for the cubic fit");
        }
        if (!(cfg.dispersion.window > 0.0)) {
            errors.push_back("[dispersion]: window must be positive");
        }
        disp.report_unknown();
    } else if (cfg.kind == Kind::Dispersion) {
        errors.push_back("missing required [dispersion] section");
    }

    Section fp = section_of("fokker_planck");
    if (fp.present()) {
        cfg.fokker_planck.d_scan_min = fp.get_double("d_scan_min", 0.0);
        cfg.fokker_planck.d_scan_max = fp.get_double("d_scan_max", 0.1);
        cfg.fokker_planck.d_scan_steps = static_cast<int>(fp.get_long("d_scan_steps", 11));
        if (cfg.fokker_planck.d_scan_steps < 2) {
            errors.push_back("[fokker_planck]: d_scan_steps must be >= 2");
        }
        if (!(cfg.fokker_planck.d_scan_max > cfg.fokker_planck.d_scan_min)) {
            errors.push_back("[fokker_planck]: need d_scan_min < d_scan_max");
        }
        fp.report_unknown();
    } else if (cfg.kind == Kind::FokkerPlanck) {
        errors.push_back("missing required [fokker_planck] section");
    }

    Section out = section_of("output");
    if (out.present()) {
        cfg.output_directory = out.get_string("directory", ".");
        out.report_unknown();
    }

    // Resolve center defaults to the box midpoint.
    const double mid = cfg.grid.extent / 2.0;
    if (cfg.state.center < 0.0) cfg.state.center = mid;
    if (cfg.separation.center1 < 0.0) cfg.separation.center1 = mid;
    if (cfg.separation.center2 < 0.0) cfg.separation.center2 = mid;
    if (cfg.signal.center1 < 0.0) cfg.signal.center1 = cfg.grid.extent / 3.0;
    if (cfg.signal.center2 < 0.0) cfg.signal.center2 = 2.0 * cfg.grid.extent / 3.0;

    if (!errors.empty()) throw ValidationError(std::move(errors));
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError({"cannot open config file '" + path + "'"});
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return validate_config(buf.str());
}

}  // namespace nlq::experiment
