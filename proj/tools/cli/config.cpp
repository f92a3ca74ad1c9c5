// config.cpp: INI parsing, resolution and snapshots of run configurations

#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "format.hpp"
#include "heom/bath.hpp"
#include "heom/criteria.hpp"
#include "heom/psd.hpp"
#include "heom/units.hpp"

namespace heom::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_name(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"system", {"type", "units", "epsilon", "v", "eps1", "eps2", "u", "mu_ratio", "initial"}},
        {"bath", {"lambda", "gamma", "beta", "temperature"}},
        {"psd", {"order", "target"}},
        {"run",
         {"dt", "t_final", "filter_tol", "max_tier", "record_stride", "static", "ado_budget", "activation_factor",
          "frame"}},
        {"observables", {}},
        {"pulse", {"center_freq", "fwhm", "peak_rabi", "t0", "fwhm_convention"}},
    };
    return keys;
}

// Typed access to one section with line-numbered errors.
class Section {
public:
    Section(const RawConfig& raw, const std::string& name) : origin_(raw.origin), name_(name) {
        if (auto it = raw.sections.find(name); it != raw.sections.end()) entries_ = &it->second;
    }

    bool present() const { return entries_ != nullptr; }
    bool has(const std::string& key) const { return entries_ && entries_->count(key); }

    int line(const std::string& key) const { return has(key) ? entries_->at(key).line : 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(origin_, line(key), "[" + name_ + "] " + key + ": " + what);
    }

    std::string text(const std::string& key) const {
        if (!has(key)) fail(key, "missing required key");
        return entries_->at(key).value;
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? entries_->at(key).value : fallback;
    }

    double number(const std::string& key) const {
        const std::string v = text(key);
        auto parsed = parse_double(v);
        if (!parsed || !std::isfinite(*parsed)) fail(key, "expected a finite number, got '" + v + "'");
        return *parsed;
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key) const {
        const std::string v = text(key);
        auto parsed = parse_integer(v);
        if (!parsed) fail(key, "expected an integer, got '" + v + "'");
        return *parsed;
    }
    long long integer(const std::string& key, long long fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = text(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail(key, "expected true or false, got '" + v + "'");
    }

    std::string choice(const std::string& key, std::initializer_list<const char*> options,
                       const std::string& fallback) const {
        const std::string v = text(key, fallback);
        for (const char* o : options)
            if (v == o) return v;
        std::string all;
        for (const char* o : options) all += std::string(all.empty() ? "" : "|") + o;
        fail(key, "expected one of " + all + ", got '" + v + "'");
    }

    std::vector<std::pair<std::string, RawEntry>> entries() const {
        if (!entries_) return {};
        std::vector<std::pair<std::string, RawEntry>> out(entries_->begin(), entries_->end());
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second.seq < b.second.seq; });
        return out;
    }

private:
    std::string origin_;
    std::string name_;
    const std::map<std::string, RawEntry>* entries_{nullptr};
};

void check_known(const RawConfig& raw) {
    for (const auto& [name, entries] : raw.sections) {
        auto it = known_keys().find(name);
        if (it == known_keys().end()) {
            const auto line = raw.section_lines.find(name);
            throw ConfigError(raw.origin, line == raw.section_lines.end() ? 0 : line->second,
                              "unknown section [" + name + "]");
        }
        if (name == "observables") continue;
        for (const auto& [key, entry] : entries)
            if (!it->second.count(key)) throw ConfigError(raw.origin, entry.line, "[" + name + "] unknown key '" + key + "'");
    }
}

int parse_index(const std::string& token, int dim, const std::string& expr) {
    auto v = parse_integer(token);
    if (!v || *v < 0 || *v >= dim)
        throw ArgumentError("observable '" + expr + "': index '" + token + "' outside [0, " + std::to_string(dim - 1) + "]");
    return static_cast<int>(*v);
}

}  // namespace

RawConfig parse_ini(std::string_view text, std::string origin) {
    RawConfig raw;
    raw.origin = std::move(origin);
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(raw.origin, line_no, "unterminated section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name)) throw ConfigError(raw.origin, line_no, "invalid section name '" + std::string(name) + "'");
            current = std::string(name);
            if (raw.sections.count(current))
                throw ConfigError(raw.origin, line_no, "duplicate section [" + current + "]");
            raw.sections[current];
            raw.section_lines[current] = line_no;
        } else {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(raw.origin, line_no, "expected 'key = value'");
            if (current.empty()) throw ConfigError(raw.origin, line_no, "key outside of any section");
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (!valid_name(key)) throw ConfigError(raw.origin, line_no, "invalid key '" + key + "'");
            if (value.empty()) throw ConfigError(raw.origin, line_no, "empty value for '" + key + "'");
            auto [it, inserted] = raw.sections[current].try_emplace(key, RawEntry{value, line_no, line_no});
            if (!inserted)
                throw ConfigError(raw.origin, line_no,
                                  "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) + ")");
        }
        if (end == text.size()) break;
    }
    return raw;
}

RawConfig parse_snapshot(const nlohmann::ordered_json& config, std::string origin) {
    RawConfig raw;
    raw.origin = std::move(origin);
    if (!config.is_object()) throw ConfigError(raw.origin, 0, "manifest has no config object");
    for (const auto& [section, entries] : config.items()) {
        if (!entries.is_object()) throw ConfigError(raw.origin, 0, "config section '" + section + "' is not an object");
        auto& out = raw.sections[section];
        int seq = 0;
        for (const auto& [key, value] : entries.items()) {
            if (!value.is_string())
                throw ConfigError(raw.origin, 0, "config value " + section + "." + key + " must be a string");
            out[key] = RawEntry{value.get<std::string>(), 0, ++seq};
        }
    }
    return raw;
}

RawConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
        nlohmann::ordered_json manifest;
        try {
            manifest = nlohmann::ordered_json::parse(text);
        } catch (const nlohmann::ordered_json::parse_error& e) {
            throw ConfigError(path, 0, std::string("invalid JSON: ") + e.what());
        }
        if (!manifest.contains("config")) throw ConfigError(path, 0, "manifest has no config object");
        return parse_snapshot(manifest["config"], path);
    }
    return parse_ini(text, path);
}

RunConfig resolve(const RawConfig& raw) {
    check_known(raw);
    RunConfig c;

    const Section sys(raw, "system");
    c.system_type = sys.choice("type", {"spin_boson", "dimer"}, "");
    c.time_unit = sys.choice("units", {"reduced", "cm-1"}, "reduced") == "cm-1" ? TimeUnit::Femtoseconds
                                                                                  : TimeUnit::Reduced;
    if (c.system_type == "spin_boson") {
        for (const char* k : {"eps1", "eps2", "u", "mu_ratio"})
            if (sys.has(k)) sys.fail(k, "not a spin_boson parameter");
        c.spin_boson.epsilon = sys.number("epsilon");
        c.spin_boson.v = sys.number("v");
        c.initial = sys.choice("initial", {"up", "down"}, "up");
    } else {
        if (sys.has("epsilon")) sys.fail("epsilon", "not a dimer parameter (use eps1, eps2)");
        c.dimer.eps1 = sys.number("eps1");
        c.dimer.eps2 = sys.number("eps2");
        c.dimer.v = sys.number("v");
        c.dimer.u = sys.number("u", 0.0);
        c.dimer.mu_ratio = sys.number("mu_ratio", 1.0);
        c.initial = sys.choice("initial", {"ground", "site1", "site2"}, "ground");
    }

    const Section bath(raw, "bath");
    c.lambda = bath.number("lambda");
    c.gamma = bath.number("gamma");
    if (bath.has("temperature")) {
        if (bath.has("beta")) bath.fail("temperature", "give either beta or temperature, not both");
        if (c.time_unit != TimeUnit::Femtoseconds) bath.fail("temperature", "requires units = cm-1");
        const double kelvin = bath.number("temperature");
        if (!(kelvin > 0)) bath.fail("temperature", "must be > 0");
        c.temperature = kelvin;
        c.beta = units::beta_from_kelvin(kelvin);
    } else {
        c.beta = bath.number("beta");
    }
    if (!(c.lambda > 0)) bath.fail("lambda", "must be > 0");
    if (!(c.gamma > 0)) bath.fail("gamma", "must be > 0");
    if (!(c.beta > 0)) bath.fail("beta", "must be > 0");

    const SystemModel model = c.system_type == "spin_boson" ? build_spin_boson(c.spin_boson) : build_dimer(c.dimer);

    const Section psd(raw, "psd");
    const std::string order_text = psd.text("order");
    if (order_text == "auto") {
        const std::string target = psd.choice("target", {"accurate", "semi"}, "accurate");
        c.order_target = target;
        c.order = minimum_order(DrudeBath(c.lambda, c.gamma, c.beta), model.omega_s,
                                target == "accurate" ? AccuracyTier::Accurate : AccuracyTier::SemiQuantitative);
    } else {
        if (psd.has("target")) psd.fail("target", "only valid with order = auto");
        const auto n = psd.integer("order");
        if (n < 0 || n > kMaxPsdOrder) psd.fail("order", "must lie in [0, " + std::to_string(kMaxPsdOrder) + "]");
        c.order = static_cast<int>(n);
    }

    const Section run(raw, "run");
    const double time_scale = c.time_unit == TimeUnit::Femtoseconds ? units::femtoseconds_to_time(1.0) : 1.0;
    // default dt = 0.001 / E_ref with E_ref = |V|, or Omega_s when V = 0
    const double v = std::abs(c.system_type == "spin_boson" ? c.spin_boson.v : c.dimer.v);
    c.dt = run.number("dt", 0.001 / (v > 0 ? v : model.omega_s) / time_scale);
    if (!(c.dt > 0)) run.fail("dt", "must be > 0");
    c.t_final = run.number("t_final");
    if (!(c.t_final >= 0)) run.fail("t_final", "must be >= 0");
    c.filter_tol = run.number("filter_tol", 5e-7);
    if (!(c.filter_tol >= 0)) run.fail("filter_tol", "must be >= 0");
    const auto max_tier = run.integer("max_tier", kDefaultMaxTier);
    if (max_tier < 0 || max_tier > AdoIndex::kMaxOccupation) run.fail("max_tier", "must lie in [0, 255]");
    c.max_tier = static_cast<int>(max_tier);
    const auto stride = run.integer("record_stride", 1);
    if (stride < 1) run.fail("record_stride", "must be >= 1");
    c.record_stride = static_cast<int>(stride);
    c.static_hierarchy = run.flag("static", false);
    const auto budget = run.integer("ado_budget", 4'000'000);
    if (budget < 1) run.fail("ado_budget", "must be >= 1");
    c.ado_budget = static_cast<std::size_t>(budget);
    c.activation_factor = run.number("activation_factor", kDefaultActivationFactor);
    if (!(c.activation_factor >= 0)) run.fail("activation_factor", "must be >= 0");
    c.frame = run.choice("frame", {"rotating", "lab"}, "rotating") == "lab" ? DriveFrame::Lab : DriveFrame::Rotating;

    const Section obs(raw, "observables");
    const int dim = static_cast<int>(model.hamiltonian.rows());
    for (const auto& [name, entry] : obs.entries()) {
        try {
            observable_operator(ObservableSpec{name, entry.value}, dim);
        } catch (const ArgumentError& e) {
            obs.fail(name, e.what());
        }
        c.observables.push_back(ObservableSpec{name, entry.value});
    }
    if (c.observables.empty()) {
        for (int i = 0; i < dim; ++i) c.observables.push_back(ObservableSpec{"p" + std::to_string(i), "P " + std::to_string(i)});
    }

    const Section pulse(raw, "pulse");
    if (pulse.present()) {
        if (c.system_type != "dimer") pulse.fail("center_freq", "a pulse needs a system with a transition dipole");
        GaussianPulse p;
        p.center_freq = pulse.number("center_freq");
        p.fwhm = pulse.number("fwhm");
        if (!(p.fwhm > 0)) pulse.fail("fwhm", "must be > 0");
        p.peak_rabi = pulse.number("peak_rabi");
        p.t0 = pulse.number("t0");
        try {
            p.convention = parse_fwhm_convention(pulse.text("fwhm_convention", "amplitude"));
        } catch (const ArgumentError& e) {
            pulse.fail("fwhm_convention", e.what());
        }
        c.pulse = p;
    }
    return c;
}

nlohmann::ordered_json snapshot_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    auto& sys = j["system"];
    sys["type"] = c.system_type;
    sys["units"] = c.time_unit == TimeUnit::Femtoseconds ? "cm-1" : "reduced";
    if (c.system_type == "spin_boson") {
        sys["epsilon"] = format_double(c.spin_boson.epsilon);
        sys["v"] = format_double(c.spin_boson.v);
    } else {
        sys["eps1"] = format_double(c.dimer.eps1);
        sys["eps2"] = format_double(c.dimer.eps2);
        sys["v"] = format_double(c.dimer.v);
        sys["u"] = format_double(c.dimer.u);
        sys["mu_ratio"] = format_double(c.dimer.mu_ratio);
    }
    sys["initial"] = c.initial;

    auto& bath = j["bath"];
    bath["lambda"] = format_double(c.lambda);
    bath["gamma"] = format_double(c.gamma);
    if (c.temperature)
        bath["temperature"] = format_double(*c.temperature);
    else
        bath["beta"] = format_double(c.beta);

    j["psd"]["order"] = std::to_string(c.order);

    auto& run = j["run"];
    run["dt"] = format_double(c.dt);
    run["t_final"] = format_double(c.t_final);
    run["filter_tol"] = format_double(c.filter_tol);
    run["max_tier"] = std::to_string(c.max_tier);
    run["record_stride"] = std::to_string(c.record_stride);
    run["static"] = c.static_hierarchy ? "true" : "false";
    run["ado_budget"] = std::to_string(c.ado_budget);
    run["activation_factor"] = format_double(c.activation_factor);
    run["frame"] = c.frame == DriveFrame::Lab ? "lab" : "rotating";

    auto& obs = j["observables"];
    obs = nlohmann::ordered_json::object();
    for (const auto& o : c.observables) obs[o.name] = o.expr;

    if (c.pulse) {
        auto& p = j["pulse"];
        p["center_freq"] = format_double(c.pulse->center_freq);
        p["fwhm"] = format_double(c.pulse->fwhm);
        p["peak_rabi"] = format_double(c.pulse->peak_rabi);
        p["t0"] = format_double(c.pulse->t0);
        p["fwhm_convention"] = std::string(to_string(c.pulse->convention));
    }
    return j;
}

std::string snapshot_ini(const RunConfig& c) {
    const nlohmann::ordered_json j = snapshot_json(c);
    std::string out;
    for (const char* section : {"system", "bath", "psd", "run", "observables", "pulse"}) {
        if (!j.contains(section)) continue;
        out += std::string(out.empty() ? "" : "\n") + "[" + section + "]\n";
        for (const auto& [key, value] : j[section].items()) out += key + " = " + value.get<std::string>() + "\n";
    }
    return out;
}

Matrix observable_operator(const ObservableSpec& obs, int dim) {
    std::istringstream in(obs.expr);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    Matrix op = Matrix::Zero(dim, dim);
    const auto bad = [&](const std::string& why) -> ArgumentError {
        return ArgumentError("observable '" + obs.expr + "': " + why);
    };
    if (tok.empty()) throw bad("empty expression");
    const std::string& kind = tok[0];
    if (kind == "sigma_x" || kind == "sigma_y" || kind == "sigma_z") {
        if (dim != 2) throw bad("Pauli observables need a two-level system");
        if (tok.size() != 1) throw bad("takes no indices");
        if (kind == "sigma_x") op << 0, 1, 1, 0;
        if (kind == "sigma_y") op << 0, Complex(0, -1), Complex(0, 1), 0;
        if (kind == "sigma_z") op << 1, 0, 0, -1;
        return op;
    }
    if (kind == "P") {
        if (tok.size() != 2) throw bad("expected 'P i'");
        const int i = parse_index(tok[1], dim, obs.expr);
        op(i, i) = 1.0;
        return op;
    }
    if (kind == "X" || kind == "Y") {
        if (tok.size() != 3) throw bad("expected '" + kind + " i j'");
        const int i = parse_index(tok[1], dim, obs.expr);
        const int k = parse_index(tok[2], dim, obs.expr);
        if (i == k) throw bad("indices must differ");
        // X = |i><j| + |j><i| gives 2 Re rho_ji, Y = -i|i><j| + i|j><i| gives 2 Im rho_ji
        const Complex a = kind == "X" ? Complex(1, 0) : Complex(0, -1);
        op(i, k) = a;
        op(k, i) = std::conj(a);
        return op;
    }
    throw bad("unknown observable kind '" + kind + "'");
}

PreparedRun prepare(const RunConfig& c) {
    PreparedRun p;
    p.model = c.system_type == "spin_boson" ? build_spin_boson(c.spin_boson) : build_dimer(c.dimer);
    p.time_scale = c.time_unit == TimeUnit::Femtoseconds ? units::femtoseconds_to_time(1.0) : 1.0;

    const DrudeBath bath(c.lambda, c.gamma, c.beta);
    const BathExpansion expansion = expand(bath, compute_psd(c.order));
    p.spec.max_tier = c.max_tier;
    p.spec.filter_tol = c.filter_tol;
    for (const auto& q : p.model.couplings) p.spec.baths.push_back(BathCoupling{expansion, q});

    const int dim = static_cast<int>(p.model.hamiltonian.rows());
    p.initial = Matrix::Zero(dim, dim);
    if (c.initial == "up" || c.initial == "ground") p.initial(0, 0) = 1.0;
    if (c.initial == "down") p.initial(1, 1) = 1.0;
    if (c.initial == "site1") p.initial(kSite1, kSite1) = 1.0;
    if (c.initial == "site2") p.initial(kSite2, kSite2) = 1.0;

    p.config.dt = c.dt * p.time_scale;
    p.config.t_final = c.t_final * p.time_scale;
    p.config.filter_tol = c.filter_tol;
    p.config.max_tier = c.max_tier;
    p.config.record_stride = c.record_stride;
    p.config.static_hierarchy = c.static_hierarchy;
    p.config.ado_budget = c.ado_budget;
    p.config.activation_factor = c.activation_factor;
    for (const auto& o : c.observables) p.config.observables.push_back({o.name, observable_operator(o, dim)});

    if (c.pulse) {
        GaussianPulse pulse = *c.pulse;
        pulse.fwhm *= p.time_scale;
        pulse.t0 *= p.time_scale;
        p.hamiltonian = drive_rwa(p.model, pulse, c.frame);
    } else {
        const Matrix h = p.model.hamiltonian;
        p.hamiltonian = [h](double) { return h; };
    }
    return p;
}

}  // namespace heom::cli
