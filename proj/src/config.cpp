#include "jmgt/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace jmgt {

namespace {

namespace pt = boost::property_tree;

std::string fmt_double(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void parse_value(const std::string& key, const std::string& text, double& out) {
    const std::string t = trim(text);
    double v = 0.0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(key + ": expected a finite number, got '" + text + "'");
    out = v;
}

void parse_value(const std::string& key, const std::string& text, int& out) {
    const std::string t = trim(text);
    int v = 0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    out = v;
}

void parse_value(const std::string& key, const std::string& text, std::uint64_t& out) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    out = v;
}

void parse_value(const std::string& key, const std::string& text, bool& out) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") out = true;
    else if (t == "false" || t == "0" || t == "no" || t == "off") out = false;
    else throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

void parse_value(const std::string&, const std::string& text, std::string& out) { out = trim(text); }

std::string show(double x) { return fmt_double(x); }
std::string show(int x) { return std::to_string(x); }
std::string show(std::uint64_t x) { return std::to_string(x); }
std::string show(bool x) { return x ? "true" : "false"; }
std::string show(const std::string& x) { return x; }

struct Entry {
    std::string section, key;
    std::function<void(RunSpec&, const std::string&)> set;
    std::function<std::string(const RunSpec&)> get;
};

template <class S, class T>
Entry field(const char* section, const char* key, S RunSpec::*outer, T S::*inner) {
    const std::string full = std::string(section) + "." + key;
    return Entry{section, key,
                 [=](RunSpec& r, const std::string& text) { parse_value(full, text, (r.*outer).*inner); },
                 [=](const RunSpec& r) { return show((r.*outer).*inner); }};
}

const std::vector<Entry>& schema() {
    static const std::vector<Entry> s = [] {
        using R = RunSpec;
        std::vector<Entry> e;
        e.push_back(field("physics", "tau", &R::physics, &PhysicsSection::tau));
        e.push_back(field("physics", "c", &R::physics, &PhysicsSection::c));
        e.push_back(field("physics", "delta", &R::physics, &PhysicsSection::delta));
        e.push_back(field("physics", "m", &R::physics, &PhysicsSection::m));
        e.push_back(field("physics", "tau_k", &R::physics, &PhysicsSection::tau_k));
        e.push_back(field("physics", "zeta", &R::physics, &PhysicsSection::zeta));
        e.push_back(field("physics", "k", &R::physics, &PhysicsSection::k));
        e.push_back(field("physics", "b_over_a", &R::physics, &PhysicsSection::b_over_a));
        e.push_back(field("physics", "alpha", &R::physics, &PhysicsSection::alpha));
        e.push_back(field("physics", "rho", &R::physics, &PhysicsSection::rho));
        e.push_back(field("physics", "allow_non_subcritical", &R::physics, &PhysicsSection::allow_non_subcritical));
        e.push_back(field("grid", "dim", &R::grid, &GridSection::dim));
        e.push_back(field("grid", "points", &R::grid, &GridSection::points));
        e.push_back(field("grid", "box_length", &R::grid, &GridSection::box_length));
        e.push_back(field("time", "dt", &R::time, &TimeSection::dt));
        e.push_back(field("time", "t_end", &R::time, &TimeSection::t_end));
        e.push_back(field("time", "scheme", &R::time, &TimeSection::scheme));
        e.push_back(field("time", "dealias", &R::time, &TimeSection::dealias));
        e.push_back(field("time", "resume_from", &R::time, &TimeSection::resume_from));
        e.push_back(field("history", "mode", &R::history, &HistorySection::mode));
        e.push_back(field("history", "s_max_factor", &R::history, &HistorySection::s_max_factor));
        e.push_back(field("history", "interpolation", &R::history, &HistorySection::interpolation));
        e.push_back(field("experiment", "kind", &R::experiment, &ExperimentSection::kind));
        e.push_back(field("experiment", "profile", &R::experiment, &ExperimentSection::profile));
        e.push_back(field("experiment", "amplitude", &R::experiment, &ExperimentSection::amplitude));
        e.push_back(field("experiment", "width", &R::experiment, &ExperimentSection::width));
        e.push_back(field("experiment", "velocity_amplitude", &R::experiment, &ExperimentSection::velocity_amplitude));
        e.push_back(field("experiment", "accel_amplitude", &R::experiment, &ExperimentSection::accel_amplitude));
        e.push_back(field("experiment", "mode", &R::experiment, &ExperimentSection::mode));
        e.push_back(field("experiment", "seed", &R::experiment, &ExperimentSection::seed));
        e.push_back(field("output", "directory", &R::output, &OutputSection::directory));
        e.push_back(field("output", "stride", &R::output, &OutputSection::stride));
        e.push_back(field("output", "formats", &R::output, &OutputSection::formats));
        e.push_back(field("symbol", "n", &R::symbol, &SymbolSection::n));
        e.push_back(field("symbol", "nodes", &R::symbol, &SymbolSection::nodes));
        e.push_back(field("symbol", "xi_min", &R::symbol, &SymbolSection::xi_min));
        e.push_back(field("symbol", "xi_max", &R::symbol, &SymbolSection::xi_max));
        e.push_back(field("symbol", "t_end", &R::symbol, &SymbolSection::t_end));
        e.push_back(field("symbol", "dt_out", &R::symbol, &SymbolSection::dt_out));
        e.push_back(field("symbol", "fit_lo", &R::symbol, &SymbolSection::fit_lo));
        e.push_back(field("symbol", "fit_hi", &R::symbol, &SymbolSection::fit_hi));
        e.push_back(field("scan", "amp_min", &R::scan, &ScanSection::amp_min));
        e.push_back(field("scan", "amp_max", &R::scan, &ScanSection::amp_max));
        e.push_back(field("scan", "ladder_factor", &R::scan, &ScanSection::ladder_factor));
        e.push_back(field("scan", "bisect_steps", &R::scan, &ScanSection::bisect_steps));
        e.push_back(field("scan", "bound_factor", &R::scan, &ScanSection::bound_factor));
        e.push_back(field("scan", "growth_factor", &R::scan, &ScanSection::growth_factor));
        e.push_back(field("scan", "kappa", &R::scan, &ScanSection::kappa));
        e.push_back(field("convergence", "levels", &R::convergence, &ConvergenceSection::levels));
        e.push_back(field("convergence", "kind", &R::convergence, &ConvergenceSection::kind));
        e.push_back(field("verify", "samples", &R::verify, &VerifySection::samples));
        e.push_back(field("verify", "corrupt_dissipation", &R::verify, &VerifySection::corrupt_dissipation));
        return e;
    }();
    return s;
}

const Entry* find_entry(const std::string& section, const std::string& key) {
    for (const auto& e : schema())
        if (e.section == section && e.key == key) return &e;
    return nullptr;
}

bool known_section(const std::string& section) {
    for (const auto& e : schema())
        if (e.section == section) return true;
    return false;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

Scheme parse_scheme(const std::string& s) {
    if (s == "rk4") return Scheme::rk4;
    if (s == "etd_imex") return Scheme::etd_imex;
    throw ConfigError("time.scheme: unknown scheme '" + s + "' (rk4 | etd_imex)");
}

const char* scheme_name(Scheme s) { return s == Scheme::rk4 ? "rk4" : "etd_imex"; }

RunSpec parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunSpec spec;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config: key '" + section + "' outside any section");
        if (!known_section(section)) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            const Entry* e = find_entry(section, key);
            if (!e) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
            e->set(spec, value.data());
            spec.explicit_keys.insert(section + "." + key);
        }
    }
    validate(spec);
    return spec;
}

RunSpec load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunSpec& spec) {
    std::ostringstream out;
    std::string current;
    for (const auto& e : schema()) {
        if (e.section != current) {
            if (!current.empty()) out << "\n";
            out << "[" << e.section << "]\n";
            current = e.section;
        }
        out << e.key << " = " << e.get(spec) << "\n";
    }
    return out.str();
}

void validate(const RunSpec& s) {
    require(s.grid.dim >= 1 && s.grid.dim <= 3, "grid.dim must be 1, 2 or 3");
    require(s.grid.points >= 8 && s.grid.points % 2 == 0, "grid.points must be even and at least 8");
    require(s.grid.box_length > 0.0, "grid.box_length must be positive");
    require(s.time.dt > 0.0, "time.dt must be positive");
    require(s.time.t_end >= s.time.dt, "time.t_end must be at least time.dt");
    parse_scheme(s.time.scheme);
    require(s.history.mode == "auto" || s.history.mode == "ring" || s.history.mode == "closed",
            "history.mode must be auto, ring or closed");
    require(s.history.s_max_factor > 0.0, "history.s_max_factor must be positive");
    require(s.history.interpolation == "linear", "history.interpolation: only 'linear' is supported");
    const std::string& kind = s.experiment.kind;
    require(kind == "simulate" || kind == "symbol" || kind == "verify-energy" || kind == "scan-smallness" ||
                kind == "convergence",
            "experiment.kind: unknown kind '" + kind + "'");
    const std::string& prof = s.experiment.profile;
    require(prof == "gaussian" || prof == "single_mode" || prof == "random",
            "experiment.profile must be gaussian, single_mode or random");
    require(s.experiment.width > 0.0, "experiment.width must be positive");
    if (prof == "single_mode") {
        auto idx = split_list(s.experiment.mode);
        require(!idx.empty() && idx.size() <= 3, "experiment.mode: expected up to three comma-separated integers");
        for (const auto& i : idx) {
            int v = 0;
            parse_value("experiment.mode", i, v);
        }
    }
    require(s.output.stride >= 1, "output.stride must be >= 1");
    for (const auto& f : split_list(s.output.formats))
        require(f == "csv" || f == "svg" || f == "checkpoint", "output.formats: unknown format '" + f + "'");
    require(s.symbol.n >= 1 && s.symbol.n <= 3, "symbol.n must be 1, 2 or 3");
    require(s.symbol.nodes >= 16, "symbol.nodes must be at least 16");
    require(s.symbol.xi_min > 0.0 && s.symbol.xi_max > s.symbol.xi_min, "symbol: need 0 < xi_min < xi_max");
    require(s.symbol.t_end > 0.0 && s.symbol.dt_out > 0.0, "symbol: t_end and dt_out must be positive");
    require(s.symbol.fit_lo > 0.0 && s.symbol.fit_hi > s.symbol.fit_lo, "symbol: need 0 < fit_lo < fit_hi");
    require(s.scan.amp_min >= 0.0 && s.scan.amp_max >= s.scan.amp_min, "scan: need 0 <= amp_min <= amp_max");
    require(s.scan.ladder_factor > 1.0, "scan.ladder_factor must exceed 1");
    require(s.scan.bisect_steps >= 0, "scan.bisect_steps must be >= 0");
    require(s.scan.bound_factor >= 1.0, "scan.bound_factor must be >= 1");
    require(s.scan.growth_factor > 1.0, "scan.growth_factor must exceed 1");
    require(s.scan.kappa > 1.0, "scan.kappa must exceed 1");
    require(s.convergence.levels >= 2, "convergence.levels must be >= 2");
    require(s.convergence.kind == "time" || s.convergence.kind == "space" || s.convergence.kind == "both",
            "convergence.kind must be time, space or both");
    require(s.verify.samples >= 1, "verify.samples must be >= 1");
    if (!s.physics.b_over_a.empty())
        require(!s.explicit_keys.count("physics.k"), "physics: set either k or b_over_a, not both");
    try {
        s.params();
    } catch (const ParamError& e) {
        throw ConfigError(std::string("physics: ") + e.what());
    }
}

PhysicalParams RunSpec::params() const {
    double k = physics.k;
    if (!physics.b_over_a.empty()) {
        double r = 0.0;
        parse_value("physics.b_over_a", physics.b_over_a, r);
        k = nonlinearity_from_ratio(r, physics.c);
    }
    return make_params(physics.tau, physics.c, physics.delta, k, physics.m, physics.tau_k, physics.alpha,
                       physics.allow_non_subcritical, physics.zeta, physics.rho);
}

GridPtr RunSpec::make_grid() const {
    return jmgt::make_grid(grid.dim, grid.points,
                           grid.box_length);
}

SolverConfig RunSpec::solver() const {
    SolverConfig c;
    c.dt = time.dt;
    c.t_end = time.t_end;
    c.scheme = parse_scheme(time.scheme);
    c.dealias = time.dealias;
    c.monitor_stride = static_cast<std::size_t>(output.stride);
    return c;
}

HistoryOptions RunSpec::history_options() const {
    HistoryOptions h;
    // the exponential kernel admits the exact two-moment closure
    h.mode = history.mode == "ring" ? MemoryMode::ring : MemoryMode::closed;
    h.dt = time.dt;
    h.s_max_factor = history.s_max_factor;
    return h;
}

Profile RunSpec::profile() const {
    if (experiment.profile == "single_mode") {
        SingleModeProfile sm;
        sm.mode = {0, 0, 0};
        auto idx = split_list(experiment.mode);
        for (std::size_t i = 0; i < idx.size() && i < 3; ++i) parse_value("experiment.mode", idx[i], sm.mode[i]);
        sm.a0 = experiment.amplitude;
        sm.a1 = experiment.velocity_amplitude;
        sm.a2 = experiment.accel_amplitude;
        sm.real = true;
        return sm;
    }
    GaussianProfile gp;
    gp.amplitude = experiment.amplitude;
    gp.width = experiment.width;
    return gp;
}

bool RunSpec::wants(const std::string& format) const {
    for (const auto& f : split_list(output.formats))
        if (f == format) return true;
    return false;
}

}  // namespace jmgt
