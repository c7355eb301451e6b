// Run configuration: sectioned key = value files.
#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

#include "jmgt/core.hpp"

namespace jmgt {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PhysicsSection {
    double tau = 0.5, c = 1.0, delta = 0.1, m = 0.1, tau_k = 0.5, zeta = 0.0;
    double k = 0.0;
    std::string b_over_a;  // empty unless k is derived from B/A
    double alpha = 1.0, rho = 1.0;
    bool allow_non_subcritical = false;
};

struct GridSection {
    int dim = 3;
    int points = 32;
    double box_length = 40.0;
};

struct TimeSection {
    double dt = 1e-3;
    double t_end = 1.0;
    std::string scheme = "rk4";  // rk4 | etd_imex
    bool dealias = true;
    std::string resume_from;
};

struct HistorySection {
    std::string mode = "auto";  // auto | ring | closed
    double s_max_factor = 40.0;
    std::string interpolation = "linear";
};

struct ExperimentSection {
    std::string kind = "simulate";
    std::string profile = "gaussian";  // gaussian | single_mode | random
    double amplitude = 1e-3;
    double width = 1.0;
    double velocity_amplitude = 0.0;
    double accel_amplitude = 0.0;
    std::string mode = "1,0,0";
    std::uint64_t seed = 1;
};

struct OutputSection {
    std::string directory = "out";
    int stride = 1;
    std::string formats = "csv,svg,checkpoint";
};

struct SymbolSection {
    int n = 3;
    int nodes = 2048;
    double xi_min = 1e-3, xi_max = 100.0;
    double t_end = 1000.0, dt_out = 1.0;
    double fit_lo = 50.0, fit_hi = 1000.0;
};

struct ScanSection {
    double amp_min = 1e-4, amp_max = 1.0;
    double ladder_factor = 10.0;
    int bisect_steps = 4;
    double bound_factor = 2.0;
    double growth_factor = 10.0;
    double kappa = 1.5;
};

struct ConvergenceSection {
    int levels = 4;
    std::string kind = "time";  // time | space | both
};

struct VerifySection {
    int samples = 100;
    bool corrupt_dissipation = false;
};

struct RunSpec {
    PhysicsSection physics;
    GridSection grid;
    TimeSection time;
    HistorySection history;
    ExperimentSection experiment;
    OutputSection output;
    SymbolSection symbol;
    ScanSection scan;
    ConvergenceSection convergence;
    VerifySection verify;
    std::set<std::string> explicit_keys;  // "section.key" entries present in the source

    PhysicalParams params() const;
    GridPtr make_grid() const;
    SolverConfig solver() const;
    HistoryOptions history_options() const;
    Profile profile() const;
    bool wants(const std::string& format) const;
};

RunSpec parse_config(const std::string& text);
RunSpec load_config(const std::string& path);
// Normalized text: every key in schema order with canonical values.
std::string dump_config(const RunSpec& spec);
// Checks cross-field constraints and physics admissibility; throws ConfigError.
void validate(const RunSpec& spec);

Scheme parse_scheme(const std::string& s);
const char* scheme_name(Scheme s);

}  // namespace jmgt
