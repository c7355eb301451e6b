// Experiment drivers behind the jmgt command line.
#pragma once

#include <string>
#include <vector>

#include "jmgt/config.hpp"
#include "jmgt/energy.hpp"
#include "jmgt/linear_symbol.hpp"

namespace jmgt {

enum ExitCode : int { kExitOk = 0, kExitBlowUp = 2, kExitConfig = 3, kExitInvariant = 4 };

struct CommandResult {
    int exit_code = kExitOk;
    std::string message;
    std::vector<std::string> outputs;
};

// initial state from the profile, or the resume checkpoint when one is configured
StateVector initial_state_for(const RunSpec& spec, const PhysicalParams& p);

// Lyapunov parameters calibrated on seeded random states of a small grid
LyapunovParams calibrated_lyapunov(const PhysicalParams& p, int dim, double box_length, std::uint64_t seed,
                                   std::size_t samples = 16);

struct SimulationRecord {
    SolveResult result;
    std::vector<EnergyReport> series;
    std::vector<double> M;  // running sup monitor
    LyapunovParams lp;
    std::vector<std::string> violations;
};

SimulationRecord run_simulation(const StateVector& init, const PhysicalParams& p, const SolverConfig& cfg,
                                const LyapunovParams* lp = nullptr, bool v_inf = true);

struct SymbolOutcome {
    RadialSpectrum spectrum;
    std::vector<RadialNorms> rows;
    std::vector<DecayFit> fits;
};
SymbolOutcome run_symbol(const RunSpec& spec);

struct VerifyRow {
    std::string check;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyRow> rows;
    EmpiricalConstants constants;
    LyapunovParams lp;
    bool all_passed() const;
};
VerifyReport run_verify_energy(const RunSpec& spec);

// max over interior samples of |dE/dt - rhs| divided by max |rhs|
double max_identity_residual(const std::vector<EnergyReport>& series, int order, const PhysicalParams& p,
                             double dissipation_sign = 1.0);

struct ScanRun {
    double amplitude = 0.0;
    std::string verdict;  // bounded | growing | blow-up
    double norm0 = 0.0;   // |Psi|_E(0)
    double sup_norm = 0.0;
    double M_end = 0.0, M_tenth = 0.0;
    double C1 = 0.0, C2 = 0.0;
    BootstrapVerdict bootstrap;
    std::vector<double> t, M, triple;  // monitor series and |||Psi|||
};

struct ScanResult {
    std::vector<ScanRun> runs;
    double C0 = 0.0;  // sup |||Psi_lin||| / ||Psi_0||_E
    bool bracketed = false;
    double a_ok = 0.0, a_bad = 0.0;
};

ScanRun scan_single(const RunSpec& spec, const PhysicalParams& p, double amplitude, double C0);
double linear_response_constant(const RunSpec& spec, const PhysicalParams& p);
ScanResult run_scan(const RunSpec& spec);

struct ConvergenceRow {
    std::string kind;  // time | space
    int level = 0;
    double h = 0.0;
    double error = 0.0;
    double order = 0.0;  // log2(e_level / e_{level+1}); nan on the last row
};
std::vector<ConvergenceRow> run_convergence(const RunSpec& spec);

CommandResult cmd_simulate(const RunSpec& spec);
CommandResult cmd_symbol(const RunSpec& spec);
CommandResult cmd_verify_energy(const RunSpec& spec);
CommandResult cmd_scan_smallness(const RunSpec& spec);
CommandResult cmd_convergence(const RunSpec& spec);

// dispatch by command name; writes the manifest; maps errors to exit codes
CommandResult run_command(const std::string& command, const RunSpec& spec);

}  // namespace jmgt
