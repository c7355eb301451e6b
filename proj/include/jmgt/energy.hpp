// Energy functionals, identity checks, Lyapunov construction and decay monitors.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jmgt/core.hpp"

namespace jmgt {

// Test functions accepted by R1/R2.
enum class PhiTag { v_plus_tau_w, w, psi_plus_tau_v, tau_v };
const char* phi_name(PhiTag t);
PhiTag parse_phi(const std::string& s);
inline constexpr PhiTag kAllPhi[] = {PhiTag::v_plus_tau_w, PhiTag::w, PhiTag::psi_plus_tau_v, PhiTag::tau_v};

struct LyapunovParams {
    double L1 = 0.0, L2 = 0.0, eps = 0.0;
    double eps0 = 0.0, eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
    bool feasible = false;
    std::string reason;
};

struct EnergyReport {
    double t = 0.0;
    double E1 = 0, E2 = 0, scriptE1 = 0, scriptE2 = 0, F1 = 0, F2 = 0;
    double lyapunov = 0.0;
    double w_l2_sq = 0.0;
    // squared weighted history norms ||grad^j eta||^2_{weight}
    std::map<std::pair<EtaWeight, int>, double> eta_norms;
    std::map<PhiTag, double> r1_terms, r2_terms;
    double grad_v_sq = 0.0, lap_v_sq = 0.0;
    double normU = 0.0, normGradU = 0.0, normV = 0.0, normW = 0.0, v_inf = 0.0;
    double dissipation_integrand = 0.0;
    // filled by accumulate()
    double seminorm_E = 0.0, dissipation_D_cum = 0.0;

    double eta(EtaWeight w, int order) const { return eta_norms.at({w, order}); }
};

struct ReportOptions {
    bool r_terms = true;
    bool v_inf = true;
    const LyapunovParams* lp = nullptr;
    bool dealias = true;
};

double script_E1(const StateVector& s, const PhysicalParams& p);
double script_E2(const StateVector& s, const PhysicalParams& p);
double E1(const StateVector& s, const PhysicalParams& p);
double E2(const StateVector& s, const PhysicalParams& p);
double F1(const StateVector& s, const PhysicalParams& p);
double F2(const StateVector& s, const PhysicalParams& p);
double R1(const StateVector& s, const PhysicalParams& p, PhiTag tag);
double R2(const StateVector& s, const PhysicalParams& p, PhiTag tag);
double lyapunov(const StateVector& s, const PhysicalParams& p, const LyapunovParams& lp);
// (scriptE1 + scriptE2 + ||w||^2)^(1/2) at one instant
double energy_norm(const StateVector& s, const PhysicalParams& p);

EnergyReport energy_report(const StateVector& s, const PhysicalParams& p, const ReportOptions& opt = {});

// Appends a report and updates running sup and the trapezoid dissipation integral.
void accumulate(std::vector<EnergyReport>& series, EnergyReport r);

// |Psi|_E and |Psi|_D at time t over the samples with t_i <= t
double seminorm_E(const std::vector<EnergyReport>& series, double t);
double dissipation_D(const std::vector<EnergyReport>& series, double t);

struct IdentityResidual {
    double dEdt = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

// |dE/dt - rhs| at the sample nearest t by centered differences; rhs is the
// order-j dissipation plus R^(j)(v + tau w). dissipation_sign flips the
// dissipation terms (fault-injection hook).
IdentityResidual energy_identity_residual(const std::vector<EnergyReport>& series, double t, int order,
                                          const PhysicalParams& p, double dissipation_sign = 1.0);

double monitor_M(const std::vector<EnergyReport>& series, double t, int n);
double monitor_M0(const std::vector<EnergyReport>& series, double t, int n);
// running-sup series of M
std::vector<double> monitor_M_series(const std::vector<EnergyReport>& series, int n);

struct BootstrapVerdict {
    bool hypothesis = false;   // M <= C1 + C2 M^kappa pointwise
    bool initial = false;      // M(0) <= C1
    bool smallness = false;    // C1 C2^(1/(kappa-1)) < (1 - 1/kappa) kappa^(-1/(kappa-1))
    bool conclusion = false;   // M < C1/(1 - 1/kappa) on the whole series
    double product = 0.0;
    double threshold = 0.0;
    double bound = 0.0;
    bool passed() const { return hypothesis && initial && smallness && conclusion; }
};

BootstrapVerdict bootstrap_check(const std::vector<double>& M, double C1, double C2, double kappa);

// Band-limited random real fields with |coeff| ~ (1+|xi|^2)^-2; history is a
// random smooth eta(s) with eta(0) = 0 stored in ring form.
StateVector random_state(const GridPtr& grid, const PhysicalParams& p, std::uint64_t seed, double hist_dt = 0.05,
                         std::size_t hist_nodes = 40, bool closed = false);
SpectralField random_field(const GridPtr& grid, std::uint64_t seed, double amplitude = 1.0);

// Generic constants measured from sample states.
struct EmpiricalConstants {
    double C = 0.0;          // sup ||c_g^2 Lap psi + b Lap v + int g Lap eta||^2 / (tau^2 (||Lap(psi+tau v)||^2 + ||Lap v||^2 + ||Lap eta||^2_g))
    double eta_ratio = 0.0;  // sup zeta (||eta||_g^2 terms) / (||eta||_{-g'}^2 terms)
    double f1_ratio = 0.0;   // sup |F1| / (E1 + E2)
    double f2_ratio = 0.0;   // sup |F2| / (E1 + E2)
    std::size_t samples = 0;
};

EmpiricalConstants calibrate_constants(const PhysicalParams& p, const std::vector<StateVector>& states);

// Young-inequality constants of the selection chain
double young_C_eps0(const PhysicalParams& p, double eps0);
double young_C_eps1(double eps1);
double young_C_eps23(const PhysicalParams& p, double eps2, double eps3);

LyapunovParams select_lyapunov_params(const PhysicalParams& p, const EmpiricalConstants& k);
// every inequality of the chain as a report entry
std::vector<AssumptionEntry> check_lyapunov_chain(const LyapunovParams& lp, const PhysicalParams& p,
                                                  const EmpiricalConstants& k);

// finite values and E1, E2 >= 0 for admissible params
std::vector<std::string> check_energy_invariants(const EnergyReport& r, const PhysicalParams& p);

}  // namespace jmgt
