// First-order JMGT system on the periodic box: parameters, state, integrators.
#pragma once

#include <functional>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "jmgt/grid_spectral.hpp"
#include "jmgt/memory_kernel.hpp"

namespace jmgt {

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PhysicalParams {
    double tau = 0.5;
    double alpha = 1.0;
    double c = 1.0;
    double delta = 0.1;
    double b = 0.6;  // delta + tau c^2
    double k = 0.0;
    double rho = 1.0;
    KernelSpec kernel;
    bool allow_non_subcritical = false;

    double mass() const { return kernel_mass(kernel); }
    double c_g2() const { return c * c - mass(); }
};

// Builds params with b = delta + tau c^2 and validates them. Throws ParamError
// unless the chain b > tau c^2 > tau c_g^2 holds or the override flag is set;
// non-admissible data (delta < 0, c_g^2 <= 0, ...) is always rejected.
PhysicalParams make_params(double tau, double c, double delta, double k, double m, double tau_k,
                           double alpha = 1.0, bool allow_non_subcritical = false, double zeta = 0.0,
                           double rho = 1.0);
// k = (B/(2A) + 1)/c^2
double nonlinearity_from_ratio(double b_over_a, double c);

enum class ParamClass { subcritical, critical, non_admissible };
const char* class_name(ParamClass c);

struct ParamsReport {
    ParamClass cls = ParamClass::non_admissible;
    std::vector<AssumptionEntry> checks;
    std::string summary() const;
};

ParamsReport validate_params(const PhysicalParams& p);
// throws ParamError with the report inlined when p may not be run
void require_runnable(const PhysicalParams& p);

enum class MemoryMode { ring, closed };
enum class Scheme { rk4, etd_imex };

struct StateVector {
    SpectralField psi, v, w;
    HistoryField history;
    std::optional<ClosedMemory> closed;
    double t = 0.0;
    std::size_t step_count = 0;

    const GridPtr& grid() const { return psi.grid; }
    MemoryMode mode() const { return closed ? MemoryMode::closed : MemoryMode::ring; }
};

struct GaussianProfile {
    double amplitude = 1.0;
    double width = 1.0;
    std::optional<std::array<double, 3>> center;  // default: box center
};

struct SingleModeProfile {
    std::array<int, 3> mode{1, 0, 0};  // integer wavenumber indices
    cplx a0 = 1.0, a1 = 0.0, a2 = 0.0;
    bool real = false;  // real cosine pair instead of one complex exponential
};

struct CustomProfile {
    std::vector<double> psi0, psi1, psi2;  // samples
};

struct HistoryOptions {
    MemoryMode mode = MemoryMode::ring;
    double dt = 1e-3;
    double s_max_factor = 40.0;  // s_max = factor * tau_k
};

using Profile = std::variant<GaussianProfile, SingleModeProfile, CustomProfile>;

StateVector initial_state(const GridPtr& grid, const Profile& profile, const PhysicalParams& params,
                          const HistoryOptions& hist, std::vector<std::string>* warnings = nullptr);
StateVector state_from_fields(SpectralField psi0, SpectralField psi1, SpectralField psi2, const PhysicalParams& params,
                              const HistoryOptions& hist);

// memory term int g Lap eta ds for the state at its current time
SpectralField state_memory_integral(const StateVector& s, const PhysicalParams& p);
// int g eta ds (no Laplacian)
SpectralField state_memory_moment(const StateVector& s, const PhysicalParams& p);
// per-mode int w |eta_hat|^2 ds
std::vector<double> state_eta_density(const StateVector& s, const PhysicalParams& p, EtaWeight weight);

struct Derivative {
    SpectralField dpsi, dv, dw;
    CVec dmoment;               // closed memory only
    std::vector<double> denergy;
};

class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

Derivative rhs(const StateVector& s, const PhysicalParams& p, bool dealiased = true);

struct SolverConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    Scheme scheme = Scheme::rk4;
    bool dealias = true;
    std::size_t monitor_stride = 1;
    double blowup_factor = 1e6;
};

// Extra forcing added to tau*w_t at a given step and RK stage (0..3).
using SourceFn = std::function<const SpectralField*(std::size_t step, int stage)>;
// Observer of the (v, w) values at which the nonlinearity is sampled.
using StageObserver = std::function<void(std::size_t step, int stage, const SpectralField& v, const SpectralField& w)>;

class Stepper {
public:
    Stepper(const PhysicalParams& p, double dt, Scheme scheme, bool dealiased = true);

    void step(StateVector& s);

    // linear solve with external forcing instead of 2k v w
    bool include_nonlinearity = true;
    SourceFn source;
    StageObserver observer;

    double dt() const { return dt_; }

private:
    struct Stage {
        SpectralField dpsi, dv, dw;
        CVec dI;
        std::vector<double> dQ;
    };
    void eval(const StateVector& base, const SpectralField& psi, const SpectralField& v, const SpectralField& w,
              const CVec* I, const std::vector<double>* Q, double theta, int stage, Stage& out);
    void step_rk4(StateVector& s);
    void step_etd(StateVector& s);
    void build_etd(const SpectralGrid& g);

    PhysicalParams p_;
    KernelFunctions kf_;
    double dt_;
    Scheme scheme_;
    bool dealiased_;
    // etd tables per distinct |xi|^2
    const SpectralGrid* etd_grid_ = nullptr;
    std::vector<std::size_t> etd_index_;
    std::vector<std::array<double, 9>> etd_E_;
    std::vector<std::array<double, 3>> etd_phi_;
};

StateVector step(StateVector s, const PhysicalParams& p, double dt, Scheme scheme);

using Monitor = std::function<void(const StateVector& s)>;

struct SolveResult {
    StateVector final_state;  // last finite state
    bool blew_up = false;
    double blowup_time = 0.0;
    std::string message;
    std::size_t steps = 0;
};

// Advances to t_end; monitor is called at t = 0, every monitor_stride steps and at the end.
SolveResult solve(StateVector init, const PhysicalParams& p, const SolverConfig& cfg, const Monitor& monitor = {},
                  Stepper* custom = nullptr);

// Stored trajectory samples for residual and Picard diagnostics.
struct TrajectoryNode {
    double t;
    SpectralField psi, v, w, mem;
};
using Trajectory = std::vector<TrajectoryNode>;

TrajectoryNode make_node(const StateVector& s, const PhysicalParams& p);

// L2 norm of tau psi_ttt + alpha psi_tt - c_g^2 Lap psi - b Lap psi_t - int g Lap eta - 2k v w,
// with psi_ttt from a 5-point difference of the stored w.
double residual_third_order(const Trajectory& traj, double t, const PhysicalParams& p);

// Picard iteration for the frozen-source linear problem.
struct PicardIterate {
    std::vector<TrajectoryNode> nodes;                         // per step, t = 0..T
    std::vector<std::array<SpectralField, 4>> stage_v, stage_w;  // per step and RK stage
};

struct PicardResult {
    PicardIterate fixed_point;
    std::vector<double> distances;  // sup_t |Psi^{k+1} - Psi^k|_E
    std::vector<double> ratios;     // distances[k+1]/distances[k]
    std::size_t iterations = 0;
    bool converged = false;
};

// One application of the map: solve the linear problem with source (2k/tau)-scaled v^phi w^phi.
PicardIterate picard_map(const PicardIterate& phi, const StateVector& init, const PhysicalParams& p, double T,
                         double dt);
PicardIterate zero_source_iterate(const StateVector& init, double T, double dt);
// |.|_E distance sup over nodes between two iterates (same init)
double picard_distance(const PicardIterate& a, const PicardIterate& b, const PhysicalParams& p);
PicardResult picard_solve(const StateVector& init, const PhysicalParams& p, double T, double dt, std::size_t max_iter,
                          double tol);

}  // namespace jmgt
