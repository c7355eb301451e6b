// Relaxation kernel, its assumption checks, and the discrete history variable.
#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jmgt/grid_spectral.hpp"

namespace jmgt {

class KernelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// g(s) = m c^2 exp(-s/tau_k)
struct KernelSpec {
    double m = 0.0;
    double c = 1.0;
    double tau_k = 1.0;
    double zeta = 0.0;  // 0 means "use 1/tau_k"

    double g0() const { return m * c * c; }
    double zeta_value() const { return zeta > 0.0 ? zeta : 1.0 / tau_k; }
};

KernelSpec make_kernel(double m, double c, double tau_k, double zeta = 0.0);

double kernel_eval(const KernelSpec& k, double s);
double kernel_deriv(const KernelSpec& k, double s);
double kernel_deriv2(const KernelSpec& k, double s);
double kernel_mass(const KernelSpec& k);
// integral of g over [s, inf)
double kernel_tail(const KernelSpec& k, double s);

struct CgSquared {
    double value;
    bool admissible;
};
CgSquared c_g_squared(const KernelSpec& k);

// Generic kernel described by callables. Used for assumption checks and
// history norms; the closed moment equations need the exponential family.
struct KernelFunctions {
    std::string name;
    std::function<double(double)> g, dg, d2g;
    std::function<double(double)> tail;  // integral of g over [s, inf)
    double zeta = 0.0;
    double c = 1.0;
    bool exponential = false;
    double tau_k = 0.0;

    double mass() const { return tail(0.0); }
};

KernelFunctions kernel_functions(const KernelSpec& k);

struct AssumptionEntry {
    std::string name;
    bool passed;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionEntry> entries;
    double c_g2 = 0.0;
    bool all_passed() const;
    const AssumptionEntry* find(const std::string& name) const;
};

// Optional physical data for the chain b > tau c^2 > tau c_g^2.
struct ChainInputs {
    double tau;
    double b;
};

AssumptionReport validate_assumptions(const KernelSpec& k, std::optional<ChainInputs> chain = std::nullopt);
AssumptionReport validate_assumptions(const KernelFunctions& k, std::optional<ChainInputs> chain = std::nullopt);

enum class EtaWeight { g, neg_dg, d2g };
const char* weight_name(EtaWeight w);

// Past psi snapshots at step resolution, most recent first.
// ring[j] holds psi(t - j*dt); psi(0) is kept separately as psi_init.
class HistoryField {
public:
    HistoryField() = default;
    HistoryField(SpectralField psi_init, double dt, std::size_t capacity);

    static std::size_t capacity_for(double s_max, double dt);

    void push_snapshot(const SpectralField& psi);

    const GridPtr& grid() const { return psi_init_.grid; }
    double dt() const { return dt_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t length() const { return ring_.size(); }
    std::size_t steps() const { return steps_; }
    double t_elapsed() const { return t_elapsed_; }
    const SpectralField& psi_init() const { return psi_init_; }
    const SpectralField& snapshot(std::size_t j) const { return ring_.at(j); }
    const std::deque<SpectralField>& ring() const { return ring_; }

    // whether the stored nodes reach back to t = 0
    bool complete() const { return steps_ <= capacity_ && steps_ == ring_.size(); }
    // number of usable past nodes psi(t - j dt), j = 0..count-1
    std::size_t node_count() const;
    const SpectralField& node(std::size_t j) const;

    // checkpoint support
    void restore(double dt, std::size_t capacity, std::size_t steps, double t_elapsed, SpectralField psi_init,
                 std::deque<SpectralField> ring);

private:
    double dt_ = 0.0;
    std::size_t capacity_ = 0;
    std::size_t steps_ = 0;
    double t_elapsed_ = 0.0;
    SpectralField psi_init_;
    std::deque<SpectralField> ring_;
};

// Quadrature nodes in s for the history at stage offset theta*dt.
// Panels: [0, theta dt] (if theta > 0), then width dt up to the oldest node.
struct HistoryQuadrature {
    std::vector<double> s;          // node positions, s[0] = 0 when theta > 0
    std::vector<double> lin;        // weights of int w(s) eta(s) ds for piecewise linear eta
    std::vector<double> sq_self;    // weights for |eta_i|^2
    std::vector<double> sq_cross;   // weights for Re(eta_i conj eta_{i+1}) (per panel)
    double tail = 0.0;              // int over s beyond the last node (only if history complete)
    bool has_tail = false;
    bool leading_zero = false;      // s[0] node carries eta = 0
};

HistoryQuadrature history_quadrature(const HistoryField& h, const KernelFunctions& k, EtaWeight weight,
                                     double theta);

// int_0^inf g(s) eta(t*, s) ds per mode (no Laplacian); t* = t + theta dt,
// psi_current is psi(t*).
SpectralField memory_moment(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                            double theta = 0.0);
SpectralField memory_moment(const HistoryField& h, const KernelSpec& k, const SpectralField& psi_current,
                            double theta = 0.0);
// int_0^inf g(s) Lap eta(t*, s) ds
SpectralField memory_integral(const HistoryField& h, const KernelSpec& k, const SpectralField& psi_current,
                              double theta = 0.0);
SpectralField memory_integral(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                              double theta = 0.0);

// per-mode int w(s) |eta_hat(s)|^2 ds
std::vector<double> eta_energy_density(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                                       EtaWeight weight);
double weighted_eta_norm(const HistoryField& h, const KernelSpec& k, const SpectralField& psi_current,
                         EtaWeight weight, int order);
double weighted_eta_norm(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                         EtaWeight weight, int order);
// (1/V) sum |xi|^(2 order) q  for a per-mode density
double density_seminorm_sq(const SpectralGrid& grid, const std::vector<double>& q, int order);

// Exact moment closure for the exponential kernel:
//   I = int g eta ds,  dI/dt = mass v - I/tau_k
//   Q = int g |eta|^2 ds,  dQ/dt = 2 Re(conj(I) v) - Q/tau_k
struct ClosedMemory {
    CVec moment;
    std::vector<double> energy;
};

ClosedMemory closed_memory_init(const SpectralField& psi0, const KernelSpec& k);

}  // namespace jmgt
