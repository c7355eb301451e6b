// Per-mode Fourier analysis of the linear system and radial decay experiments.
#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jmgt/core.hpp"

namespace jmgt {

struct ModeBundle {
    double xi = 0.0;
    cplx psi = 0.0, v = 0.0, w = 0.0;
    cplx I = 0.0;   // int g eta_hat ds
    double Q = 0.0; // int g |eta_hat|^2 ds
    std::optional<std::vector<cplx>> eta;  // eta_hat on an s-grid (history path only)
};

struct ModeDerivative {
    cplx dpsi, dv, dw, dI;
    double dQ;
};

// Mode data with the history at rest: eta(0, s) = psi_hat for all s > 0.
ModeBundle make_mode(double xi, cplx psi, cplx v, cplx w, const PhysicalParams& p);

// Fourier image of the linear system with the closed memory law; k is ignored.
ModeDerivative mode_rhs(const ModeBundle& m, const PhysicalParams& p);
ModeDerivative mode_rhs(const ModeBundle& m, const PhysicalParams& p, const KernelFunctions& kernel);

// Per-mode counterpart of E1 (and E2 = xi^2 * E1 for a single mode).
double mode_E1(const ModeBundle& m, const PhysicalParams& p);
// Per-mode counterpart of scriptE1
double mode_scriptE1(const ModeBundle& m, const PhysicalParams& p);

// Exact propagator over a step h for the state (psi, v, w, I) and the
// quadratic history moment Q.
class ModePropagator {
public:
    ModePropagator(double xi, const PhysicalParams& p, double h);
    void apply(ModeBundle& m) const;
    double h() const { return h_; }

private:
    double h_;
    double decay_;
    std::array<double, 16> P_{};  // 4x4 row-major
    std::array<double, 16> W_{};  // 4x4 symmetric
};

struct ModeSeries {
    std::vector<double> t;
    std::vector<ModeBundle> states;
    std::vector<double> Ehat;
};

// Exact evolution on an increasing t_grid (t_grid[0] is the start time).
ModeSeries mode_evolve(const ModeBundle& m0, const PhysicalParams& p, const std::vector<double>& t_grid);

// Independent path: RK4 on (psi, v, w) with the memory evaluated by quadrature
// over the stored psi history (cubic Hermite in time, Gauss-Legendre per panel).
// Outputs at every `out_stride` steps.
ModeSeries mode_evolve_history(const ModeBundle& m0, const PhysicalParams& p, double dt, double t_end,
                               std::size_t out_stride = 1);

double fit_mode_rate(const std::vector<double>& t, const std::vector<double>& Ehat);

struct ModeRate {
    double xi;
    double lambda_eff;
    double normalized;  // lambda_eff (1 + xi^2)/xi^2
    double horizon;
};

// Slowest decay rate of the mode matrix (2 x the spectral abscissa, for energies)
double mode_spectral_rate(double xi, const PhysicalParams& p);
ModeRate measure_mode_rate(double xi, const PhysicalParams& p, double horizon_factor = 30.0);

struct RadialSpectrum {
    int n = 3;
    std::vector<double> xi;       // increasing radii
    std::vector<double> weights;  // shell weights: sum_i weights_i f(xi_i) ~ int_{R^n} f(|xi|) dxi
    std::vector<ModeBundle> modes;
};

// log-spaced nodes, trapezoid in ln(xi) times the sphere area
RadialSpectrum radial_grid(int n, std::size_t nodes = 2048, double xi_min = 1e-3, double xi_max = 1e2);
// U_hat_0 = exp(-|xi|^2) carried by v + tau w (psi = v = 0)
RadialSpectrum gaussian_U_spectrum(int n, const PhysicalParams& p, std::size_t nodes = 2048, double xi_min = 1e-3,
                                   double xi_max = 1e2);
// throws if the data is not negligible at both ends of the radial grid
void check_spectrum_coverage(const RadialSpectrum& s, const PhysicalParams& p, double tol = 1e-5);

struct RadialNorms {
    double t = 0.0;
    double normU_j0 = 0.0, normU_j1 = 0.0, normW = 0.0, normV = 0.0, v_origin = 0.0;
};

RadialNorms radial_norms_of(const RadialSpectrum& s, const std::vector<ModeBundle>& modes, const PhysicalParams& p,
                            double t);
// evolves every node to each output time
std::vector<RadialNorms> radial_decay(const RadialSpectrum& s, const PhysicalParams& p, const std::vector<double>& t_out);
RadialNorms radial_norms(const RadialSpectrum& s, const PhysicalParams& p, double t);

struct DecayFit {
    double t_lo = 0.0, t_hi = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    std::string series_id;
};

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& norm, double t_lo, double t_hi,
                   const std::string& id = "");

struct RadialInequalityRow {
    double t;
    double integral;
    double ratio;        // integral * (1+t)^(n/2)
    double asymptotic;   // integral * t^(n/2)
};

struct RadialInequalityReport {
    int n = 0;
    std::vector<RadialInequalityRow> rows;
    double C = 0.0;              // sup ratio
    double limit = 0.0;          // Gamma(n/2)/2
    bool bounded = false;
};

// int_0^1 r^(n-1) exp(-r^2 t) dr
double radial_integral(int n, double t);
RadialInequalityReport check_radial_inequality(int n, const std::vector<double>& t_list);

}  // namespace jmgt
