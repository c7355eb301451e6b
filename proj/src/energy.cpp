#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jmgt/energy.hpp"

namespace jmgt {

const char* phi_name(PhiTag t) {
    switch (t) {
        case PhiTag::v_plus_tau_w: return "v+tau*w";
        case PhiTag::w: return "w";
        case PhiTag::psi_plus_tau_v: return "psi+tau*v";
        case PhiTag::tau_v: return "tau*v";
    }
    return "?";
}

PhiTag parse_phi(const std::string& s) {
    for (PhiTag t : kAllPhi)
        if (s == phi_name(t)) return t;
    throw std::invalid_argument("unknown test-function tag '" + s + "'");
}

namespace {

// Per-mode sums shared by every functional, already divided by the volume.
struct Sums {
    double grad_a = 0, lap_a = 0;    // a = psi + tau v
    double B0 = 0, grad_B = 0;       // B = v + tau w
    double grad_v = 0, lap_v = 0, v0 = 0, w0 = 0;
    double cross1 = 0, cross2 = 0;   // <grad I, grad v>, <Lap I, Lap v>
    double F1 = 0, F2raw = 0;        // <grad a, grad B>, <grad v, grad B>
    double eta[3][3] = {};           // [weight][order]
};

inline double re_dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

Sums compute_sums(const StateVector& s, const PhysicalParams& p, bool with_eta = true) {
    Sums r;
    const auto& g = *s.grid();
    const auto& k2 = g.k2_op();
    const std::size_t n = s.psi.size();
    const double tau = p.tau;
    const bool mem = p.kernel.m != 0.0;
    SpectralField I;
    std::vector<double> Qg;
    if (mem && with_eta) {
        I = state_memory_moment(s, p);
        Qg = state_eta_density(s, p, EtaWeight::g);
    }
    double eta_g[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double q = k2[i], q2 = q * q;
        const cplx ps = s.psi.coeffs[i], v = s.v.coeffs[i], w = s.w.coeffs[i];
        const cplx a = ps + tau * v, B = v + tau * w;
        const double na = std::norm(a), nB = std::norm(B), nv = std::norm(v);
        r.grad_a += q * na;
        r.lap_a += q2 * na;
        r.B0 += nB;
        r.grad_B += q * nB;
        r.grad_v += q * nv;
        r.lap_v += q2 * nv;
        r.v0 += nv;
        r.w0 += std::norm(w);
        r.F1 += q * re_dot(a, B);
        r.F2raw += q * re_dot(v, B);
        if (mem && with_eta) {
            r.cross1 += q * re_dot(I.coeffs[i], v);
            r.cross2 += q2 * re_dot(I.coeffs[i], v);
            eta_g[0] += Qg[i];
            eta_g[1] += q * Qg[i];
            eta_g[2] += q2 * Qg[i];
        }
    }
    const double iv = 1.0 / g.volume();
    for (double* x : {&r.grad_a, &r.lap_a, &r.B0, &r.grad_B, &r.grad_v, &r.lap_v, &r.v0, &r.w0, &r.cross1, &r.cross2,
                      &r.F1, &r.F2raw})
        *x *= iv;
    if (mem && with_eta) {
        if (s.closed || kernel_functions(p.kernel).exponential) {
            // exponential kernel: -g' = g/tau_k and g'' = g/tau_k^2 exactly
            const double tk = p.kernel.tau_k;
            for (int j = 0; j < 3; ++j) {
                r.eta[0][j] = eta_g[j] * iv;
                r.eta[1][j] = eta_g[j] * iv / tk;
                r.eta[2][j] = eta_g[j] * iv / (tk * tk);
            }
        }
    }
    return r;
}

double e1_from(const Sums& r, const PhysicalParams& p) {
    const double cg2 = p.c_g2(), tau = p.tau;
    return 0.5 * (cg2 * r.grad_a + tau * (p.b - tau * cg2) * r.grad_v + r.B0 + tau * r.eta[1][1] + r.eta[0][1] +
                  2.0 * tau * r.cross1);
}

double e2_from(const Sums& r, const PhysicalParams& p) {
    const double cg2 = p.c_g2(), tau = p.tau;
    return 0.5 * (cg2 * r.lap_a + tau * (p.b - tau * cg2) * r.lap_v + r.grad_B + tau * r.eta[1][2] + r.eta[0][2] +
                  2.0 * tau * r.cross2);
}

double se1_from(const Sums& r) { return r.grad_a + r.B0 + r.grad_v + r.eta[1][1]; }
double se2_from(const Sums& r) { return r.lap_a + r.grad_B + r.lap_v + r.eta[1][2]; }

SpectralField phi_field(const StateVector& s, const PhysicalParams& p, PhiTag tag) {
    switch (tag) {
        case PhiTag::v_plus_tau_w: return axpy(s.v, p.tau, s.w);
        case PhiTag::w: return s.w;
        case PhiTag::psi_plus_tau_v: return axpy(s.psi, p.tau, s.v);
        case PhiTag::tau_v: return p.tau * s.v;
    }
    throw std::invalid_argument("unknown test-function tag");
}

double r_term(const SpectralField& prod, const SpectralField& phi, double k, int order) {
    return 2.0 * k * sobolev_inner(prod, phi, order);
}

}  // namespace

double script_E1(const StateVector& s, const PhysicalParams& p) { return se1_from(compute_sums(s, p)); }
double script_E2(const StateVector& s, const PhysicalParams& p) { return se2_from(compute_sums(s, p)); }
double E1(const StateVector& s, const PhysicalParams& p) { return e1_from(compute_sums(s, p), p); }
double E2(const StateVector& s, const PhysicalParams& p) { return e2_from(compute_sums(s, p), p); }
double F1(const StateVector& s, const PhysicalParams& p) { return compute_sums(s, p, false).F1; }
double F2(const StateVector& s, const PhysicalParams& p) { return -p.tau * compute_sums(s, p, false).F2raw; }

double R1(const StateVector& s, const PhysicalParams& p, PhiTag tag) {
    if (p.k == 0.0) return 0.0;
    return r_term(pointwise_product(s.v, s.w), phi_field(s, p, tag), p.k, 0);
}

double R2(const StateVector& s, const PhysicalParams& p, PhiTag tag) {
    if (p.k == 0.0) return 0.0;
    return r_term(pointwise_product(s.v, s.w), phi_field(s, p, tag), p.k, 1);
}

double lyapunov(const StateVector& s, const PhysicalParams& p, const LyapunovParams& lp) {
    auto r = compute_sums(s, p);
    return lp.L1 * (e1_from(r, p) + e2_from(r, p) + lp.eps * p.tau * r.w0) + r.F1 + lp.L2 * (-p.tau * r.F2raw);
}

double energy_norm(const StateVector& s, const PhysicalParams& p) {
    auto r = compute_sums(s, p);
    return std::sqrt(std::max(0.0, se1_from(r) + se2_from(r) + r.w0));
}

EnergyReport energy_report(const StateVector& s, const PhysicalParams& p, const ReportOptions& opt) {
    auto r = compute_sums(s, p);
    EnergyReport e;
    e.t = s.t;
    e.E1 = e1_from(r, p);
    e.E2 = e2_from(r, p);
    e.scriptE1 = se1_from(r);
    e.scriptE2 = se2_from(r);
    e.F1 = r.F1;
    e.F2 = -p.tau * r.F2raw;
    e.w_l2_sq = r.w0;
    if (opt.lp) e.lyapunov = opt.lp->L1 * (e.E1 + e.E2 + opt.lp->eps * p.tau * r.w0) + e.F1 + opt.lp->L2 * e.F2;
    const EtaWeight ws[3] = {EtaWeight::g, EtaWeight::neg_dg, EtaWeight::d2g};
    for (int a = 0; a < 3; ++a)
        for (int j = 1; j <= 2; ++j) e.eta_norms[{ws[a], j}] = r.eta[a][j];
    if (opt.r_terms) {
        if (p.k != 0.0) {
            SpectralField prod = pointwise_product(s.v, s.w, opt.dealias);
            for (PhiTag t : kAllPhi) {
                SpectralField phi = phi_field(s, p, t);
                e.r1_terms[t] = r_term(prod, phi, p.k, 0);
                e.r2_terms[t] = r_term(prod, phi, p.k, 1);
            }
        } else {
            for (PhiTag t : kAllPhi) e.r1_terms[t] = e.r2_terms[t] = 0.0;
        }
    }
    e.grad_v_sq = r.grad_v;
    e.lap_v_sq = r.lap_v;
    e.normU = std::sqrt(r.B0 + r.grad_a + r.grad_v);
    e.normGradU = std::sqrt(r.grad_B + r.lap_a + r.lap_v);
    e.normV = std::sqrt(r.v0);
    e.normW = std::sqrt(r.w0);
    if (opt.v_inf) e.v_inf = lp_norm(s.v, std::numeric_limits<double>::infinity());
    e.dissipation_integrand = r.grad_v + r.eta[1][1] + e.scriptE2 + r.w0;
    return e;
}

void accumulate(std::vector<EnergyReport>& series, EnergyReport r) {
    double inst = std::sqrt(std::max(0.0, r.scriptE1 + r.scriptE2 + r.w_l2_sq));
    if (series.empty()) {
        r.seminorm_E = inst;
        r.dissipation_D_cum = 0.0;
    } else {
        const auto& last = series.back();
        r.seminorm_E = std::max(last.seminorm_E, inst);
        r.dissipation_D_cum =
            last.dissipation_D_cum + 0.5 * (r.t - last.t) * (r.dissipation_integrand + last.dissipation_integrand);
    }
    series.push_back(std::move(r));
}

namespace {

std::size_t last_at_or_before(const std::vector<EnergyReport>& s, double t) {
    if (s.empty()) throw std::invalid_argument("empty report series");
    std::size_t i = 0;
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    while (i + 1 < s.size() && s[i + 1].t <= t + tol) ++i;
    return i;
}

}  // namespace

double seminorm_E(const std::vector<EnergyReport>& series, double t) {
    double m = 0.0;
    for (const auto& r : series) {
        if (r.t > t + 1e-12 * std::max(1.0, std::abs(t))) break;
        m = std::max(m, std::sqrt(std::max(0.0, r.scriptE1 + r.scriptE2 + r.w_l2_sq)));
    }
    return m;
}

double dissipation_D(const std::vector<EnergyReport>& series, double t) {
    double acc = 0.0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].t > t + 1e-12 * std::max(1.0, std::abs(t))) break;
        acc += 0.5 * (series[i].t - series[i - 1].t) *
               (series[i].dissipation_integrand + series[i - 1].dissipation_integrand);
    }
    return std::sqrt(std::max(0.0, acc));
}

IdentityResidual energy_identity_residual(const std::vector<EnergyReport>& series, double t, int order,
                                          const PhysicalParams& p, double dissipation_sign) {
    if (order != 1 && order != 2) throw std::invalid_argument("identity order must be 1 or 2");
    if (series.size() < 3) throw std::invalid_argument("need at least 3 samples for a centered difference");
    std::size_t i = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < series.size(); ++j) {
        double d = std::abs(series[j].t - t);
        if (d < best) {
            best = d;
            i = j;
        }
    }
    if (i == 0 || i + 1 >= series.size()) throw std::invalid_argument("stencil around t leaves the sampled range");
    const auto &a = series[i - 1], &c = series[i], &b = series[i + 1];
    IdentityResidual r;
    if (order == 1) {
        r.dEdt = (b.E1 - a.E1) / (b.t - a.t);
        double diss = (p.b - p.tau * p.c * p.c) * c.grad_v_sq + 0.5 * c.eta(EtaWeight::neg_dg, 1) +
                      0.5 * p.tau * c.eta(EtaWeight::d2g, 1);
        double R = c.r1_terms.count(PhiTag::v_plus_tau_w) ? c.r1_terms.at(PhiTag::v_plus_tau_w) : 0.0;
        r.rhs = -dissipation_sign * diss + R;
    } else {
        r.dEdt = (b.E2 - a.E2) / (b.t - a.t);
        double diss = (p.b - p.tau * p.c * p.c) * c.lap_v_sq + 0.5 * c.eta(EtaWeight::neg_dg, 2) +
                      0.5 * p.tau * c.eta(EtaWeight::d2g, 2);
        double R = c.r2_terms.count(PhiTag::v_plus_tau_w) ? c.r2_terms.at(PhiTag::v_plus_tau_w) : 0.0;
        r.rhs = -dissipation_sign * diss + R;
    }
    r.residual = std::abs(r.dEdt - r.rhs);
    return r;
}

std::vector<double> monitor_M_series(const std::vector<EnergyReport>& series, int n) {
    std::vector<double> out;
    out.reserve(series.size());
    double m = 0.0;
    const double e0 = n / 4.0, e1 = n / 4.0 + 0.5;
    for (const auto& r : series) {
        double s = 1.0 + r.t;
        double val = std::pow(s, e0) * r.normU + std::pow(s, e1) * r.normGradU + std::pow(s, e0) * r.normV +
                     std::pow(s, e1) * r.normW;
        m = std::max(m, val);
        out.push_back(m);
    }
    return out;
}

double monitor_M(const std::vector<EnergyReport>& series, double t, int n) {
    if (series.empty()) return 0.0;
    auto ms = monitor_M_series(series, n);
    return ms[last_at_or_before(series, t)];
}

double monitor_M0(const std::vector<EnergyReport>& series, double t, int n) {
    double m = 0.0;
    for (const auto& r : series) {
        if (r.t > t + 1e-12 * std::max(1.0, std::abs(t))) break;
        m = std::max(m, std::pow(1.0 + r.t, 3.0 * n / 8.0) * r.v_inf);
    }
    return m;
}

BootstrapVerdict bootstrap_check(const std::vector<double>& M, double C1, double C2, double kappa) {
    if (!(kappa > 1.0)) throw std::invalid_argument("bootstrap exponent must exceed 1");
    BootstrapVerdict v;
    v.threshold = (1.0 - 1.0 / kappa) * std::pow(kappa, -1.0 / (kappa - 1.0));
    v.product = C1 * std::pow(C2, 1.0 / (kappa - 1.0));
    v.bound = C1 / (1.0 - 1.0 / kappa);
    v.smallness = v.product < v.threshold;
    v.hypothesis = true;
    v.conclusion = true;
    for (double m : M) {
        if (!std::isfinite(m)) {
            v.hypothesis = v.conclusion = false;
            break;
        }
        double rhs = C1 + C2 * std::pow(m, kappa);
        if (m > rhs * (1.0 + 1e-12)) v.hypothesis = false;
        if (!(m < v.bound)) v.conclusion = false;
    }
    v.initial = !M.empty() && M.front() <= C1 * (1.0 + 1e-12);
    return v;
}

std::vector<std::string> check_energy_invariants(const EnergyReport& r, const PhysicalParams& p) {
    std::vector<std::string> bad;
    auto fin = [&](const char* name, double x) {
        if (!std::isfinite(x)) bad.push_back(std::string(name) + " is not finite");
    };
    fin("E1", r.E1);
    fin("E2", r.E2);
    fin("scriptE1", r.scriptE1);
    fin("scriptE2", r.scriptE2);
    fin("F1", r.F1);
    fin("F2", r.F2);
    fin("w_l2_sq", r.w_l2_sq);
    if (validate_params(p).cls == ParamClass::subcritical) {
        const double tol = 1e-12 * std::max(1.0, r.scriptE1 + r.scriptE2);
        if (r.E1 < -tol) bad.push_back("E1 negative under admissible parameters");
        if (r.E2 < -tol) bad.push_back("E2 negative under admissible parameters");
    }
    return bad;
}

}  // namespace jmgt
