#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "jmgt/energy.hpp"

namespace jmgt {

SpectralField random_field(const GridPtr& grid, std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> x(grid->size());
    for (auto& v : x) v = nd(rng);
    SpectralField f = forward_transform(grid, x);
    const auto& k2 = grid->k2();
    const auto& mask = grid->dealias_mask();
    for (std::size_t i = 0; i < f.size(); ++i) {
        double s = 1.0 + k2[i];
        f.coeffs[i] *= mask[i] ? 1.0 / (s * s) : 0.0;
    }
    double nrm = sobolev_seminorm(f, 0);
    if (nrm > 0.0) f *= amplitude / nrm;
    return f;
}

StateVector random_state(const GridPtr& grid, const PhysicalParams& p, std::uint64_t seed, double hist_dt,
                         std::size_t hist_nodes, bool closed) {
    std::seed_seq seq{seed, std::uint64_t{0x6a6d6774}};
    std::vector<std::uint64_t> sub(6);
    seq.generate(sub.begin(), sub.end());
    SpectralField psi = random_field(grid, sub[0]);
    SpectralField v = random_field(grid, sub[1]);
    SpectralField w = random_field(grid, sub[2]);
    std::mt19937_64 rng(sub[3]);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    const double sc[3] = {u(rng), u(rng), u(rng)};
    SpectralField f[3] = {random_field(grid, sub[4], 0.5), random_field(grid, sub[5], 0.5), random_field(grid, sub[0] ^ sub[5], 0.5)};
    auto eta = [&](double s) {
        SpectralField e(grid);
        double a[3] = {1.0 - std::exp(-s / sc[0]), s * std::exp(-s / sc[1]), (1.0 - std::exp(-s)) * std::cos(s / sc[2])};
        for (int q = 0; q < 3; ++q)
            for (std::size_t i = 0; i < e.size(); ++i) e.coeffs[i] += a[q] * f[q].coeffs[i];
        return e;
    };
    const std::size_t K = hist_nodes;
    // psi(t - s) = psi(t) - eta(s), t = K dt
    HistoryField h(psi - eta(static_cast<double>(K) * hist_dt), hist_dt, K + 1);
    for (std::size_t j = K; j-- > 0;) h.push_snapshot(psi - eta(static_cast<double>(j) * hist_dt));
    StateVector s;
    s.psi = psi;
    s.v = v;
    s.w = w;
    s.history = std::move(h);
    s.t = static_cast<double>(K) * hist_dt;
    s.step_count = K;
    if (closed && p.kernel.m != 0.0) {
        ClosedMemory cm;
        cm.moment = memory_moment(s.history, p.kernel, s.psi).coeffs;
        cm.energy = eta_energy_density(s.history, kernel_functions(p.kernel), s.psi, EtaWeight::g);
        s.closed = std::move(cm);
    }
    return s;
}

EmpiricalConstants calibrate_constants(const PhysicalParams& p, const std::vector<StateVector>& states) {
    EmpiricalConstants k;
    const double zeta = p.kernel.zeta_value();
    for (const auto& s : states) {
        const auto& g = *s.grid();
        const auto& k2 = g.k2_op();
        SpectralField I = state_memory_moment(s, p);
        std::vector<double> Qg = state_eta_density(s, p, EtaWeight::g);
        std::vector<double> Qn = state_eta_density(s, p, EtaWeight::neg_dg);
        double num = 0, den = 0, eg = 0, en = 0;
        for (std::size_t i = 0; i < s.psi.size(); ++i) {
            double q = k2[i], q2 = q * q;
            cplx force = -q * (p.c_g2() * s.psi.coeffs[i] + p.b * s.v.coeffs[i] + I.coeffs[i]);
            num += std::norm(force);
            den += q2 * (std::norm(s.psi.coeffs[i] + p.tau * s.v.coeffs[i]) + std::norm(s.v.coeffs[i]) + Qg[i]);
            eg += (q + q2) * Qg[i];
            en += (q + q2) * Qn[i];
        }
        if (den > 0.0) k.C = std::max(k.C, num / (p.tau * p.tau * den));
        if (en > 0.0) k.eta_ratio = std::max(k.eta_ratio, zeta * eg / en);
        auto rep = energy_report(s, p, ReportOptions{false, false, nullptr, true});
        double e = rep.E1 + rep.E2;
        if (e > 0.0) {
            k.f1_ratio = std::max(k.f1_ratio, std::abs(rep.F1) / e);
            k.f2_ratio = std::max(k.f2_ratio, std::abs(rep.F2) / e);
        }
        ++k.samples;
    }
    return k;
}

double young_C_eps0(const PhysicalParams& p, double eps0) {
    double a = p.b - p.tau * p.c_g2();
    return a * a / (4.0 * eps0);
}

double young_C_eps1(double eps1) { return 1.0 / (4.0 * eps1); }

double young_C_eps23(const PhysicalParams& p, double eps2, double eps3) {
    const double cg2 = p.c_g2(), tau = p.tau, m = p.c * p.c - cg2;
    return std::pow(tau * cg2, 2) / (4.0 * eps2) + tau * (p.b - tau * cg2) + 1.0 / (4.0 * eps3) + 0.5 * tau * tau * m;
}

namespace {

double lambda0(double eps1, double L2) { return young_C_eps1(eps1) + 0.5 * L2; }

}  // namespace

LyapunovParams select_lyapunov_params(const PhysicalParams& p, const EmpiricalConstants& k) {
    LyapunovParams lp;
    const double gap = p.b - p.tau * p.c * p.c;
    const double cg2 = p.c_g2(), m = p.c * p.c - cg2;
    const double zeta = p.kernel.zeta_value();
    if (!(gap > 0.0)) {
        lp.reason = "b <= tau c^2: no eps satisfies eps < (b - tau c^2)/(2C)";
        return lp;
    }
    if (!(cg2 > 0.0)) {
        lp.reason = "c_g^2 <= 0";
        return lp;
    }
    const double C = std::max(k.C, 1e-300);
    lp.eps3 = 0.5;
    lp.eps0 = lp.eps1 = 0.5 * cg2 / (1.0 + m);
    lp.eps = 0.5 * gap / (2.0 * C);
    lp.L2 = 2.0 / (1.0 - lp.eps3);
    lp.eps2 = 0.5 * (cg2 - lp.eps0 * (1.0 + m)) / lp.L2;
    const double Cstar = k.f1_ratio + lp.L2 * k.f2_ratio;
    const double lam = lambda0(lp.eps1, lp.L2) * std::max(1.0, k.eta_ratio);
    const double need_a = (young_C_eps0(p, lp.eps0) + lp.L2 * young_C_eps23(p, lp.eps2, lp.eps3)) / gap;
    const double need_b = 2.0 * lam / zeta;
    lp.L1 = 1.5 * std::max({need_a, need_b, 2.0 * Cstar});
    // shrink eps so the dissipation coefficients stay positive after L1 is fixed
    double room_a = (lp.L1 * gap - young_C_eps0(p, lp.eps0) - lp.L2 * young_C_eps23(p, lp.eps2, lp.eps3)) /
                    (2.0 * C * lp.L1);
    double room_b = (0.5 * lp.L1 - lam / zeta) / (2.0 * C * lp.L1);
    lp.eps = std::min({lp.eps, 0.5 * room_a, 0.5 * room_b});
    lp.feasible = lp.eps > 0.0;
    if (!lp.feasible) lp.reason = "eps shrank to zero";
    return lp;
}

std::vector<AssumptionEntry> check_lyapunov_chain(const LyapunovParams& lp, const PhysicalParams& p,
                                                  const EmpiricalConstants& k) {
    std::vector<AssumptionEntry> out;
    const double gap = p.b - p.tau * p.c * p.c;
    const double cg2 = p.c_g2(), m = p.c * p.c - cg2;
    const double zeta = p.kernel.zeta_value();
    auto add = [&](const std::string& n, bool ok, double lhs, double rhs) {
        std::ostringstream os;
        os.precision(6);
        os << lhs << " vs " << rhs;
        out.push_back({n, ok, os.str()});
    };
    add("eps3 < 1", lp.eps3 < 1.0, lp.eps3, 1.0);
    add("eps0 = eps1", lp.eps0 == lp.eps1, lp.eps0, lp.eps1);
    add("eps0 < c_g^2/(1+c^2-c_g^2)", lp.eps0 > 0.0 && lp.eps0 < cg2 / (1.0 + m), lp.eps0, cg2 / (1.0 + m));
    add("L2 > 1/(1-eps3)", lp.L2 > 1.0 / (1.0 - lp.eps3), lp.L2, 1.0 / (1.0 - lp.eps3));
    double e2b = (cg2 - lp.eps0 * (1.0 + m)) / lp.L2;
    add("eps2 < (c_g^2 - eps0(1+c^2-c_g^2))/L2", lp.eps2 > 0.0 && lp.eps2 < e2b, lp.eps2, e2b);
    double eb = gap / (2.0 * std::max(k.C, 1e-300));
    add("eps < (b - tau c^2)/(2C)", lp.eps > 0.0 && lp.eps < eb, lp.eps, eb);
    double na = gap > 0.0 ? (young_C_eps0(p, lp.eps0) + lp.L2 * young_C_eps23(p, lp.eps2, lp.eps3)) / gap
                          : std::numeric_limits<double>::infinity();
    add("L1 >= (C(eps0) + L2 C(eps2,eps3))/(b - tau c^2)", lp.L1 >= na, lp.L1, na);
    double lam = lambda0(lp.eps1, lp.L2) * std::max(1.0, k.eta_ratio);
    add("L1 >= 2 Lambda0/zeta", lp.L1 >= 2.0 * lam / zeta, lp.L1, 2.0 * lam / zeta);
    double cs = k.f1_ratio + lp.L2 * k.f2_ratio;
    add("L1 > C*", lp.L1 > cs, lp.L1, cs);
    return out;
}

}  // namespace jmgt
