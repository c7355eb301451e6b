#include <cmath>
#include <numbers>
#include <stdexcept>

#include "jmgt/linear_symbol.hpp"

namespace jmgt {

RadialSpectrum radial_grid(int n, std::size_t nodes, double xi_min, double xi_max) {
    if (n < 1 || n > 3) throw std::invalid_argument("radial dimension must be 1, 2 or 3");
    if (nodes < 2 || !(xi_min > 0.0) || !(xi_max > xi_min)) throw std::invalid_argument("bad radial grid");
    RadialSpectrum s;
    s.n = n;
    const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
    const double l0 = std::log(xi_min), l1 = std::log(xi_max);
    const double dl = (l1 - l0) / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
        double r = std::exp(l0 + dl * static_cast<double>(i));
        double tw = (i == 0 || i + 1 == nodes) ? 0.5 : 1.0;
        // dr r^(n-1) = r^n d(ln r)
        s.xi.push_back(r);
        s.weights.push_back(area * tw * dl * std::pow(r, n));
    }
    return s;
}

RadialSpectrum gaussian_U_spectrum(int n, const PhysicalParams& p, std::size_t nodes, double xi_min, double xi_max) {
    RadialSpectrum s = radial_grid(n, nodes, xi_min, xi_max);
    for (double r : s.xi) s.modes.push_back(make_mode(r, 0.0, 0.0, std::exp(-r * r) / p.tau, p));
    return s;
}

namespace {

struct Density {
    double U0, U1, W, V, v;
};

Density density(const ModeBundle& m, const PhysicalParams& p) {
    const double q = m.xi * m.xi, tau = p.tau;
    const cplx a = m.psi + tau * m.v, B = m.v + tau * m.w;
    double u0 = std::norm(B) + q * std::norm(a) + q * std::norm(m.v);
    return {u0, q * u0, std::norm(m.w), std::norm(m.v), m.v.real()};
}

}  // namespace

void check_spectrum_coverage(const RadialSpectrum& s, const PhysicalParams& p, double tol) {
    if (s.modes.size() != s.xi.size() || s.xi.empty()) throw std::invalid_argument("spectrum has no mode data");
    double total = 0.0;
    for (std::size_t i = 0; i < s.xi.size(); ++i) total += s.weights[i] * density(s.modes[i], p).U0;
    if (total == 0.0) return;
    const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * s.n) / std::tgamma(0.5 * s.n);
    // mass below xi_min, and density per unit ln(xi) at xi_max, both relative to the total
    const std::size_t last = s.xi.size() - 1;
    double lo = area * std::pow(s.xi[0], s.n) / s.n * density(s.modes[0], p).U0 / total;
    double hi = area * std::pow(s.xi[last], s.n) * density(s.modes[last], p).U0 / total;
    if (lo > tol || hi > tol)
        throw std::runtime_error("radial spectrum does not cover the energy-carrying band (edge fractions " +
                                 std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

RadialNorms radial_norms_of(const RadialSpectrum& s, const std::vector<ModeBundle>& modes, const PhysicalParams& p,
                            double t) {
    RadialNorms r;
    r.t = t;
    double u0 = 0, u1 = 0, w = 0, v = 0, vo = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        Density d = density(modes[i], p);
        const double wt = s.weights[i];
        u0 += wt * d.U0;
        u1 += wt * d.U1;
        w += wt * d.W;
        v += wt * d.V;
        vo += wt * d.v;
    }
    r.normU_j0 = std::sqrt(u0);
    r.normU_j1 = std::sqrt(u1);
    r.normW = std::sqrt(w);
    r.normV = std::sqrt(v);
    r.v_origin = vo / std::pow(2.0 * std::numbers::pi, s.n);
    return r;
}

std::vector<RadialNorms> radial_decay(const RadialSpectrum& s, const PhysicalParams& p,
                                      const std::vector<double>& t_out) {
    if (t_out.empty()) throw std::invalid_argument("no output times");
    const std::size_t T = t_out.size();
    std::vector<double> u0(T), u1(T), w(T), v(T), vo(T);
    for (std::size_t i = 0; i < s.xi.size(); ++i) {
        ModeBundle m = s.modes[i];
        std::vector<double> grid;
        grid.reserve(T + 1);
        bool shift = t_out[0] > 0.0;
        if (shift) grid.push_back(0.0);
        grid.insert(grid.end(), t_out.begin(), t_out.end());
        ModeSeries ser = mode_evolve(m, p, grid);
        const double wt = s.weights[i];
        for (std::size_t k = 0; k < T; ++k) {
            Density d = density(ser.states[k + (shift ? 1 : 0)], p);
            u0[k] += wt * d.U0;
            u1[k] += wt * d.U1;
            w[k] += wt * d.W;
            v[k] += wt * d.V;
            vo[k] += wt * d.v;
        }
    }
    std::vector<RadialNorms> out(T);
    const double f = std::pow(2.0 * std::numbers::pi, -s.n);
    for (std::size_t k = 0; k < T; ++k) {
        out[k].t = t_out[k];
        out[k].normU_j0 = std::sqrt(u0[k]);
        out[k].normU_j1 = std::sqrt(u1[k]);
        out[k].normW = std::sqrt(w[k]);
        out[k].normV = std::sqrt(v[k]);
        out[k].v_origin = f * vo[k];
    }
    return out;
}

RadialNorms radial_norms(const RadialSpectrum& s, const PhysicalParams& p, double t) {
    return radial_decay(s, p, {t}).front();
}

}  // namespace jmgt
