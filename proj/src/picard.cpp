#include <algorithm>
#include <cmath>
#include <limits>

#include "jmgt/core.hpp"
#include "jmgt/energy.hpp"

namespace jmgt {

double residual_third_order(const Trajectory& traj, double t, const PhysicalParams& p) {
    if (traj.size() < 5) throw std::invalid_argument("residual needs at least 5 stored steps");
    std::size_t i = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < traj.size(); ++j) {
        double d = std::abs(traj[j].t - t);
        if (d < best) {
            best = d;
            i = j;
        }
    }
    if (i < 2 || i + 2 >= traj.size()) throw std::invalid_argument("residual stencil leaves the stored range");
    const double h = traj[i + 1].t - traj[i].t;
    for (std::size_t j = i - 2; j < i + 2; ++j)
        if (std::abs((traj[j + 1].t - traj[j].t) - h) > 1e-9 * h)
            throw std::invalid_argument("residual stencil needs equally spaced samples");
    const auto& n = traj[i];
    const auto& k2 = n.psi.grid->k2_op();
    SpectralField prod;
    if (p.k != 0.0) prod = pointwise_product(n.v, n.w);
    SpectralField d(n.psi.grid);
    const double cg2 = p.c_g2();
    for (std::size_t m = 0; m < d.size(); ++m) {
        cplx wt = (-traj[i + 2].w.coeffs[m] + 8.0 * traj[i + 1].w.coeffs[m] - 8.0 * traj[i - 1].w.coeffs[m] +
                   traj[i - 2].w.coeffs[m]) /
                  (12.0 * h);
        cplx r = p.tau * wt + p.alpha * n.w.coeffs[m] + k2[m] * (cg2 * n.psi.coeffs[m] + p.b * n.v.coeffs[m]) -
                 n.mem.coeffs[m];
        if (p.k != 0.0) r -= 2.0 * p.k * prod.coeffs[m];
        d.coeffs[m] = r;
    }
    return sobolev_seminorm(d, 0);
}

namespace {

std::size_t step_count_for(double T, double dt) {
    if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("Picard horizon must be at least one step");
    return static_cast<std::size_t>(std::llround(T / dt));
}

}  // namespace

PicardIterate zero_source_iterate(const StateVector& init, double T, double dt) {
    const std::size_t N = step_count_for(T, dt);
    PicardIterate z;
    SpectralField zero(init.grid());
    z.stage_v.assign(N, {zero, zero, zero, zero});
    z.stage_w = z.stage_v;
    for (std::size_t n = 0; n <= N; ++n)
        z.nodes.push_back(TrajectoryNode{init.t + static_cast<double>(n) * dt, init.psi, init.v, init.w, zero});
    return z;
}

PicardIterate picard_map(const PicardIterate& phi, const StateVector& init, const PhysicalParams& p, double T,
                         double dt) {
    const std::size_t N = step_count_for(T, dt);
    if (phi.stage_v.size() != N || phi.stage_w.size() != N)
        throw std::invalid_argument("source trajectory does not match the step grid");
    // frozen forcing 2k v^phi w^phi at every RK stage (enters tau w_t)
    std::vector<std::array<SpectralField, 4>> force(N);
    for (std::size_t n = 0; n < N; ++n)
        for (int s = 0; s < 4; ++s) {
            require_same_grid(phi.stage_v[n][s], init.psi);
            force[n][s] = p.k == 0.0 ? SpectralField(init.grid())
                                     : 2.0 * p.k * pointwise_product(phi.stage_v[n][s], phi.stage_w[n][s]);
        }
    PicardIterate out;
    out.stage_v.resize(N);
    out.stage_w.resize(N);
    const std::size_t base = init.step_count;
    Stepper st(p, dt, Scheme::rk4);
    st.include_nonlinearity = false;
    st.source = [&](std::size_t step, int stage) -> const SpectralField* { return &force[step - base][stage]; };
    st.observer = [&](std::size_t step, int stage, const SpectralField& v, const SpectralField& w) {
        out.stage_v[step - base][stage] = v;
        out.stage_w[step - base][stage] = w;
    };
    StateVector s = init;
    out.nodes.push_back(make_node(s, p));
    for (std::size_t n = 0; n < N; ++n) {
        st.step(s);
        out.nodes.push_back(make_node(s, p));
    }
    return out;
}

double picard_distance(const PicardIterate& a, const PicardIterate& b, const PhysicalParams& p) {
    if (a.nodes.size() != b.nodes.size() || a.nodes.size() < 2)
        throw std::invalid_argument("iterates have different step grids");
    const double dt = a.nodes[1].t - a.nodes[0].t;
    // history of the difference: the initial data agree, so psi_diff(0) = 0
    SpectralField zero(a.nodes[0].psi.grid);
    PhysicalParams q = p;
    StateVector d;
    d.history = HistoryField(zero, dt, a.nodes.size() + 1);
    double sup = 0.0;
    for (std::size_t n = 0; n < a.nodes.size(); ++n) {
        d.psi = a.nodes[n].psi - b.nodes[n].psi;
        d.v = a.nodes[n].v - b.nodes[n].v;
        d.w = a.nodes[n].w - b.nodes[n].w;
        if (n > 0) d.history.push_snapshot(d.psi);
        d.t = a.nodes[n].t;
        sup = std::max(sup, energy_norm(d, q));
    }
    return sup;
}

PicardResult picard_solve(const StateVector& init, const PhysicalParams& p, double T, double dt, std::size_t max_iter,
                          double tol) {
    PicardResult r;
    PicardIterate phi = zero_source_iterate(init, T, dt);
    for (std::size_t k = 0; k < max_iter; ++k) {
        PicardIterate psi = picard_map(phi, init, p, T, dt);
        double d = picard_distance(psi, phi, p);
        r.distances.push_back(d);
        if (r.distances.size() >= 2 && r.distances[r.distances.size() - 2] > 0.0)
            r.ratios.push_back(d / r.distances[r.distances.size() - 2]);
        phi = std::move(psi);
        r.iterations = k + 1;
        if (d <= tol) {
            r.converged = true;
            break;
        }
    }
    r.fixed_point = std::move(phi);
    return r;
}

}  // namespace jmgt
