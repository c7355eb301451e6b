#include <cmath>
#include <numbers>

#include "jmgt/core.hpp"

namespace jmgt {

namespace {

SpectralField from_samples_or_zero(const GridPtr& g, const std::vector<double>& x) {
    if (x.empty()) return SpectralField(g);
    return forward_transform(g, x);
}

}  // namespace

StateVector state_from_fields(SpectralField psi0, SpectralField psi1, SpectralField psi2, const PhysicalParams& params,
                              const HistoryOptions& hist) {
    require_same_grid(psi0, psi1);
    require_same_grid(psi0, psi2);
    StateVector s;
    std::size_t cap = 0;
    if (hist.mode == MemoryMode::ring)
        cap = HistoryField::capacity_for(hist.s_max_factor * params.kernel.tau_k, hist.dt);
    s.history = HistoryField(psi0, hist.dt, cap);
    if (hist.mode == MemoryMode::closed) s.closed = closed_memory_init(psi0, params.kernel);
    s.psi = std::move(psi0);
    s.v = std::move(psi1);
    s.w = std::move(psi2);
    s.t = 0.0;
    return s;
}

StateVector initial_state(const GridPtr& grid, const Profile& profile, const PhysicalParams& params,
                          const HistoryOptions& hist, std::vector<std::string>* warnings) {
    SpectralField z(grid);
    if (const auto* gp = std::get_if<GaussianProfile>(&profile)) {
        std::array<double, 3> x0{};
        for (int a = 0; a < grid->dim(); ++a) x0[a] = gp->center ? (*gp->center)[a] : 0.5 * grid->length(a);
        double minL = grid->length(0);
        for (int a = 1; a < grid->dim(); ++a) minL = std::min(minL, grid->length(a));
        if (warnings && gp->width > 0.25 * minL)
            warnings->push_back("gaussian width exceeds a quarter of the box; periodic images will overlap");
        std::vector<double> x(grid->size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto p = grid->position(i);
            double r2 = 0.0;
            for (int a = 0; a < grid->dim(); ++a) {
                double L = grid->length(a);
                double d = p[a] - x0[a];
                d -= L * std::round(d / L);  // nearest periodic image
                r2 += d * d;
            }
            x[i] = gp->amplitude * std::exp(-r2 / (gp->width * gp->width));
        }
        return state_from_fields(forward_transform(grid, x), z, z, params, hist);
    }
    if (const auto* sm = std::get_if<SingleModeProfile>(&profile)) {
        SpectralField f0(grid), f1(grid), f2(grid);
        std::array<int, 3> pos{0, 0, 0}, neg{0, 0, 0};
        for (int a = 0; a < grid->dim(); ++a) {
            pos[a] = sm->mode[a];
            neg[a] = -sm->mode[a];
        }
        // e^{i xi x} has continuum coefficient V at its mode
        const double V = grid->volume();
        std::size_t ip = grid->ravel(pos), in = grid->ravel(neg);
        if (sm->real) {
            // a cos(xi x) for real amplitudes; complex amplitude -> Re(a e^{i xi x})
            auto put = [&](SpectralField& f, cplx a) {
                f.coeffs[ip] += 0.5 * V * a;
                f.coeffs[in] += 0.5 * V * std::conj(a);
            };
            put(f0, sm->a0);
            put(f1, sm->a1);
            put(f2, sm->a2);
        } else {
            f0.coeffs[ip] = V * sm->a0;
            f1.coeffs[ip] = V * sm->a1;
            f2.coeffs[ip] = V * sm->a2;
        }
        return state_from_fields(f0, f1, f2, params, hist);
    }
    const auto& cp = std::get<CustomProfile>(profile);
    return state_from_fields(from_samples_or_zero(grid, cp.psi0), from_samples_or_zero(grid, cp.psi1),
                             from_samples_or_zero(grid, cp.psi2), params, hist);
}

SpectralField state_memory_moment(const StateVector& s, const PhysicalParams& p) {
    if (s.closed) return SpectralField(s.grid(), s.closed->moment);
    return memory_moment(s.history, p.kernel, s.psi, 0.0);
}

SpectralField state_memory_integral(const StateVector& s, const PhysicalParams& p) {
    return apply_laplacian(state_memory_moment(s, p));
}

std::vector<double> state_eta_density(const StateVector& s, const PhysicalParams& p, EtaWeight weight) {
    if (s.closed) {
        double f = 1.0;
        if (weight == EtaWeight::neg_dg) f = 1.0 / p.kernel.tau_k;
        if (weight == EtaWeight::d2g) f = 1.0 / (p.kernel.tau_k * p.kernel.tau_k);
        std::vector<double> q = s.closed->energy;
        for (auto& x : q) x *= f;
        return q;
    }
    if (p.kernel.m == 0.0) return std::vector<double>(s.psi.size(), 0.0);
    return eta_energy_density(s.history, kernel_functions(p.kernel), s.psi, weight);
}

TrajectoryNode make_node(const StateVector& s, const PhysicalParams& p) {
    return TrajectoryNode{s.t, s.psi, s.v, s.w, state_memory_integral(s, p)};
}

}  // namespace jmgt
