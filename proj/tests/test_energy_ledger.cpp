#include <cmath>
#include <numbers>

#include "doctest.h"
#include "jmgt/energy.hpp"
#include "jmgt/linear_symbol.hpp"

using namespace jmgt;

namespace {

constexpr double pi = std::numbers::pi;

PhysicalParams ref_params(double k = 0.0) { return make_params(0.5, 1.0, 0.1, k, 0.1, 0.5); }

HistoryOptions closed_hist() {
    HistoryOptions h;
    h.mode = MemoryMode::closed;
    return h;
}

std::vector<EnergyReport> trajectory(StateVector s, const PhysicalParams& p, double dt, double T) {
    std::vector<EnergyReport> series;
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = T;
    ReportOptions opt;
    opt.v_inf = false;
    auto r = solve(std::move(s), p, cfg, [&](const StateVector& x) { accumulate(series, energy_report(x, p, opt)); });
    REQUIRE_FALSE(r.blew_up);
    return series;
}

StateVector gaussian(const GridPtr& g, const PhysicalParams& p, double amp, double width) {
    GaussianProfile gp;
    gp.amplitude = amp;
    gp.width = width;
    return initial_state(g, gp, p, closed_hist());
}

// integral of a*b*c over the box from samples
double triple_integral(const SpectralField& a, const SpectralField& b, const SpectralField& c) {
    auto x = inverse_transform(a), y = inverse_transform(b), z = inverse_transform(c);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i] * z[i];
    return s * a.grid->cell_volume();
}

}  // namespace

TEST_CASE("E1 without memory matches its closed form on a cosine") {
    PhysicalParams p = make_params(0.4, 1.3, 0.2, 0.0, 0.0, 0.5, 1.0, true);
    auto g = make_grid(2, 8, 5.0);
    SingleModeProfile sm;
    sm.mode = {1, 2, 0};
    sm.a0 = 0.7;
    sm.a1 = -0.3;
    sm.a2 = 1.1;
    sm.real = true;
    StateVector s = initial_state(g, sm, p, closed_hist());
    const double xi2 = std::pow(2 * pi / 5.0, 2) * 5.0;
    const double hv = 0.5 * g->volume();
    const double a = 0.7 + 0.4 * -0.3, B = -0.3 + 0.4 * 1.1;
    const double exact =
        0.5 * (1.69 * xi2 * a * a * hv + 0.4 * 0.2 * xi2 * 0.09 * hv + B * B * hv);
    CHECK(std::abs(E1(s, p) - exact) / exact < 1e-12);
    CHECK(std::abs(E2(s, p) - xi2 * exact) / (xi2 * exact) < 1e-12);
}

TEST_CASE("box energies agree with the per-mode quadratic form") {
    PhysicalParams p = ref_params();
    auto g = make_grid(1, 8, 2 * pi);
    SingleModeProfile sm;
    sm.mode = {2, 0, 0};
    sm.a0 = cplx(0.4, 0.3);
    sm.a1 = cplx(-0.2, 0.5);
    sm.a2 = cplx(0.1, 0.0);
    StateVector s = initial_state(g, sm, p, closed_hist());
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.7;
    s = solve(s, p, cfg).final_state;  // history no longer at rest
    const double V = g->volume();
    const std::size_t m = g->ravel({2, 0, 0});
    ModeBundle mb;
    mb.xi = 2.0;
    mb.psi = s.psi[m] / V;
    mb.v = s.v[m] / V;
    mb.w = s.w[m] / V;
    mb.I = s.closed->moment[m] / V;
    mb.Q = s.closed->energy[m] / (V * V);
    CHECK(E1(s, p) == doctest::Approx(V * mode_E1(mb, p)).epsilon(1e-12));
    CHECK(script_E1(s, p) == doctest::Approx(V * mode_scriptE1(mb, p)).epsilon(1e-12));
}

TEST_CASE("first and second order energy equalities on a linear run") {
    PhysicalParams p = ref_params();
    auto g = make_grid(2, 32, 12.0);
    std::vector<double> r1, r2;
    for (double dt : {4e-3, 2e-3}) {
        auto series = trajectory(gaussian(g, p, 1.0, 1.5), p, dt, 0.4);
        double m1 = 0, m2 = 0, s1 = 0, s2 = 0;
        for (std::size_t i = 1; i + 1 < series.size(); ++i) {
            auto a = energy_identity_residual(series, series[i].t, 1, p);
            auto b = energy_identity_residual(series, series[i].t, 2, p);
            m1 = std::max(m1, a.residual);
            m2 = std::max(m2, b.residual);
            s1 = std::max(s1, std::abs(a.rhs));
            s2 = std::max(s2, std::abs(b.rhs));
        }
        r1.push_back(m1 / s1);
        r2.push_back(m2 / s2);
    }
    CHECK(r1[1] < 1e-5);
    CHECK(r2[1] < 1e-5);
    CHECK(std::log2(r1[0] / r1[1]) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(r2[0] / r2[1]) == doctest::Approx(2.0).epsilon(0.1));

    // flipped dissipation must be detected
    auto series = trajectory(gaussian(g, p, 1.0, 1.5), p, 2e-3, 0.2);
    auto bad = energy_identity_residual(series, 0.1, 1, p, -1.0);
    CHECK(bad.residual > 0.5 * std::abs(bad.rhs));
}

TEST_CASE("nonlinear equalities include the R terms") {
    PhysicalParams p = ref_params(1.0);
    auto g = make_grid(2, 32, 12.0);
    auto series = trajectory(gaussian(g, p, 0.2, 1.5), p, 2e-3, 0.4);
    double m = 0, s = 0, mr = 0;
    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
        auto a = energy_identity_residual(series, series[i].t, 1, p);
        m = std::max(m, a.residual);
        s = std::max(s, std::abs(a.rhs));
        mr = std::max(mr, std::abs(series[i].r1_terms.at(PhiTag::v_plus_tau_w)));
    }
    CHECK(m / s < 1e-3);
    CHECK(mr > 1e3 * m);  // the R term is resolved, not noise
}

TEST_CASE("R terms against a sample-space triple integral") {
    PhysicalParams p = ref_params(0.8);
    auto g = make_grid(2, 24, 7.0);
    StateVector s = random_state(g, p, 11, 0.05, 10, true);
    const double expect = 2 * 0.8 * triple_integral(s.v, s.w, axpy(s.v, p.tau, s.w));
    CHECK(R1(s, p, PhiTag::v_plus_tau_w) == doctest::Approx(expect).epsilon(1e-10));
    const double expect_w = 2 * 0.8 * triple_integral(s.v, s.w, s.w);
    CHECK(R1(s, p, PhiTag::w) == doctest::Approx(expect_w).epsilon(1e-10));
    // R2(phi) = 2k <grad(vw), grad phi> = 2k <vw, -Lap phi>
    SpectralField mlap = apply_k2_power(s.w, 1);
    CHECK(R2(s, p, PhiTag::w) == doctest::Approx(2 * 0.8 * triple_integral(s.v, s.w, mlap)).epsilon(1e-10));
}

TEST_CASE("energy is conserved without memory or damping gap") {
    PhysicalParams p = make_params(0.5, 1.0, 0.0, 0.0, 0.0, 0.5, 1.0, true);
    auto g = make_grid(2, 16, 10.0);
    auto series = trajectory(gaussian(g, p, 1.0, 1.5), p, 1e-3, 2.0);
    double drift = 0.0;
    for (const auto& r : series) drift = std::max(drift, std::abs(r.E1 - series.front().E1));
    CHECK(drift / series.front().E1 < 1e-8);
}

TEST_CASE("equivalence ratios and Lyapunov chain over random states") {
    PhysicalParams p = ref_params();
    auto g = make_grid(2, 16, 8.0);
    std::vector<StateVector> states;
    for (std::uint64_t i = 0; i < 30; ++i) states.push_back(random_state(g, p, 100 + i));
    auto k = calibrate_constants(p, states);
    CHECK(k.samples == 30);
    auto lp = select_lyapunov_params(p, k);
    REQUIRE(lp.feasible);
    for (const auto& e : check_lyapunov_chain(lp, p, k)) CHECK_MESSAGE(e.passed, e.name << ": " << e.detail);
    double lo = 1e300, hi = 0;
    for (const auto& s : states) {
        ReportOptions opt;
        opt.lp = &lp;
        auto r = energy_report(s, p, opt);
        CHECK(r.E1 > 0.0);
        CHECK(r.E2 > 0.0);
        double q = r.lyapunov / (r.scriptE1 + r.scriptE2 + r.w_l2_sq);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        CHECK(check_energy_invariants(r, p).empty());
    }
    CHECK(lo > 0.0);
    CHECK(std::isfinite(hi));
    // no gap, no Lyapunov functional
    PhysicalParams crit = make_params(0.5, 1.0, 0.0, 0.0, 0.1, 0.5, 1.0, true);
    CHECK_FALSE(select_lyapunov_params(crit, k).feasible);
}

TEST_CASE("young constants") {
    PhysicalParams p = ref_params();
    const double cg = p.c_g2();
    CHECK(young_C_eps0(p, 0.2) == doctest::Approx(std::pow(p.b - p.tau * cg, 2) / 0.8));
    CHECK(young_C_eps1(0.25) == doctest::Approx(1.0));
    CHECK(young_C_eps23(p, 0.5, 0.5) ==
          doctest::Approx(std::pow(p.tau * cg, 2) / 2.0 + p.tau * (p.b - p.tau * cg) + 0.5 +
                          p.tau * p.tau * (1.0 - cg) / 2.0));
}

TEST_CASE("series accumulation, monitors and the bootstrap verdict") {
    std::vector<EnergyReport> s;
    for (int i = 0; i <= 4; ++i) {
        EnergyReport r;
        r.t = i;
        r.scriptE1 = 1.0 / (1 + i);
        r.scriptE2 = 0.0;
        r.w_l2_sq = 0.0;
        r.dissipation_integrand = 2.0 * i;
        r.normU = 1.0;
        r.normGradU = 0.0;
        r.normV = 0.0;
        r.normW = 0.0;
        r.v_inf = 1.0;
        accumulate(s, r);
    }
    CHECK(s.back().seminorm_E == doctest::Approx(1.0));
    CHECK(s.back().dissipation_D_cum == doctest::Approx(16.0));  // int_0^4 2t dt
    CHECK(dissipation_D(s, 4.0) == doctest::Approx(4.0));
    CHECK(dissipation_D(s, 2.0) == doctest::Approx(2.0));
    CHECK(monitor_M(s, 4.0, 4) == doctest::Approx(5.0));
    CHECK(monitor_M0(s, 4.0, 8) == doctest::Approx(std::pow(5.0, 3.0)));

    auto v = bootstrap_check({0.1, 0.11, 0.12}, 0.1, 0.5, 1.5);
    CHECK(v.threshold == doctest::Approx(4.0 / 27.0));
    CHECK(v.bound == doctest::Approx(0.3));
    CHECK(v.passed());
    auto w = bootstrap_check({0.1, 0.5}, 0.1, 0.5, 1.5);
    CHECK_FALSE(w.conclusion);
    auto big = bootstrap_check({1.0}, 1.0, 1.0, 1.5);
    CHECK_FALSE(big.smallness);
}

TEST_CASE("invariant checks flag non-finite values") {
    EnergyReport r;
    r.E1 = std::nan("");
    CHECK_FALSE(check_energy_invariants(r, ref_params()).empty());
}

TEST_CASE("degenerate states") {
    PhysicalParams p = ref_params(1.0);
    auto g = make_grid(2, 8, 4.0);
    StateVector z = gaussian(g, p, 0.0, 1.0);
    auto r = energy_report(z, p);
    for (double x : {r.E1, r.E2, r.scriptE1, r.scriptE2, r.F1, r.F2, r.w_l2_sq}) CHECK(x == 0.0);
    CHECK(R1(z, p, PhiTag::psi_plus_tau_v) == 0.0);

    // only w: scriptE1 = ||tau w||^2 and the cross terms vanish
    SpectralField w = random_field(g, 5);
    StateVector s = state_from_fields(SpectralField(g), SpectralField(g), w, p, closed_hist());
    const double tw = p.tau * sobolev_seminorm(w, 0);
    CHECK(script_E1(s, p) == doctest::Approx(tw * tw).epsilon(1e-13));
    CHECK(F1(s, p) == 0.0);
    CHECK(F2(s, p) == 0.0);
    CHECK(R1(s, p, PhiTag::psi_plus_tau_v) == 0.0);
}

TEST_CASE("cross term obeys Cauchy-Schwarz") {
    PhysicalParams p = ref_params();
    auto g = make_grid(2, 16, 8.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        StateVector s = random_state(g, p, 300 + seed);
        const double a = sobolev_seminorm(axpy(s.psi, p.tau, s.v), 1);
        const double b = sobolev_seminorm(axpy(s.v, p.tau, s.w), 1);
        CHECK(std::abs(F1(s, p)) <= a * b * (1 + 1e-12));
    }
}

TEST_CASE("larger L1 keeps the chain and raises the ratio floor") {
    PhysicalParams p = ref_params();
    auto g = make_grid(2, 16, 8.0);
    std::vector<StateVector> states;
    for (std::uint64_t i = 0; i < 20; ++i) states.push_back(random_state(g, p, 500 + i));
    auto k = calibrate_constants(p, states);
    auto lp = select_lyapunov_params(p, k);
    REQUIRE(lp.feasible);
    LyapunovParams big = lp;
    big.L1 *= 2.0;
    for (const auto& e : check_lyapunov_chain(big, p, k)) CHECK_MESSAGE(e.passed, e.name << ": " << e.detail);
    auto floor_of = [&](const LyapunovParams& q) {
        double lo = 1e300;
        for (const auto& s : states) {
            ReportOptions opt;
            opt.lp = &q;
            auto r = energy_report(s, p, opt);
            lo = std::min(lo, r.lyapunov / (r.scriptE1 + r.scriptE2 + r.w_l2_sq));
        }
        return lo;
    };
    CHECK(floor_of(big) > floor_of(lp));
}

TEST_CASE("monitor is constant on the reference decay and the quadratic bootstrap") {
    std::vector<EnergyReport> s;
    for (int i = 0; i <= 20; ++i) {
        EnergyReport r;
        r.t = 0.5 * i;
        r.normU = std::pow(1.0 + r.t, -0.75);
        accumulate(s, r);
    }
    for (double m : monitor_M_series(s, 3)) CHECK(m == doctest::Approx(1.0).epsilon(1e-14));

    const double C1 = 0.1, C2 = 1.5;
    auto v = bootstrap_check({0.1}, C1, C2, 2.0);
    CHECK(v.threshold == doctest::Approx(0.25));
    CHECK(v.bound == doctest::Approx(2 * C1));
    CHECK(v.passed());
    // smallest root of C2 M^2 - M + C1 sits below 2 C1
    const double root = (1.0 - std::sqrt(1.0 - 4 * C1 * C2)) / (2 * C2);
    auto at_root = bootstrap_check({C1, 0.5 * (C1 + root), root * (1 - 1e-9)}, C1, C2, 2.0);
    CHECK(at_root.passed());
    CHECK(root < at_root.bound);
    CHECK_FALSE(bootstrap_check({0.1}, 0.3, 1.0, 2.0).smallness);
}
