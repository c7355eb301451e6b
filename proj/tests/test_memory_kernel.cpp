#include <cmath>
#include <numbers>

#include "doctest.h"
#include "jmgt/memory_kernel.hpp"

using namespace jmgt;

namespace {

// exact panel integrals of G e^{-s/T} against the two hat functions on [a, b]
struct PanelWeights {
    double left, right;
};
PanelWeights exp_panel(double G, double T, double a, double b) {
    const double h = b - a;
    const double base = G * std::exp(-a / T);
    const double m0 = T * (1.0 - std::exp(-h / T));                            // int_0^h e^{-u/T}
    const double m1 = T * T * (1.0 - std::exp(-h / T) * (1.0 + h / T));        // int_0^h u e^{-u/T}
    return {base * (m0 - m1 / h), base * m1 / h};
}

SpectralField unit_field(const GridPtr& g) {
    SpectralField f(g);
    f[g->ravel({1, 0, 0})] = cplx(2.0, -1.0);
    f[g->ravel({0, 0, 0})] = 0.5;
    return f;
}

}  // namespace

TEST_CASE("exponential kernel closed forms") {
    KernelSpec k = make_kernel(0.1, 1.5, 0.4);
    const double G = 0.1 * 2.25;
    CHECK(kernel_eval(k, 0.0) == doctest::Approx(G));
    CHECK(kernel_mass(k) == doctest::Approx(G * 0.4));
    CHECK_THROWS_AS(kernel_eval(k, -1e-3), KernelError);
    // derivatives against central differences
    for (double s : {0.1, 0.7, 2.0}) {
        const double h = 1e-5;
        double fd1 = (kernel_eval(k, s + h) - kernel_eval(k, s - h)) / (2 * h);
        double fd2 = (kernel_eval(k, s + h) - 2 * kernel_eval(k, s) + kernel_eval(k, s - h)) / (h * h);
        CHECK(kernel_deriv(k, s) == doctest::Approx(fd1).epsilon(1e-8));
        CHECK(kernel_deriv2(k, s) == doctest::Approx(fd2).epsilon(1e-4));
    }
    // tail against composite Simpson
    const double s0 = 0.3, L = 20.0;
    const int n = 20000;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double s = s0 + L * i / n;
        double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        acc += w * kernel_eval(k, s);
    }
    acc *= L / n / 3.0;
    CHECK(kernel_tail(k, s0) == doctest::Approx(acc).epsilon(1e-10));
}

TEST_CASE("effective speed and assumption report") {
    KernelSpec ok = make_kernel(0.1, 1.0, 0.5);
    auto cg = c_g_squared(ok);
    CHECK(cg.value == doctest::Approx(0.95));
    CHECK(cg.admissible);
    auto rep = validate_assumptions(ok, ChainInputs{0.5, 0.6});
    CHECK(rep.all_passed());

    KernelSpec heavy = make_kernel(3.0, 1.0, 0.5);
    CHECK_FALSE(c_g_squared(heavy).admissible);
    CHECK_FALSE(validate_assumptions(heavy).find("positive_effective_speed")->passed);

    // a decay rate larger than 1/tau_k breaks -g' >= zeta g
    KernelSpec fast = make_kernel(0.1, 1.0, 0.5, 3.0);
    CHECK_FALSE(validate_assumptions(fast).find("decay_inequality")->passed);
}

TEST_CASE("history ring keeps the most recent snapshots") {
    auto g = make_grid(1, 8, 1.0);
    SpectralField z(g);
    HistoryField h(z, 0.1, 3);
    CHECK(h.complete());
    CHECK(h.node_count() == 1);
    for (int j = 1; j <= 5; ++j) {
        SpectralField f(g);
        f[0] = j;
        h.push_snapshot(f);
    }
    CHECK(h.length() == 3);
    CHECK(h.steps() == 5);
    CHECK_FALSE(h.complete());
    CHECK(h.node(0)[0].real() == 5.0);
    CHECK(h.node(2)[0].real() == 3.0);
    CHECK(h.t_elapsed() == doctest::Approx(0.5));
    CHECK(HistoryField::capacity_for(1.0, 0.1) == 11);
}

TEST_CASE("memory moment equals the direct convolution of the stored history") {
    auto g = make_grid(1, 8, 2.0);
    KernelSpec k = make_kernel(0.2, 1.0, 0.3);
    const double G = k.g0(), T = k.tau_k, dt = 0.05;
    const int K = 17;
    SpectralField F = unit_field(g);
    auto psi_at = [&](int j) {  // psi(j dt) = (1 + sin(3 t)) F
        SpectralField f = F;
        f *= 1.0 + std::sin(3.0 * j * dt);
        return f;
    };
    HistoryField h(psi_at(0), dt, HistoryField::capacity_for(40 * T, dt));
    for (int j = 1; j <= K; ++j) h.push_snapshot(psi_at(j));
    SpectralField psi_t = psi_at(K);

    for (double theta : {0.0, 0.5, 1.0}) {
        SpectralField psi_now = F;
        psi_now *= 1.0 + std::sin(3.0 * (K + theta) * dt);
        SpectralField I = memory_moment(h, k, psi_now, theta);
        // oracle: eta nodes s = theta dt + j dt with eta = psi_now - psi((K-j) dt),
        // leading node eta(0) = 0 on [0, theta dt], tail eta = psi_now beyond t
        for (std::size_t m : {g->ravel({0, 0, 0}), g->ravel({1, 0, 0})}) {
            cplx acc = 0.0;
            auto eta = [&](int j) { return psi_now[m] - psi_at(K - j)[m]; };
            if (theta > 0) {
                auto w = exp_panel(G, T, 0.0, theta * dt);
                acc += w.right * eta(0);
            }
            for (int j = 0; j < K; ++j) {
                auto w = exp_panel(G, T, theta * dt + j * dt, theta * dt + (j + 1) * dt);
                acc += w.left * eta(j) + w.right * eta(j + 1);
            }
            acc += G * T * std::exp(-(theta * dt + K * dt) / T) * psi_now[m];
            CHECK(std::abs(I[m] - acc) < 1e-12 * (1.0 + std::abs(acc)));
        }
    }
    // Laplacian form
    SpectralField L = memory_integral(h, k, psi_t);
    SpectralField M = memory_moment(h, k, psi_t);
    std::size_t m = g->ravel({1, 0, 0});
    CHECK(std::abs(L[m] + g->k2()[m] * M[m]) < 1e-14);
}

TEST_CASE("memory moment converges to the continuous convolution at second order") {
    // psi(u) = cos(w u) for u >= 0, zero before; I = M psi(t) - int_0^t g(t-u) psi(u) du
    const double G = 0.3, T = 0.5, w = 2.0, t = 1.0;
    KernelSpec k;
    k.m = G;
    k.c = 1.0;
    k.tau_k = T;
    auto exact = [&] {
        // int_0^t G e^{-(t-u)/T} cos(w u) du
        const double a = 1.0 / T;
        double conv = G * (a * std::cos(w * t) + w * std::sin(w * t) - a * std::exp(-a * t)) / (a * a + w * w);
        return G * T * std::cos(w * t) - conv;
    }();
    auto g = make_grid(1, 8, 1.0);
    double prev = 0.0;
    for (int K : {20, 40, 80, 160}) {
        const double dt = t / K;
        SpectralField f(g);
        f[0] = 1.0;
        HistoryField h(f, dt, HistoryField::capacity_for(40 * T, dt));
        for (int j = 1; j <= K; ++j) {
            SpectralField s(g);
            s[0] = std::cos(w * j * dt);
            h.push_snapshot(s);
        }
        SpectralField now(g);
        now[0] = std::cos(w * t);
        double err = std::abs(memory_moment(h, k, now)[0].real() - exact);
        if (prev > 0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("weighted history norms are exact for a ramp") {
    // psi(u) = a u F: eta(s) = a s F for s <= t and a t F beyond
    auto g = make_grid(2, 8, 3.0);
    KernelSpec k = make_kernel(0.15, 1.2, 0.4);
    const double G = k.g0(), T = k.tau_k, dt = 0.02, a = 0.7;
    const int K = 30;
    const double t = K * dt;
    SpectralField F = unit_field(g);
    HistoryField h(SpectralField(g), dt, 1000);
    for (int j = 1; j <= K; ++j) h.push_snapshot(a * j * dt * F);
    SpectralField psi = a * t * F;
    const double e = std::exp(-t / T);
    // int_0^t s^2 e^{-s/T} ds
    const double m2 = T * T * T * (2.0 - e * (t * t / (T * T) + 2 * t / T + 2));
    const double tail = T * e;
    const double base = a * a * (m2 + t * t * tail);
    auto kf = kernel_functions(k);
    const std::size_t m = g->ravel({1, 0, 0});
    const double F2 = std::norm(F[m]);
    const double scales[3] = {G, G / T, G / (T * T)};
    const EtaWeight ws[3] = {EtaWeight::g, EtaWeight::neg_dg, EtaWeight::d2g};
    for (int i = 0; i < 3; ++i) {
        auto q = eta_energy_density(h, kf, psi, ws[i]);
        CHECK(q[m] == doctest::Approx(scales[i] * base * F2).epsilon(1e-12));
    }
    // seminorm with order: (1/V) sum |xi|^2 q
    auto q = eta_energy_density(h, kf, psi, EtaWeight::g);
    double expect = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) expect += g->k2_op()[i] * G * base * std::norm(F[i]);
    expect /= g->volume();
    CHECK(std::pow(weighted_eta_norm(h, k, psi, EtaWeight::g, 1), 2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("closed memory initial data") {
    auto g = make_grid(1, 8, 1.0);
    KernelSpec k = make_kernel(0.1, 1.0, 0.5);
    SpectralField f = unit_field(g);
    ClosedMemory c = closed_memory_init(f, k);
    HistoryField h(f, 0.01, 10);
    SpectralField I = memory_moment(h, k, f);
    auto q = eta_energy_density(h, kernel_functions(k), f, EtaWeight::g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(std::abs(c.moment[i] - I[i]) < 1e-15);
        CHECK(c.energy[i] == doctest::Approx(q[i]));
    }
}

TEST_CASE("empty closed-mode history is rejected by quadrature") {
    auto g = make_grid(1, 8, 1.0);
    HistoryField h(SpectralField(g), 0.1, 0);
    h.push_snapshot(SpectralField(g));
    CHECK_THROWS_AS(history_quadrature(h, kernel_functions(make_kernel(0.1, 1, 0.5)), EtaWeight::g, 0.0),
                    KernelError);
}

TEST_CASE("kernel reference values") {
    KernelSpec a = make_kernel(0.1, 1.0, 0.5);
    CHECK(kernel_eval(a, 0.0) == doctest::Approx(0.1));
    CHECK(kernel_mass(a) == doctest::Approx(0.05));
    KernelSpec b = make_kernel(0.1, 2.0, 1.0);
    CHECK(kernel_eval(b, 1.0) == doctest::Approx(0.4 * std::exp(-1.0)));
    double prev = kernel_eval(b, 0.0);
    for (double s = 0.5; s < 40.0; s += 0.5) {
        const double v = kernel_eval(b, s);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-16);
    // -g' = g / tau_k
    for (double s : {0.0, 0.3, 2.0}) CHECK(-kernel_deriv(b, s) == doctest::Approx(kernel_eval(b, s) / b.tau_k));

    KernelSpec none = make_kernel(0.0, 1.0, 0.5);
    CHECK(kernel_mass(none) == 0.0);
    CHECK(c_g_squared(none).value == doctest::Approx(1.0));
    KernelSpec edge = make_kernel(2.0, 1.0, 0.5);  // m tau_k = 1
    CHECK(c_g_squared(edge).value == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_FALSE(c_g_squared(edge).admissible);
}

TEST_CASE("constant history carries only the tail") {
    auto g = make_grid(1, 8, 2.0);
    KernelSpec k = make_kernel(0.2, 1.0, 0.3);
    const double dt = 0.01;
    const int K = 50;
    const double t = K * dt;
    SpectralField F = unit_field(g);
    HistoryField h(F, dt, HistoryField::capacity_for(40 * k.tau_k, dt));
    for (int j = 1; j <= K; ++j) h.push_snapshot(F);
    // eta = 0 for s <= t and eta = psi0 beyond
    SpectralField I = memory_moment(h, k, F);
    const double tail = k.g0() * k.tau_k * std::exp(-t / k.tau_k);
    for (std::size_t i = 0; i < F.size(); ++i) CHECK(std::abs(I[i] - tail * F[i]) < 1e-14);

    SpectralField none = memory_moment(h, make_kernel(0.0, 1.0, 0.3), F);
    for (std::size_t i = 0; i < F.size(); ++i) CHECK(none[i] == cplx(0.0));
    CHECK(weighted_eta_norm(h, make_kernel(0.0, 1.0, 0.3), F, EtaWeight::g, 0) == 0.0);
}

TEST_CASE("memory integral of an exponential mode") {
    // a(u) = e^{-u}: int_0^t G e^{-(t-u)/T} e^{-u} du in closed form
    const double G = 0.25, T = 0.4, t = 1.5;
    KernelSpec k;
    k.m = G;
    k.c = 1.0;
    k.tau_k = T;
    const double r = 1.0 / T - 1.0;
    const double conv = G * std::exp(-t / T) * (std::exp(r * t) - 1.0) / r;
    const double exact = G * T * std::exp(-t) - conv;
    auto g = make_grid(1, 8, 1.0);
    const double dt = 1e-3;
    const int K = static_cast<int>(std::llround(t / dt));
    SpectralField f(g);
    f[0] = 1.0;
    HistoryField h(f, dt, HistoryField::capacity_for(40 * T, dt));
    for (int j = 1; j <= K; ++j) {
        SpectralField s(g);
        s[0] = std::exp(-j * dt);
        h.push_snapshot(s);
    }
    SpectralField now(g);
    now[0] = std::exp(-t);
    CHECK(std::abs(memory_moment(h, k, now)[0].real() - exact) < 1e-7);
}
