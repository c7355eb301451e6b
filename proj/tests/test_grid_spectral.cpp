#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jmgt/grid_spectral.hpp"

using namespace jmgt;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> random_samples(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = u(rng);
    return x;
}

template <class F>
std::vector<double> sample(const GridPtr& g, F f) {
    std::vector<double> x(g->size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = f(g->position(i));
    return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// second-order central difference Laplacian on samples (periodic)
std::vector<double> fd_laplacian(const GridPtr& g, const std::vector<double>& x) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto p = g->unravel(i);
        for (int a = 0; a < g->dim(); ++a) {
            const double h = g->length(a) / g->points();
            auto pp = p, pm = p;
            pp[a] = (p[a] + 1) % g->points();
            pm[a] = (p[a] + g->points() - 1) % g->points();
            out[i] += (x[g->ravel(pp)] - 2 * x[i] + x[g->ravel(pm)]) / (h * h);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("parseval and round trip on a 3-D box") {
    auto g = make_grid(3, 16, 7.0);
    auto x = random_samples(g->size(), 1);
    SpectralField f = forward_transform(g, x);
    double direct = 0.0;
    for (double v : x) direct += v * v;
    direct *= g->cell_volume();
    const double spec = std::pow(sobolev_seminorm(f, 0), 2);
    CHECK(std::abs(spec - direct) / direct < 1e-12);
    CHECK(max_abs_diff(inverse_transform(f), x) < 1e-12);
    CHECK(hermitian_defect(f) < 1e-12);
    CHECK(std::abs(lp_norm(*g, x, 2.0) - std::sqrt(direct)) < 1e-12);
}

TEST_CASE("single mode coefficient carries the box volume") {
    auto g = make_grid(2, 8, 3.0);
    const double k = 2 * pi / 3.0;
    SpectralField f = forward_transform(g, sample(g, [&](auto p) { return std::cos(k * p[0]); }));
    std::size_t ip = g->ravel({1, 0, 0});
    CHECK(std::abs(f[ip] - cplx(0.5 * g->volume(), 0.0)) < 1e-12);
}

TEST_CASE("laplacian and gradient of trigonometric fields are exact") {
    auto g = make_grid(2, 32, 2 * pi);
    auto fx = sample(g, [](auto p) { return std::sin(p[0]) * std::cos(3 * p[1]); });
    auto lap = inverse_transform(apply_laplacian(forward_transform(g, fx)));
    std::vector<double> expect(fx.size());
    for (std::size_t i = 0; i < fx.size(); ++i) expect[i] = -10.0 * fx[i];
    CHECK(max_abs_diff(lap, expect) < 1e-11);

    auto gx = inverse_transform(apply_gradient(forward_transform(g, fx), 0));
    auto gexp = sample(g, [](auto p) { return std::cos(p[0]) * std::cos(3 * p[1]); });
    CHECK(max_abs_diff(gx, gexp) < 1e-12);

    auto k4 = inverse_transform(apply_k2_power(forward_transform(g, fx), 2));
    for (std::size_t i = 0; i < fx.size(); ++i) expect[i] = 100.0 * fx[i];
    CHECK(max_abs_diff(k4, expect) < 1e-9);
}

TEST_CASE("finite-difference laplacian approaches the spectral one at second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        auto g = make_grid(1, n, 2 * pi);
        auto x = sample(g, [](auto p) { return std::exp(std::sin(p[0])); });
        auto spec = inverse_transform(apply_laplacian(forward_transform(g, x)));
        double err = max_abs_diff(fd_laplacian(g, x), spec);
        if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("L4 norm of sin on one period") {
    auto g = make_grid(1, 64, 2 * pi);
    auto x = sample(g, [](auto p) { return std::sin(p[0]); });
    CHECK(lp_norm(*g, x, 4.0) == doctest::Approx(std::pow(3 * pi / 4, 0.25)).epsilon(1e-13));
    CHECK(lp_norm(*g, x, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0).epsilon(1e-3));
    x[3] = std::nan("");
    CHECK_THROWS_AS(lp_norm(*g, x, 4.0), GridError);
}

TEST_CASE("dealiased product equals the exact convolution on retained modes") {
    const int n = 24;
    auto g = make_grid(1, n, 5.0);
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    SpectralField a(g), b(g);
    const auto& mask = g->dealias_mask();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (mask[i]) {
            a[i] = cplx(nd(rng), nd(rng));
            b[i] = cplx(nd(rng), nd(rng));
        }
    SpectralField p = pointwise_product(a, b, true);
    // continuum coefficients: (a b)^(k) = (1/V) sum_{p+q=k} a^(p) b^(q)
    const int cut = (n - 1) / 3;
    for (int k = -cut; k <= cut; ++k) {
        cplx s = 0.0;
        for (int q = -cut; q <= cut; ++q) {
            int r = k - q;
            if (std::abs(r) > cut) continue;
            s += a[(q + n) % n] * b[(r + n) % n];
        }
        s /= g->volume();
        CHECK(std::abs(p[(k + n) % n] - s) < 1e-12 * (1 + std::abs(s)));
    }
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!mask[i]) CHECK(std::abs(p[i]) == 0.0);
}

TEST_CASE("hermitian part removes the imaginary field") {
    auto g = make_grid(2, 8, 1.0);
    SpectralField f(g);
    f[g->ravel({1, 2, 0})] = cplx(1.0, 2.0);
    CHECK(hermitian_defect(f) > 0.1);
    SpectralField h = hermitian_part(f);
    CHECK(hermitian_defect(h) < 1e-15);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(make_grid(4, 16, 1.0), GridError);
    CHECK_THROWS_AS(make_grid(2, 15, 1.0), GridError);
    CHECK_THROWS_AS(make_grid(2, 16, -1.0), GridError);
    auto g1 = make_grid(2, 16, 1.0);
    auto g2 = make_grid(2, 16, 2.0);
    CHECK_THROWS_AS(SpectralField(g1) + SpectralField(g2), GridError);
    CHECK_THROWS_AS(apply_gradient(SpectralField(g1), 2), GridError);
}

TEST_CASE("index helpers are consistent") {
    auto g = make_grid(3, 8, 2.0);
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(g->ravel(g->unravel(i)) == i);
        std::size_t j = g->conj_index(i);
        CHECK(g->conj_index(j) == i);
        CHECK(g->k2()[i] == doctest::Approx(g->k2()[j]));
    }
}

TEST_CASE("wavenumber sets and cell volume") {
    auto g = make_grid(1, 8, 2 * pi);
    const std::vector<double> k = {0, 1, 2, 3, 4, -3, -2, -1};
    REQUIRE(g->axis_wavenumbers(0).size() == k.size());
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(g->axis_wavenumbers(0)[i] == doctest::Approx(k[i]));

    auto g3 = make_grid(3, 64, 40.0);
    double kmax = 0.0;
    for (double v : g3->axis_wavenumbers(2)) kmax = std::max(kmax, std::abs(v));
    CHECK(kmax == doctest::Approx(2 * pi * 32 / 40.0));
    CHECK(g3->cell_volume() * static_cast<double>(g3->size()) == doctest::Approx(g3->volume()).epsilon(1e-14));
    CHECK(g3->volume() == doctest::Approx(64000.0));
}

TEST_CASE("constant and sine fields have the expected coefficients") {
    auto g = make_grid(1, 16, 2 * pi);
    SpectralField c = forward_transform(g, sample(g, [](auto) { return 3.0; }));
    CHECK(std::abs(c[0] - cplx(3.0 * g->volume(), 0.0)) < 1e-12);
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(std::abs(c[i]) < 1e-12);
    CHECK(sobolev_seminorm(c, 1) < 1e-12);
    auto lapc = inverse_transform(apply_laplacian(c));
    for (double v : lapc) CHECK(std::abs(v) < 1e-12);

    SpectralField s = forward_transform(g, sample(g, [](auto p) { return std::sin(p[0]); }));
    const double half = 0.5 * g->volume();
    CHECK(std::abs(s[1] - cplx(0.0, -half)) < 1e-12);
    CHECK(std::abs(s[15] - cplx(0.0, half)) < 1e-12);
    // |a sin|_{H^1} = a |cos|_{L^2} = a sqrt(pi)
    CHECK(sobolev_seminorm(2.5 * s, 1) == doctest::Approx(2.5 * std::sqrt(pi)).epsilon(1e-13));

    // constant one: L^p norm is V^{1/p}
    auto one = sample(g, [](auto) { return 1.0; });
    CHECK(lp_norm(*g, one, 3.0) == doctest::Approx(std::cbrt(2 * pi)));
    CHECK(lp_norm(*g, one, std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("dealiasing keeps resolved modes and drops the Nyquist mode") {
    auto g = make_grid(2, 12, 4.0);
    SpectralField f(g);
    f[g->ravel({1, 2, 0})] = cplx(1.0, 0.5);
    f[g->conj_index(g->ravel({1, 2, 0}))] = cplx(1.0, -0.5);
    SpectralField d = dealias(f);
    CHECK(d.coeffs == f.coeffs);

    SpectralField nyq(g);
    nyq[g->ravel({6, 0, 0})] = 1.0;
    nyq[g->ravel({0, 6, 0})] = -2.0;
    SpectralField dn = dealias(nyq);
    for (std::size_t i = 0; i < dn.size(); ++i) CHECK(dn[i] == cplx(0.0));
    CHECK(g->k2_op()[g->ravel({6, 0, 0})] == 0.0);
}

TEST_CASE("laplacian is self-adjoint and the product is bilinear") {
    auto g = make_grid(3, 8, 3.0);
    SpectralField a = forward_transform(g, random_samples(g->size(), 11));
    SpectralField b = forward_transform(g, random_samples(g->size(), 12));
    SpectralField c = forward_transform(g, random_samples(g->size(), 13));
    const double lhs = sobolev_inner(apply_laplacian(a), b, 0);
    const double rhs = sobolev_inner(a, apply_laplacian(b), 0);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));

    SpectralField ab = pointwise_product(a, b);
    SpectralField ba = pointwise_product(b, a);
    for (std::size_t i = 0; i < ab.size(); ++i) CHECK(std::abs(ab[i] - ba[i]) < 1e-12 * (1 + std::abs(ab[i])));
    SpectralField lin = pointwise_product(axpy(a, 2.0, c), b);
    SpectralField sep = pointwise_product(a, b) + 2.0 * pointwise_product(c, b);
    for (std::size_t i = 0; i < lin.size(); ++i) CHECK(std::abs(lin[i] - sep[i]) < 1e-11 * (1 + std::abs(sep[i])));
    SpectralField zero = pointwise_product(a, SpectralField(g));
    for (std::size_t i = 0; i < zero.size(); ++i) CHECK(zero[i] == cplx(0.0));
}

TEST_CASE("sin squared product matches the half-angle identity") {
    auto g = make_grid(1, 16, 2 * pi);
    SpectralField s = forward_transform(g, sample(g, [](auto p) { return std::sin(p[0]); }));
    auto x = inverse_transform(pointwise_product(s, s));
    auto expect = sample(g, [](auto p) { return 0.5 * (1.0 - std::cos(2 * p[0])); });
    CHECK(max_abs_diff(x, expect) < 1e-13);
}

TEST_CASE("Ladyzhenskaya quotient stays bounded over random fields") {
    for (int dim : {2, 3}) {
        auto g = make_grid(dim, dim == 2 ? 32 : 12, 2 * pi);
        double worst = 0.0;
        for (unsigned seed = 0; seed < 100; ++seed) {
            SpectralField f = dealias(forward_transform(g, random_samples(g->size(), 100 + seed)));
            const double l4 = lp_norm(f, 4.0);
            const double l2 = sobolev_seminorm(f, 0);
            const double h1 = sobolev_seminorm(f, 1);
            const double q = l4 / (std::pow(l2, 1.0 - dim / 4.0) * std::pow(h1, dim / 4.0));
            CHECK(std::isfinite(q));
            worst = std::max(worst, q);
        }
        CHECK(worst > 0.0);
        CHECK(worst < 10.0);
    }
}
