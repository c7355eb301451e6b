#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jmgt/linear_symbol.hpp"

namespace jmgt {

namespace {

Eigen::Matrix4d mode_matrix(double xi, const PhysicalParams& p) {
    const double q = xi * xi, tau = p.tau;
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A(0, 1) = 1.0;
    A(1, 2) = 1.0;
    A(2, 0) = -p.c_g2() * q / tau;
    A(2, 1) = -p.b * q / tau;
    A(2, 2) = -p.alpha / tau;
    A(2, 3) = -q / tau;
    A(3, 1) = p.mass();
    A(3, 3) = -1.0 / p.kernel.tau_k;
    return A;
}

template <int N>
struct GL {
    std::array<double, N> x{}, w{};  // on [0,1]
    GL() {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& a = G::abscissa();
        const auto& b = G::weights();
        std::size_t k = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) {
                x[k] = 0.5;
                w[k++] = 0.5 * b[i];
                continue;
            }
            x[k] = 0.5 * (1.0 - a[i]);
            w[k++] = 0.5 * b[i];
            x[k] = 0.5 * (1.0 + a[i]);
            w[k++] = 0.5 * b[i];
        }
    }
};

const GL<8>& gl8() {
    static const GL<8> r;
    return r;
}

}  // namespace

ModeBundle make_mode(double xi, cplx psi, cplx v, cplx w, const PhysicalParams& p) {
    ModeBundle m;
    m.xi = xi;
    m.psi = psi;
    m.v = v;
    m.w = w;
    m.I = p.mass() * psi;
    m.Q = p.mass() * std::norm(psi);
    return m;
}

ModeDerivative mode_rhs(const ModeBundle& m, const PhysicalParams& p, const KernelFunctions& kernel) {
    if (!kernel.exponential)
        throw KernelError("the closed memory law is only valid for exponential kernels (got '" + kernel.name + "')");
    return mode_rhs(m, p);
}

ModeDerivative mode_rhs(const ModeBundle& m, const PhysicalParams& p) {
    const double q = m.xi * m.xi, tau = p.tau, tk = p.kernel.tau_k, mass = p.mass();
    ModeDerivative d;
    d.dpsi = m.v;
    d.dv = m.w;
    d.dw = (-p.alpha * m.w - q * (p.c_g2() * m.psi + p.b * m.v + m.I)) / tau;
    d.dI = mass * m.v - m.I / tk;
    d.dQ = 2.0 * (m.I.real() * m.v.real() + m.I.imag() * m.v.imag()) - m.Q / tk;
    return d;
}

double mode_E1(const ModeBundle& m, const PhysicalParams& p) {
    const double q = m.xi * m.xi, tau = p.tau, cg2 = p.c_g2(), tk = p.kernel.tau_k;
    const cplx a = m.psi + tau * m.v, B = m.v + tau * m.w;
    double cross = m.I.real() * m.v.real() + m.I.imag() * m.v.imag();
    return 0.5 * (cg2 * q * std::norm(a) + tau * (p.b - tau * cg2) * q * std::norm(m.v) + std::norm(B) +
                  (tau / tk + 1.0) * q * m.Q + 2.0 * tau * q * cross);
}

double mode_scriptE1(const ModeBundle& m, const PhysicalParams& p) {
    const double q = m.xi * m.xi, tau = p.tau, tk = p.kernel.tau_k;
    return q * std::norm(m.psi + tau * m.v) + std::norm(m.v + tau * m.w) + q * std::norm(m.v) + q * m.Q / tk;
}

ModePropagator::ModePropagator(double xi, const PhysicalParams& p, double h) : h_(h) {
    if (!(h > 0.0)) throw std::invalid_argument("propagator step must be positive");
    const double tk = p.kernel.tau_k;
    Eigen::Matrix4d A = mode_matrix(xi, p);
    Eigen::Matrix4d P = (A * h).exp();
    // Van Loan block for W = int_0^h e^{-(h-r)/tk} e^{A^T r} M e^{A r} dr
    Eigen::Matrix4d At = A + Eigen::Matrix4d::Identity() * (0.5 / tk);
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    M(1, 3) = M(3, 1) = 1.0;
    Eigen::Matrix<double, 8, 8> C = Eigen::Matrix<double, 8, 8>::Zero();
    C.topLeftCorner<4, 4>() = -At.transpose();
    C.topRightCorner<4, 4>() = M;
    C.bottomRightCorner<4, 4>() = At;
    Eigen::Matrix<double, 8, 8> F = (C * h).exp();
    decay_ = std::exp(-h / tk);
    Eigen::Matrix4d W = decay_ * F.bottomRightCorner<4, 4>().transpose() * F.topRightCorner<4, 4>();
    W = 0.5 * (W + W.transpose());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            P_[4 * i + j] = P(i, j);
            W_[4 * i + j] = W(i, j);
        }
}

void ModePropagator::apply(ModeBundle& m) const {
    const cplx y[4] = {m.psi, m.v, m.w, m.I};
    cplx z[4];
    for (int i = 0; i < 4; ++i) {
        z[i] = 0.0;
        for (int j = 0; j < 4; ++j) z[i] += P_[4 * i + j] * y[j];
    }
    double quad = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const cplx prod = std::conj(y[i]) * y[j];
            quad += W_[4 * i + j] * prod.real();
        }
    m.Q = decay_ * m.Q + quad;
    m.psi = z[0];
    m.v = z[1];
    m.w = z[2];
    m.I = z[3];
}

ModeSeries mode_evolve(const ModeBundle& m0, const PhysicalParams& p, const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("empty time grid");
    ModeSeries s;
    ModeBundle m = m0;
    m.eta.reset();
    s.t.push_back(t_grid[0]);
    s.states.push_back(m);
    s.Ehat.push_back(mode_E1(m, p));
    std::optional<ModePropagator> prop;
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        double h = t_grid[i] - t_grid[i - 1];
        if (!(h > 0.0)) throw std::invalid_argument("time grid must be increasing");
        if (!prop || std::abs(prop->h() - h) > 1e-12 * h) prop.emplace(m0.xi, p, h);
        prop->apply(m);
        s.t.push_back(t_grid[i]);
        s.states.push_back(m);
        s.Ehat.push_back(mode_E1(m, p));
    }
    return s;
}

namespace {

// cubic Hermite on [a, b] from values and derivatives
struct Hermite {
    double a, b;
    cplx f0, d0, f1, d1;
    cplx operator()(double u) const {
        const double h = b - a;
        const double x = (u - a) / h;
        const double x2 = x * x, x3 = x2 * x;
        return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * h * d0 + (-2 * x3 + 3 * x2) * f1 + (x3 - x2) * h * d1;
    }
};

// int_a^b g(T - u) H(u) du
cplx panel_conv(const Hermite& H, const KernelSpec& k, double T) {
    const auto& r = gl8();
    const double h = H.b - H.a;
    if (h <= 0.0) return 0.0;
    cplx acc = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        double u = H.a + r.x[i] * h;
        acc += r.w[i] * h * kernel_eval(k, std::max(0.0, T - u)) * H(u);
    }
    return acc;
}

// int_a^b g(T - u) |c - H(u)|^2 du
double panel_sq(const Hermite& H, const KernelSpec& k, double T, cplx c) {
    const auto& r = gl8();
    const double h = H.b - H.a;
    double acc = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        double u = H.a + r.x[i] * h;
        acc += r.w[i] * h * kernel_eval(k, std::max(0.0, T - u)) * std::norm(c - H(u));
    }
    return acc;
}

}  // namespace

ModeSeries mode_evolve_history(const ModeBundle& m0, const PhysicalParams& p, double dt, double t_end,
                               std::size_t out_stride) {
    if (!(dt > 0.0) || !(t_end >= dt)) throw std::invalid_argument("need 0 < dt <= t_end");
    if (out_stride == 0) out_stride = 1;
    const auto& k = p.kernel;
    const double mass = p.mass(), q = m0.xi * m0.xi, tau = p.tau, cg2 = p.c_g2();
    const auto N = static_cast<std::size_t>(std::llround(t_end / dt));
    std::vector<cplx> psi{m0.psi}, vel{m0.v};
    cplx w = m0.w;
    cplx S = 0.0;  // int_0^{t_n} g(t_n - u) psi(u) du
    auto moment = [&](std::size_t n, double theta, cplx ps, cplx vs) {
        if (mass == 0.0) return cplx(0.0);
        const double tn = n * dt, ts = tn + theta * dt;
        cplx conv = std::exp(-theta * dt / k.tau_k) * S;
        if (theta > 0.0) conv += panel_conv(Hermite{tn, ts, psi[n], vel[n], ps, vs}, k, ts);
        return mass * ps - conv;
    };
    auto accel = [&](cplx ps, cplx vs, cplx ws, cplx I) {
        return (-p.alpha * ws - q * (cg2 * ps + p.b * vs + I)) / tau;
    };
    auto snapshot = [&](std::size_t n) {
        ModeBundle b;
        b.xi = m0.xi;
        b.psi = psi[n];
        b.v = vel[n];
        b.w = w;
        b.I = moment(n, 0.0, psi[n], vel[n]);
        const double tn = n * dt;
        double Q = std::norm(psi[n]) * kernel_tail(k, tn);
        if (mass != 0.0)
            for (std::size_t j = 0; j < n; ++j)
                Q += panel_sq(Hermite{j * dt, (j + 1) * dt, psi[j], vel[j], psi[j + 1], vel[j + 1]}, k, tn, psi[n]);
        b.Q = mass == 0.0 ? 0.0 : Q;
        return b;
    };
    ModeSeries s;
    auto record = [&](std::size_t n) {
        ModeBundle b = snapshot(n);
        s.t.push_back(n * dt);
        s.Ehat.push_back(mode_E1(b, p));
        s.states.push_back(std::move(b));
    };
    record(0);
    for (std::size_t n = 0; n < N; ++n) {
        const cplx p0 = psi[n], v0 = vel[n], w0 = w;
        const cplx a1 = accel(p0, v0, w0, moment(n, 0.0, p0, v0));
        const cplx kp1 = v0, kv1 = w0, kw1 = a1;
        cplx p2 = p0 + 0.5 * dt * kp1, v2 = v0 + 0.5 * dt * kv1, w2 = w0 + 0.5 * dt * kw1;
        const cplx kw2 = accel(p2, v2, w2, moment(n, 0.5, p2, v2));
        const cplx kp2 = v2, kv2 = w2;
        cplx p3 = p0 + 0.5 * dt * kp2, v3 = v0 + 0.5 * dt * kv2, w3 = w0 + 0.5 * dt * kw2;
        const cplx kw3 = accel(p3, v3, w3, moment(n, 0.5, p3, v3));
        const cplx kp3 = v3, kv3 = w3;
        cplx p4 = p0 + dt * kp3, v4 = v0 + dt * kv3, w4 = w0 + dt * kw3;
        const cplx kw4 = accel(p4, v4, w4, moment(n, 1.0, p4, v4));
        const cplx kp4 = v4, kv4 = w4;
        psi.push_back(p0 + dt / 6.0 * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4));
        vel.push_back(v0 + dt / 6.0 * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4));
        w = w0 + dt / 6.0 * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
        if (mass != 0.0)
            S = std::exp(-dt / k.tau_k) * S +
                panel_conv(Hermite{n * dt, (n + 1) * dt, psi[n], vel[n], psi[n + 1], vel[n + 1]}, k, (n + 1) * dt);
        if ((n + 1) % out_stride == 0 || n + 1 == N) record(n + 1);
    }
    return s;
}

double fit_mode_rate(const std::vector<double>& t, const std::vector<double>& Ehat) {
    if (t.size() != Ehat.size() || t.size() < 3) throw std::invalid_argument("need at least 3 samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(Ehat[i] > 0.0)) throw std::invalid_argument("mode energy series must be positive");
        double y = std::log(Ehat[i]);
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("degenerate time samples");
    return -(n * sxy - sx * sy) / den;
}

double mode_spectral_rate(double xi, const PhysicalParams& p) {
    Eigen::Matrix4d A = mode_matrix(xi, p);
    Eigen::VectorXcd ev;
    if (p.mass() == 0.0)
        ev = Eigen::EigenSolver<Eigen::Matrix3d>(A.topLeftCorner<3, 3>()).eigenvalues();
    else
        ev = Eigen::EigenSolver<Eigen::Matrix4d>(A).eigenvalues();
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < ev.size(); ++i) mx = std::max(mx, ev[i].real());
    return -2.0 * mx;
}

ModeRate measure_mode_rate(double xi, const PhysicalParams& p, double horizon_factor) {
    double est = mode_spectral_rate(xi, p);
    double T = est > 1e-12 ? horizon_factor / est : 100.0;
    const std::size_t steps = 3000;
    std::vector<double> tg(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) tg[i] = T * static_cast<double>(i) / steps;
    ModeSeries s = mode_evolve(make_mode(xi, 1.0, 1.0, 1.0, p), p, tg);
    std::vector<double> tt, ee;
    for (std::size_t i = 0; i < s.t.size(); ++i)
        if (s.t[i] >= T / 3.0) {
            tt.push_back(s.t[i]);
            ee.push_back(s.Ehat[i]);
        }
    ModeRate r;
    r.xi = xi;
    r.lambda_eff = fit_mode_rate(tt, ee);
    r.normalized = r.lambda_eff * (1.0 + xi * xi) / (xi * xi);
    r.horizon = T;
    return r;
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& norm, double t_lo, double t_hi,
                   const std::string& id) {
    if (t.size() != norm.size()) throw std::invalid_argument("series length mismatch");
    if (!(t_hi > t_lo)) throw std::invalid_argument("degenerate fit window");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(norm[i] > 0.0)) throw std::invalid_argument("norm series must be positive inside the window");
        x.push_back(std::log1p(t[i]));
        y.push_back(std::log(norm[i]));
    }
    if (x.size() < 3) throw std::invalid_argument("fit window holds fewer than 3 samples");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("degenerate fit window");
    DecayFit f;
    f.t_lo = t_lo;
    f.t_hi = t_hi;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    f.points = x.size();
    f.series_id = id;
    return f;
}

double radial_integral(int n, double t) {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
    if (t < 0.0) throw std::invalid_argument("t must be >= 0");
    const auto& r = gl8();
    auto f = [&](double x) { return std::pow(x, n - 1) * std::exp(-x * x * t); };
    // dense panels where the Gaussian lives, coarse beyond
    double cut = t > 0.0 ? std::min(1.0, 12.0 / std::sqrt(t)) : 1.0;
    auto integrate = [&](double a, double b, int panels) {
        double acc = 0.0, h = (b - a) / panels;
        for (int k = 0; k < panels; ++k)
            for (std::size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * h * f(a + (k + r.x[i]) * h);
        return acc;
    };
    double v = integrate(0.0, cut, 64);
    if (cut < 1.0) v += integrate(cut, 1.0, 16);
    return v;
}

RadialInequalityReport check_radial_inequality(int n, const std::vector<double>& t_list) {
    RadialInequalityReport rep;
    rep.n = n;
    rep.limit = 0.5 * std::tgamma(0.5 * n);
    for (double t : t_list) {
        RadialInequalityRow row;
        row.t = t;
        row.integral = radial_integral(n, t);
        row.ratio = row.integral * std::pow(1.0 + t, 0.5 * n);
        row.asymptotic = row.integral * std::pow(t, 0.5 * n);
        rep.C = std::max(rep.C, row.ratio);
        rep.rows.push_back(row);
    }
    rep.bounded = std::isfinite(rep.C) && rep.C > 0.0;
    return rep;
}

}  // namespace jmgt
