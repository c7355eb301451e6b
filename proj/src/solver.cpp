#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "jmgt/core.hpp"

namespace jmgt {

Stepper::Stepper(const PhysicalParams& p, double dt, Scheme scheme, bool dealiased)
    : p_(p), kf_(kernel_functions(p.kernel)), dt_(dt), scheme_(scheme), dealiased_(dealiased) {
    if (!(dt > 0.0)) throw ParamError("time step must be positive");
}

void Stepper::eval(const StateVector& base, const SpectralField& psi, const SpectralField& v, const SpectralField& w,
                   const CVec* I, const std::vector<double>* Q, double theta, int stage, Stage& out) {
    const auto& g = *psi.grid;
    const auto& k2 = g.k2_op();
    const std::size_t n = psi.size();
    const double cg2 = p_.c_g2(), b = p_.b, tau = p_.tau, alpha = p_.alpha;
    const double mass = p_.mass();

    SpectralField mem;
    bool have_mem = false;
    if (I) {
        have_mem = mass != 0.0;
    } else if (p_.kernel.m != 0.0) {
        mem = memory_moment(base.history, kf_, psi, theta);
        have_mem = true;
    }
    SpectralField prod;
    bool have_prod = include_nonlinearity && p_.k != 0.0;
    if (have_prod) prod = pointwise_product(v, w, dealiased_);
    if (observer) observer(base.step_count, stage, v, w);
    const SpectralField* src = source ? source(base.step_count, stage) : nullptr;

    out.dpsi = v;
    out.dv = w;
    out.dw = SpectralField(psi.grid);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = -alpha * w.coeffs[i] - k2[i] * (cg2 * psi.coeffs[i] + b * v.coeffs[i]);
        if (have_mem) acc -= k2[i] * (I ? (*I)[i] : mem.coeffs[i]);
        if (have_prod) acc += 2.0 * p_.k * prod.coeffs[i];
        if (src) acc += src->coeffs[i];
        out.dw.coeffs[i] = acc / tau;
    }
    if (I) {
        const double tk = p_.kernel.tau_k;
        out.dI.resize(n);
        out.dQ.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx Ii = (*I)[i];
            const cplx vi = v.coeffs[i];
            out.dI[i] = mass * vi - Ii / tk;
            out.dQ[i] = 2.0 * (Ii.real() * vi.real() + Ii.imag() * vi.imag()) - (*Q)[i] / tk;
        }
    }
}

void Stepper::step(StateVector& s) {
    if (!s.closed && p_.kernel.m != 0.0 && std::abs(s.history.dt() - dt_) > 1e-12 * dt_)
        throw ParamError("ring history step differs from solver step");
    if (scheme_ == Scheme::rk4)
        step_rk4(s);
    else
        step_etd(s);
}

namespace {

void lincomb(SpectralField& out, const SpectralField& a, double h, const SpectralField& d) {
    out.grid = a.grid;
    out.coeffs.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.coeffs[i] = a.coeffs[i] + h * d.coeffs[i];
}

void lincomb(CVec& out, const CVec& a, double h, const CVec& d) {
    out.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + h * d[i];
}

void lincomb(std::vector<double>& out, const std::vector<double>& a, double h, const std::vector<double>& d) {
    out.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + h * d[i];
}

template <class V>
void rk4_combine(V& y, double h, const V& k1, const V& k2, const V& k3, const V& k4) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

void Stepper::step_rk4(StateVector& s) {
    const double h = dt_;
    const bool closed = s.closed.has_value();
    Stage k[4];
    SpectralField psi, v, w;
    CVec I;
    std::vector<double> Q;

    eval(s, s.psi, s.v, s.w, closed ? &s.closed->moment : nullptr, closed ? &s.closed->energy : nullptr, 0.0, 0, k[0]);
    const double c[3] = {0.5, 0.5, 1.0};
    for (int st = 1; st < 4; ++st) {
        const double a = c[st - 1] * h;
        const Stage& prev = k[st - 1];
        lincomb(psi, s.psi, a, prev.dpsi);
        lincomb(v, s.v, a, prev.dv);
        lincomb(w, s.w, a, prev.dw);
        if (closed) {
            lincomb(I, s.closed->moment, a, prev.dI);
            lincomb(Q, s.closed->energy, a, prev.dQ);
        }
        eval(s, psi, v, w, closed ? &I : nullptr, closed ? &Q : nullptr, c[st - 1], st, k[st]);
    }
    rk4_combine(s.psi.coeffs, h, k[0].dpsi.coeffs, k[1].dpsi.coeffs, k[2].dpsi.coeffs, k[3].dpsi.coeffs);
    rk4_combine(s.v.coeffs, h, k[0].dv.coeffs, k[1].dv.coeffs, k[2].dv.coeffs, k[3].dv.coeffs);
    rk4_combine(s.w.coeffs, h, k[0].dw.coeffs, k[1].dw.coeffs, k[2].dw.coeffs, k[3].dw.coeffs);
    if (closed) {
        rk4_combine(s.closed->moment, h, k[0].dI, k[1].dI, k[2].dI, k[3].dI);
        rk4_combine(s.closed->energy, h, k[0].dQ, k[1].dQ, k[2].dQ, k[3].dQ);
    } else {
        s.history.push_snapshot(s.psi);
    }
    ++s.step_count;
    s.t = static_cast<double>(s.step_count) * h;
}

void Stepper::build_etd(const SpectralGrid& g) {
    etd_grid_ = &g;
    const auto& k2 = g.k2_op();
    const std::size_t n = k2.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return k2[a] < k2[b]; });
    etd_index_.assign(n, 0);
    etd_E_.clear();
    etd_phi_.clear();
    const double tau = p_.tau, h = dt_;
    double last = -1.0;
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t i = order[r];
        double q = k2[i];
        if (etd_E_.empty() || std::abs(q - last) > 1e-12 * std::max(1.0, q)) {
            Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
            M(0, 1) = 1.0;
            M(1, 2) = 1.0;
            M(2, 0) = -p_.c_g2() * q / tau;
            M(2, 1) = -p_.b * q / tau;
            M(2, 2) = -p_.alpha / tau;
            M(2, 3) = 1.0 / tau;
            Eigen::Matrix4d X = (h * M).exp();
            std::array<double, 9> E{};
            for (int a = 0; a < 3; ++a)
                for (int c = 0; c < 3; ++c) E[3 * a + c] = X(a, c);
            etd_E_.push_back(E);
            // last column of exp(h M) = h phi1(hA) e3/tau
            etd_phi_.push_back({X(0, 3), X(1, 3), X(2, 3)});
            last = q;
        }
        etd_index_[i] = etd_E_.size() - 1;
    }
}

void Stepper::step_etd(StateVector& s) {
    const auto& g = *s.grid();
    if (etd_grid_ != &g) build_etd(g);
    const std::size_t n = s.psi.size();
    const auto& k2 = g.k2_op();
    const bool closed = s.closed.has_value();
    const double mass = p_.mass();

    SpectralField mem;
    bool have_mem = false;
    if (closed) {
        have_mem = mass != 0.0;
    } else if (p_.kernel.m != 0.0) {
        mem = memory_moment(s.history, kf_, s.psi, 0.0);
        have_mem = true;
    }
    SpectralField prod;
    bool have_prod = include_nonlinearity && p_.k != 0.0;
    if (have_prod) prod = pointwise_product(s.v, s.w, dealiased_);
    if (observer) observer(s.step_count, 0, s.v, s.w);
    const SpectralField* src = source ? source(s.step_count, 0) : nullptr;

    const double tk = p_.kernel.tau_k;
    const double decay = std::exp(-dt_ / tk);
    const double gain = -tk * std::expm1(-dt_ / tk);
    for (std::size_t i = 0; i < n; ++i) {
        cplx N = 0.0;
        if (have_mem) N -= k2[i] * (closed ? s.closed->moment[i] : mem.coeffs[i]);
        if (have_prod) N += 2.0 * p_.k * prod.coeffs[i];
        if (src) N += src->coeffs[i];
        const auto& E = etd_E_[etd_index_[i]];
        const auto& ph = etd_phi_[etd_index_[i]];
        cplx y0 = s.psi.coeffs[i], y1 = s.v.coeffs[i], y2 = s.w.coeffs[i];
        if (closed) {
            cplx I = s.closed->moment[i];
            double Qs = 2.0 * (I.real() * y1.real() + I.imag() * y1.imag());
            s.closed->moment[i] = decay * I + gain * mass * y1;
            s.closed->energy[i] = decay * s.closed->energy[i] + gain * Qs;
        }
        s.psi.coeffs[i] = E[0] * y0 + E[1] * y1 + E[2] * y2 + ph[0] * N;
        s.v.coeffs[i] = E[3] * y0 + E[4] * y1 + E[5] * y2 + ph[1] * N;
        s.w.coeffs[i] = E[6] * y0 + E[7] * y1 + E[8] * y2 + ph[2] * N;
    }
    if (!closed) s.history.push_snapshot(s.psi);
    ++s.step_count;
    s.t = static_cast<double>(s.step_count) * dt_;
}

StateVector step(StateVector s, const PhysicalParams& p, double dt, Scheme scheme) {
    Stepper st(p, dt, scheme);
    st.step(s);
    return s;
}

Derivative rhs(const StateVector& s, const PhysicalParams& p, bool dealiased) {
    const auto& k2 = s.grid()->k2_op();
    const std::size_t n = s.psi.size();
    SpectralField mom = state_memory_moment(s, p);
    SpectralField prod;
    if (p.k != 0.0) prod = pointwise_product(s.v, s.w, dealiased);
    Derivative d;
    d.dpsi = s.v;
    d.dv = s.w;
    d.dw = SpectralField(s.grid());
    const double cg2 = p.c_g2();
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = -p.alpha * s.w.coeffs[i] - k2[i] * (cg2 * s.psi.coeffs[i] + p.b * s.v.coeffs[i] + mom.coeffs[i]);
        if (p.k != 0.0) acc += 2.0 * p.k * prod.coeffs[i];
        d.dw.coeffs[i] = acc / p.tau;
    }
    for (std::size_t i = 0; i < n; ++i) {
        bool bad = !std::isfinite(d.dw.coeffs[i].real()) || !std::isfinite(d.dw.coeffs[i].imag());
        if (bad) {
            std::ostringstream os;
            os << "non-finite derivative at t = " << s.t;
            throw BlowUpError(os.str(), s.t);
        }
    }
    if (s.closed) {
        const double mass = p.mass(), tk = p.kernel.tau_k;
        d.dmoment.resize(n);
        d.denergy.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            cplx I = s.closed->moment[i], v = s.v.coeffs[i];
            d.dmoment[i] = mass * v - I / tk;
            d.denergy[i] = 2.0 * (I.real() * v.real() + I.imag() * v.imag()) - s.closed->energy[i] / tk;
        }
    }
    return d;
}

namespace {

double blowup_reference(const StateVector& s, const PhysicalParams& p) {
    double w0 = sobolev_seminorm(s.w, 0);
    // quasi-static scale of w driven by the initial elastic force
    const auto& k2 = s.grid()->k2_op();
    double acc = 0.0;
    for (std::size_t i = 0; i < s.psi.size(); ++i)
        acc += std::norm(k2[i] * (p.c_g2() * s.psi.coeffs[i] + p.b * s.v.coeffs[i]));
    double drive = std::sqrt(acc / s.grid()->volume()) / p.alpha;
    return std::max(w0, drive);
}

}  // namespace

SolveResult solve(StateVector init, const PhysicalParams& p, const SolverConfig& cfg, const Monitor& monitor,
                  Stepper* custom) {
    if (!(cfg.dt > 0.0)) throw ParamError("dt must be positive");
    if (!(cfg.t_end >= cfg.dt)) throw ParamError("t_end must be at least dt");
    if (cfg.monitor_stride == 0) throw ParamError("monitor stride must be positive");
    Stepper local(p, cfg.dt, cfg.scheme, cfg.dealias);
    Stepper& st = custom ? *custom : local;
    SolveResult res;
    const double ref = blowup_reference(init, p);
    const double t0 = init.t;
    const auto nsteps = static_cast<std::size_t>(std::llround((cfg.t_end - t0) / cfg.dt));
    StateVector s = std::move(init);
    if (monitor) monitor(s);
    std::size_t since = 0;
    for (std::size_t n = 0; n < nsteps; ++n) {
        StateVector prev = s;
        st.step(s);
        ++res.steps;
        double wn = sobolev_seminorm(s.w, 0);
        bool nan = !std::isfinite(wn);
        if (nan || (ref > 0.0 && wn > cfg.blowup_factor * ref)) {
            res.blew_up = true;
            res.blowup_time = s.t;
            std::ostringstream os;
            os << (nan ? "non-finite state" : "||w|| exceeded blow-up threshold") << " at t = " << s.t;
            res.message = os.str();
            res.final_state = std::move(prev);
            return res;
        }
        ++since;
        if (monitor && (since == cfg.monitor_stride || n + 1 == nsteps)) {
            monitor(s);
            since = 0;
        }
    }
    res.final_state = std::move(s);
    return res;
}

}  // namespace jmgt
