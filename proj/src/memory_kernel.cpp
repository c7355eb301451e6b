#include "jmgt/memory_kernel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace jmgt {

namespace {

// 8-point Gauss-Legendre rule on [0,1]
struct UnitRule {
    std::array<double, 8> x{}, w{};
    UnitRule() {
        using G = boost::math::quadrature::gauss<double, 8>;
        const auto& a = G::abscissa();
        const auto& b = G::weights();
        for (std::size_t i = 0; i < 4; ++i) {
            x[2 * i] = 0.5 * (1.0 - a[i]);
            x[2 * i + 1] = 0.5 * (1.0 + a[i]);
            w[2 * i] = w[2 * i + 1] = 0.5 * b[i];
        }
    }
};

const UnitRule& unit_rule() {
    static const UnitRule r;
    return r;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void check_spec(const KernelSpec& k) {
    if (!(k.m >= 0.0) || !(k.c > 0.0) || !(k.tau_k > 0.0) || !(k.zeta >= 0.0))
        throw KernelError("kernel needs m >= 0, c > 0, tau_k > 0, zeta >= 0");
}

std::function<double(double)> weight_fn(const KernelFunctions& k, EtaWeight w) {
    switch (w) {
        case EtaWeight::g: return k.g;
        case EtaWeight::neg_dg: return [f = k.dg](double s) { return -f(s); };
        case EtaWeight::d2g: return k.d2g;
    }
    return k.g;
}

// integral of the weight over [s, inf)
double weight_tail(const KernelFunctions& k, EtaWeight w, double s) {
    switch (w) {
        case EtaWeight::g: return k.tail(s);
        case EtaWeight::neg_dg: return k.g(s);
        case EtaWeight::d2g: return -k.dg(s);
    }
    return 0.0;
}

}  // namespace

KernelSpec make_kernel(double m, double c, double tau_k, double zeta) {
    KernelSpec k{m, c, tau_k, zeta};
    check_spec(k);
    return k;
}

double kernel_eval(const KernelSpec& k, double s) {
    if (s < 0.0) throw KernelError("kernel argument must be nonnegative");
    return k.g0() * std::exp(-s / k.tau_k);
}

double kernel_deriv(const KernelSpec& k, double s) { return -kernel_eval(k, s) / k.tau_k; }

double kernel_deriv2(const KernelSpec& k, double s) { return kernel_eval(k, s) / (k.tau_k * k.tau_k); }

double kernel_mass(const KernelSpec& k) { return k.g0() * k.tau_k; }

double kernel_tail(const KernelSpec& k, double s) { return kernel_mass(k) * std::exp(-s / k.tau_k); }

CgSquared c_g_squared(const KernelSpec& k) {
    double v = k.c * k.c - kernel_mass(k);
    return {v, v > 0.0};
}

KernelFunctions kernel_functions(const KernelSpec& k) {
    check_spec(k);
    KernelFunctions f;
    f.name = "exponential";
    f.g = [k](double s) { return kernel_eval(k, s); };
    f.dg = [k](double s) { return kernel_deriv(k, s); };
    f.d2g = [k](double s) { return kernel_deriv2(k, s); };
    f.tail = [k](double s) { return kernel_tail(k, s); };
    f.zeta = k.zeta_value();
    f.c = k.c;
    f.exponential = true;
    f.tau_k = k.tau_k;
    return f;
}

bool AssumptionReport::all_passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

const AssumptionEntry* AssumptionReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

namespace {

void add_chain(AssumptionReport& r, double c, double c_g2, std::optional<ChainInputs> chain) {
    if (!chain) return;
    double tc2 = chain->tau * c * c;
    double tcg2 = chain->tau * c_g2;
    r.entries.push_back({"subcritical", chain->b > tc2,
                         "b = " + fmt(chain->b) + " vs tau c^2 = " + fmt(tc2)});
    r.entries.push_back({"memory_gap", tc2 > tcg2,
                         "tau c^2 = " + fmt(tc2) + " vs tau c_g^2 = " + fmt(tcg2)});
}

}  // namespace

AssumptionReport validate_assumptions(const KernelFunctions& k, std::optional<ChainInputs> chain) {
    AssumptionReport r;
    const double zeta = k.zeta;
    // dense grid over the support that matters numerically
    double scale = k.exponential ? k.tau_k : 1.0;
    if (!(scale > 0.0)) scale = 1.0;
    const int npts = 10000;
    const double smax = 40.0 * scale;
    bool nonneg = true, decay = true, convex = true;
    double worst_decay = 0.0, worst_convex = 0.0;
    for (int i = 0; i < npts; ++i) {
        double s = smax * i / (npts - 1);
        double g = k.g(s), dg = k.dg(s), d2g = k.d2g(s);
        double tol = 1e-13 * std::max(1.0, std::abs(g));
        if (g < -tol) nonneg = false;
        double d = dg + zeta * g;  // must be <= 0
        if (d > tol) {
            decay = false;
            worst_decay = std::max(worst_decay, d);
        }
        if (d2g < -tol) {
            convex = false;
            worst_convex = std::min(worst_convex, d2g);
        }
    }
    double mass = k.mass();
    double c_g2 = k.c * k.c - mass;
    r.c_g2 = c_g2;
    r.entries.push_back({"nonnegative", nonneg, "g(s) >= 0 on [0, " + fmt(smax) + "]"});
    r.entries.push_back({"positive_effective_speed", c_g2 > 0.0,
                         "c_g^2 = c^2 - mass = " + fmt(c_g2)});
    r.entries.push_back({"decay_inequality", decay,
                         decay ? "g' <= -zeta g with zeta = " + fmt(zeta)
                               : "g' + zeta g reaches " + fmt(worst_decay) + " with zeta = " + fmt(zeta)});
    r.entries.push_back({"convexity", convex, convex ? "g'' >= 0" : "g'' reaches " + fmt(worst_convex)});
    add_chain(r, k.c, c_g2, chain);
    return r;
}

AssumptionReport validate_assumptions(const KernelSpec& k, std::optional<ChainInputs> chain) {
    AssumptionReport r = validate_assumptions(kernel_functions(k), chain);
    // closed-form checks for the exponential family; these override the sampled verdicts
    double zeta = k.zeta_value();
    bool decay_sym = k.m == 0.0 || zeta <= 1.0 / k.tau_k * (1.0 + 1e-14);
    for (auto& e : r.entries) {
        if (e.name == "nonnegative") e.passed = e.passed && k.m >= 0.0;
        if (e.name == "decay_inequality") e.passed = decay_sym;
        if (e.name == "convexity") e.passed = k.m >= 0.0;
    }
    double mt = k.m * k.tau_k;
    r.entries.push_back({"mass_bound", mt < 1.0,
                         "m tau_k = " + fmt(mt) +
                             " must be < 1; the condition is sometimes quoted as m < tau, which differs from c_g^2 > 0"});
    return r;
}

const char* weight_name(EtaWeight w) {
    switch (w) {
        case EtaWeight::g: return "g";
        case EtaWeight::neg_dg: return "-g'";
        case EtaWeight::d2g: return "g''";
    }
    return "?";
}

HistoryField::HistoryField(SpectralField psi_init, double dt, std::size_t capacity)
    : dt_(dt), capacity_(capacity), psi_init_(std::move(psi_init)) {
    if (!(dt > 0.0)) throw KernelError("history step must be positive");
}

std::size_t HistoryField::capacity_for(double s_max, double dt) {
    return static_cast<std::size_t>(std::ceil(s_max / dt - 1e-9)) + 1;
}

void HistoryField::push_snapshot(const SpectralField& psi) {
    require_same_grid(psi_init_, psi);
    if (capacity_ > 0) {
        ring_.push_front(psi);
        while (ring_.size() > capacity_) ring_.pop_back();
    }
    ++steps_;
    t_elapsed_ = static_cast<double>(steps_) * dt_;
}

std::size_t HistoryField::node_count() const {
    if (steps_ == 0) return 1;
    return complete() ? ring_.size() + 1 : ring_.size();
}

const SpectralField& HistoryField::node(std::size_t j) const {
    if (j < ring_.size()) return ring_[j];
    if (j == ring_.size() && complete()) return psi_init_;
    throw KernelError("history node out of range");
}

void HistoryField::restore(double dt, std::size_t capacity, std::size_t steps, double t_elapsed, SpectralField psi_init,
                           std::deque<SpectralField> ring) {
    dt_ = dt;
    capacity_ = capacity;
    steps_ = steps;
    t_elapsed_ = t_elapsed;
    psi_init_ = std::move(psi_init);
    ring_ = std::move(ring);
}

HistoryQuadrature history_quadrature(const HistoryField& h, const KernelFunctions& k, EtaWeight weight, double theta) {
    if (!h.grid()) throw KernelError("empty history");
    auto w = weight_fn(k, weight);
    const auto& rule = unit_rule();
    HistoryQuadrature q;
    const double dt = h.dt();
    const std::size_t nodes = h.node_count();
    if (nodes == 0) throw KernelError("history holds no nodes");
    q.leading_zero = theta > 0.0;
    if (q.leading_zero) q.s.push_back(0.0);
    for (std::size_t j = 0; j < nodes; ++j) q.s.push_back(theta * dt + static_cast<double>(j) * dt);
    const std::size_t ns = q.s.size();
    q.lin.assign(ns, 0.0);
    q.sq_self.assign(ns, 0.0);
    q.sq_cross.assign(ns > 0 ? ns - 1 : 0, 0.0);
    for (std::size_t i = 0; i + 1 < ns; ++i) {
        double a = q.s[i], hw = q.s[i + 1] - a;
        if (hw <= 0.0) continue;
        double l0 = 0, l1 = 0, s00 = 0, s01 = 0, s11 = 0;
        for (std::size_t r = 0; r < rule.x.size(); ++r) {
            double x = rule.x[r];
            double ww = rule.w[r] * hw * w(a + x * hw);
            l0 += ww * (1.0 - x);
            l1 += ww * x;
            s00 += ww * (1.0 - x) * (1.0 - x);
            s01 += ww * 2.0 * x * (1.0 - x);
            s11 += ww * x * x;
        }
        q.lin[i] += l0;
        q.lin[i + 1] += l1;
        q.sq_self[i] += s00;
        q.sq_self[i + 1] += s11;
        q.sq_cross[i] = s01;
    }
    q.has_tail = h.steps() == 0 || h.complete();
    if (q.has_tail) q.tail = weight_tail(k, weight, q.s.back());
    return q;
}

namespace {

// eta at quadrature node i, for mode idx
inline cplx eta_at(const HistoryQuadrature& q, const HistoryField& h, const SpectralField& psi, std::size_t i,
                   std::size_t idx) {
    if (q.leading_zero) {
        if (i == 0) return 0.0;
        return psi.coeffs[idx] - h.node(i - 1).coeffs[idx];
    }
    return psi.coeffs[idx] - h.node(i).coeffs[idx];
}

}  // namespace

SpectralField memory_moment(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                            double theta) {
    require_same_grid(h.psi_init(), psi_current);
    auto q = history_quadrature(h, k, EtaWeight::g, theta);
    SpectralField out(psi_current.grid);
    const std::size_t n = out.size();
    const std::size_t off = q.leading_zero ? 1 : 0;
    // sum_i lin_i (psi - node_i) = psi * sum lin - sum lin_i node_i
    double wsum = 0.0;
    for (std::size_t i = off; i < q.s.size(); ++i) {
        double wi = q.lin[i];
        if (wi == 0.0) continue;
        wsum += wi;
        const auto& nd = h.node(i - off).coeffs;
        for (std::size_t m = 0; m < n; ++m) out.coeffs[m] -= wi * nd[m];
    }
    if (q.has_tail) wsum += q.tail;
    for (std::size_t m = 0; m < n; ++m) out.coeffs[m] += wsum * psi_current.coeffs[m];
    return out;
}

SpectralField memory_moment(const HistoryField& h, const KernelSpec& k, const SpectralField& psi_current,
                            double theta) {
    if (k.m == 0.0) return SpectralField(psi_current.grid);
    return memory_moment(h, kernel_functions(k), psi_current, theta);
}

SpectralField memory_integral(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                              double theta) {
    return apply_laplacian(memory_moment(h, k, psi_current, theta));
}

SpectralField memory_integral(const HistoryField& h, const KernelSpec& k, const SpectralField& psi_current,
                              double theta) {
    return apply_laplacian(memory_moment(h, k, psi_current, theta));
}

std::vector<double> eta_energy_density(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                                       EtaWeight weight) {
    require_same_grid(h.psi_init(), psi_current);
    auto q = history_quadrature(h, k, weight, 0.0);
    const std::size_t n = psi_current.size();
    std::vector<double> out(n, 0.0);
    const std::size_t ns = q.s.size();
    for (std::size_t m = 0; m < n; ++m) {
        double acc = 0.0;
        cplx prev = eta_at(q, h, psi_current, 0, m);
        acc += q.sq_self[0] * std::norm(prev);
        for (std::size_t i = 1; i < ns; ++i) {
            cplx cur = eta_at(q, h, psi_current, i, m);
            acc += q.sq_self[i] * std::norm(cur);
            acc += q.sq_cross[i - 1] * (prev.real() * cur.real() + prev.imag() * cur.imag());
            prev = cur;
        }
        if (q.has_tail) acc += q.tail * std::norm(psi_current.coeffs[m]);
        out[m] = acc;
    }
    return out;
}

double density_seminorm_sq(const SpectralGrid& grid, const std::vector<double>& q, int order) {
    const auto& k2 = grid.k2_op();
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += std::pow(k2[i], order) * q[i];
    return s / grid.volume();
}

double weighted_eta_norm(const HistoryField& h, const KernelFunctions& k, const SpectralField& psi_current,
                         EtaWeight weight, int order) {
    if (order < 0 || order > 2) throw KernelError("eta norm order must be 0, 1 or 2");
    auto q = eta_energy_density(h, k, psi_current, weight);
    return std::sqrt(std::max(0.0, density_seminorm_sq(*psi_current.grid, q, order)));
}

double weighted_eta_norm(const HistoryField& h, const KernelSpec& k, const SpectralField& psi_current,
                         EtaWeight weight, int order) {
    if (k.m == 0.0) return 0.0;
    return weighted_eta_norm(h, kernel_functions(k), psi_current, weight, order);
}

ClosedMemory closed_memory_init(const SpectralField& psi0, const KernelSpec& k) {
    ClosedMemory c;
    const double mass = kernel_mass(k);
    c.moment.resize(psi0.size());
    c.energy.resize(psi0.size());
    for (std::size_t i = 0; i < psi0.size(); ++i) {
        c.moment[i] = mass * psi0.coeffs[i];
        c.energy[i] = mass * std::norm(psi0.coeffs[i]);
    }
    return c;
}

}  // namespace jmgt
