#include <cmath>
#include <sstream>

#include "jmgt/core.hpp"

namespace jmgt {

namespace {

std::string num(double x) {
    std::ostringstream os;
    os.precision(8);
    os << x;
    return os.str();
}

}  // namespace

double nonlinearity_from_ratio(double b_over_a, double c) { return (0.5 * b_over_a + 1.0) / (c * c); }

PhysicalParams make_params(double tau, double c, double delta, double k, double m, double tau_k, double alpha,
                           bool allow_non_subcritical, double zeta, double rho) {
    if (!(tau > 0.0) || !(c > 0.0) || !(alpha > 0.0) || !(tau_k > 0.0) || !(m >= 0.0) || !(zeta >= 0.0) ||
        !std::isfinite(delta) || !std::isfinite(k))
        throw ParamError("need tau > 0, c > 0, alpha > 0, tau_k > 0, m >= 0, zeta >= 0 and finite delta, k");
    PhysicalParams p;
    p.tau = tau;
    p.c = c;
    p.delta = delta;
    p.b = delta + tau * c * c;
    p.k = k;
    p.alpha = alpha;
    p.rho = rho;
    p.kernel = KernelSpec{m, c, tau_k, zeta};
    p.allow_non_subcritical = allow_non_subcritical;
    require_runnable(p);
    return p;
}

const char* class_name(ParamClass c) {
    switch (c) {
        case ParamClass::subcritical: return "subcritical";
        case ParamClass::critical: return "critical";
        case ParamClass::non_admissible: return "non-admissible";
    }
    return "?";
}

std::string ParamsReport::summary() const {
    std::ostringstream os;
    os << class_name(cls) << ":";
    for (const auto& e : checks) os << " [" << (e.passed ? "ok" : "FAIL") << "] " << e.name << " (" << e.detail << ")";
    return os.str();
}

ParamsReport validate_params(const PhysicalParams& p) {
    ParamsReport r;
    const double tc2 = p.tau * p.c * p.c;
    const double cg2 = p.c_g2();
    const double tcg2 = p.tau * cg2;
    bool basic = p.tau > 0.0 && p.c > 0.0 && p.alpha > 0.0 && p.kernel.tau_k > 0.0 && p.kernel.m >= 0.0;
    bool b_consistent = std::abs(p.b - (p.delta + tc2)) <= 1e-12 * std::max(1.0, std::abs(p.b));
    bool speed_match = p.kernel.c == p.c;
    r.checks.push_back({"positive_inputs", basic, "tau, c, alpha, tau_k > 0 and m >= 0"});
    r.checks.push_back({"b_definition", b_consistent, "b = " + num(p.b) + ", delta + tau c^2 = " + num(p.delta + tc2)});
    r.checks.push_back({"kernel_speed", speed_match, "kernel c = " + num(p.kernel.c) + ", c = " + num(p.c)});
    r.checks.push_back({"nonnegative_diffusivity", p.delta >= 0.0, "delta = " + num(p.delta)});
    r.checks.push_back({"positive_effective_speed", cg2 > 0.0, "c_g^2 = " + num(cg2)});
    r.checks.push_back({"subcritical", p.b > tc2, "b = " + num(p.b) + " vs tau c^2 = " + num(tc2)});
    r.checks.push_back({"memory_gap", tc2 > tcg2, "tau c^2 = " + num(tc2) + " vs tau c_g^2 = " + num(tcg2)});
    auto ka = validate_assumptions(p.kernel);
    for (const auto& e : ka.entries)
        if (e.name == "decay_inequality" || e.name == "nonnegative" || e.name == "convexity")
            r.checks.push_back({"kernel_" + e.name, e.passed, e.detail});

    bool hard_fail = !basic || !b_consistent || !speed_match || p.delta < 0.0 || cg2 <= 0.0;
    for (const auto& e : r.checks)
        if (e.name.rfind("kernel_", 0) == 0 && !e.passed) hard_fail = true;
    if (hard_fail)
        r.cls = ParamClass::non_admissible;
    else if (p.b > tc2 && tc2 > tcg2)
        r.cls = ParamClass::subcritical;
    else
        r.cls = ParamClass::critical;
    return r;
}

void require_runnable(const PhysicalParams& p) {
    auto r = validate_params(p);
    if (r.cls == ParamClass::non_admissible)
        throw ParamError("non-admissible parameters, the subcritical chain b > tau c^2 > tau c_g^2 with delta >= 0 and "
                         "c_g^2 > 0 is required: " + r.summary());
    if (r.cls == ParamClass::critical && !p.allow_non_subcritical)
        throw ParamError("parameters are not subcritical (b > tau c^2 > tau c_g^2 fails); set the non-subcritical "
                         "override to run them: " + r.summary());
}

}  // namespace jmgt
