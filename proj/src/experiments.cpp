#include "jmgt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "jmgt/checkpoint.hpp"
#include "jmgt/output.hpp"

namespace jmgt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string out_path(const RunSpec& spec, const std::string& name) {
    return (std::filesystem::path(spec.output.directory) / name).string();
}

bool same_params(const PhysicalParams& a, const PhysicalParams& b) {
    return a.tau == b.tau && a.alpha == b.alpha && a.c == b.c && a.delta == b.delta && a.b == b.b && a.k == b.k &&
           a.kernel.m == b.kernel.m && a.kernel.tau_k == b.kernel.tau_k && a.kernel.zeta == b.kernel.zeta;
}

SpectralField scaled(SpectralField f, double s) {
    f *= s;
    return f;
}

double l2_diff(const SpectralField& a, const SpectralField& b) {
    double s = sobolev_seminorm(a - b, 0);
    return s * s;
}

// coarse coefficients placed at the same integer wavenumbers of a finer grid
SpectralField project_to(const SpectralField& f, const GridPtr& fine) {
    const SpectralGrid& g = *f.grid;
    SpectralField out(fine);
    const int nc = g.points(), nf = fine->points();
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto pos = g.unravel(i);
        std::array<int, 3> q{0, 0, 0};
        bool nyquist = false;
        for (int a = 0; a < g.dim(); ++a) {
            int k = g.mode_index(pos[a]);
            if (2 * std::abs(k) == nc) nyquist = true;
            q[a] = (k + nf) % nf;
        }
        if (nyquist) continue;
        out.coeffs[fine->ravel(q)] = f.coeffs[i];
    }
    return out;
}

double state_distance(const StateVector& a, const StateVector& b) {
    return std::sqrt(l2_diff(a.psi, b.psi) + l2_diff(a.v, b.v) + l2_diff(a.w, b.w));
}

std::vector<double> column(const std::vector<RadialNorms>& rows, double RadialNorms::*f) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::abs(r.*f));
    return out;
}

}  // namespace

StateVector initial_state_for(const RunSpec& spec, const PhysicalParams& p) {
    if (!spec.time.resume_from.empty()) {
        Checkpoint ck = read_checkpoint(spec.time.resume_from);
        if (!same_params(ck.params, p)) throw ConfigError("resume: checkpoint parameters differ from [physics]");
        const auto& g = *ck.state.grid();
        if (g.dim() != spec.grid.dim || g.points() != spec.grid.points || g.length(0) != spec.grid.box_length)
            throw ConfigError("resume: checkpoint grid differs from [grid]");
        return std::move(ck.state);
    }
    GridPtr grid = spec.make_grid();
    HistoryOptions hist = spec.history_options();
    const auto& e = spec.experiment;
    if (e.profile == "random") {
        return state_from_fields(random_field(grid, e.seed, e.amplitude), random_field(grid, e.seed + 1, e.velocity_amplitude),
                                 random_field(grid, e.seed + 2, e.accel_amplitude), p, hist);
    }
    if (e.profile == "single_mode") return initial_state(grid, spec.profile(), p, hist);
    GaussianProfile shape;
    shape.amplitude = 1.0;
    shape.width = e.width;
    StateVector base = initial_state(grid, shape, p, hist);
    return state_from_fields(scaled(base.psi, e.amplitude), scaled(base.psi, e.velocity_amplitude),
                             scaled(base.psi, e.accel_amplitude), p, hist);
}

LyapunovParams calibrated_lyapunov(const PhysicalParams& p, int dim, double box_length, std::uint64_t seed,
                                   std::size_t samples) {
    GridPtr g = make_grid(dim, 16, box_length);
    std::vector<StateVector> states;
    for (std::size_t i = 0; i < samples; ++i) states.push_back(random_state(g, p, seed + i));
    return select_lyapunov_params(p, calibrate_constants(p, states));
}

SimulationRecord run_simulation(const StateVector& init, const PhysicalParams& p, const SolverConfig& cfg,
                                const LyapunovParams* lp, bool v_inf) {
    SimulationRecord rec;
    if (lp) rec.lp = *lp;
    ReportOptions opt;
    opt.lp = lp && lp->feasible ? &rec.lp : nullptr;
    opt.v_inf = v_inf;
    opt.dealias = cfg.dealias;
    auto monitor = [&](const StateVector& s) {
        EnergyReport r = energy_report(s, p, opt);
        if (!opt.lp) r.lyapunov = kNaN;
        for (auto& b : check_energy_invariants(r, p)) rec.violations.push_back("t=" + format_f64(s.t) + ": " + b);
        accumulate(rec.series, std::move(r));
    };
    rec.result = solve(init, p, cfg, monitor);
    rec.M = monitor_M_series(rec.series, init.grid()->dim());
    return rec;
}

// ---------------------------------------------------------------- simulate

CommandResult cmd_simulate(const RunSpec& spec) {
    CommandResult res;
    const PhysicalParams p = spec.params();
    StateVector init = initial_state_for(spec, p);
    const int dim = init.grid()->dim();
    LyapunovParams lp = calibrated_lyapunov(p, dim, spec.grid.box_length, spec.experiment.seed);
    SimulationRecord rec = run_simulation(init, p, spec.solver(), &lp, true);

    if (spec.wants("csv")) {
        const std::string path = out_path(spec, "timeseries.csv");
        CsvWriter csv(path, {"t", "E1", "E2", "scriptE1", "scriptE2", "lyapunov", "wL2", "D_cum", "R1_vw", "R2_vw",
                             "M", "M0"});
        double m0 = 0.0;
        for (std::size_t i = 0; i < rec.series.size(); ++i) {
            const auto& r = rec.series[i];
            m0 = std::max(m0, std::pow(1.0 + r.t, 3.0 * dim / 8.0) * r.v_inf);
            csv.row({r.t, r.E1, r.E2, r.scriptE1, r.scriptE2, r.lyapunov, std::sqrt(r.w_l2_sq), r.dissipation_D_cum,
                     r.r1_terms.at(PhiTag::v_plus_tau_w), r.r2_terms.at(PhiTag::v_plus_tau_w), rec.M[i], m0});
        }
        res.outputs.push_back(path);
    }
    if (spec.wants("checkpoint")) {
        const std::string path = out_path(spec, "final.jmgt1");
        write_checkpoint(path, rec.result.final_state, p);
        res.outputs.push_back(path);
    }
    if (spec.wants("svg")) {
        PlotSeries e1{"E1", {}, {}}, e2{"E2", {}, {}}, m{"M", {}, {}};
        for (std::size_t i = 0; i < rec.series.size(); ++i) {
            e1.x.push_back(rec.series[i].t);
            e1.y.push_back(rec.series[i].E1);
            e2.x.push_back(rec.series[i].t);
            e2.y.push_back(rec.series[i].E2);
            m.x.push_back(rec.series[i].t);
            m.y.push_back(rec.M[i]);
        }
        const std::string path = out_path(spec, "energies.svg");
        write_svg_loglog(path, "energies", {e1, e2, m});
        res.outputs.push_back(path);
    }
    if (rec.result.blew_up) {
        res.exit_code = kExitBlowUp;
        res.message = rec.result.message;
    } else if (!rec.violations.empty()) {
        res.exit_code = kExitInvariant;
        res.message = rec.violations.front();
    } else {
        res.message = "completed " + std::to_string(rec.result.steps) + " steps";
    }
    return res;
}

// ---------------------------------------------------------------- symbol

SymbolOutcome run_symbol(const RunSpec& spec) {
    const PhysicalParams p = spec.params();
    const auto& sy = spec.symbol;
    SymbolOutcome out;
    out.spectrum = gaussian_U_spectrum(sy.n, p, static_cast<std::size_t>(sy.nodes), sy.xi_min, sy.xi_max);
    try {
        check_spectrum_coverage(out.spectrum, p);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("symbol: ") + e.what());
    }
    const auto steps = static_cast<std::size_t>(std::llround(sy.t_end / sy.dt_out));
    std::vector<double> t_out(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) t_out[i] = static_cast<double>(i) * sy.dt_out;
    out.rows = radial_decay(out.spectrum, p, t_out);
    std::vector<double> t;
    for (const auto& r : out.rows) t.push_back(r.t);
    const std::pair<const char*, double RadialNorms::*> series[] = {{"U", &RadialNorms::normU_j0},
                                                                    {"gradU", &RadialNorms::normU_j1},
                                                                    {"w", &RadialNorms::normW},
                                                                    {"v", &RadialNorms::normV},
                                                                    {"v_origin", &RadialNorms::v_origin}};
    for (const auto& [id, f] : series) {
        try {
            out.fits.push_back(decay_fit(t, column(out.rows, f), sy.fit_lo, sy.fit_hi, id));
        } catch (const std::invalid_argument&) {
            DecayFit bad;
            bad.t_lo = sy.fit_lo;
            bad.t_hi = sy.fit_hi;
            bad.slope = bad.intercept = bad.r2 = kNaN;
            bad.series_id = id;
            out.fits.push_back(bad);
        }
    }
    return out;
}

CommandResult cmd_symbol(const RunSpec& spec) {
    CommandResult res;
    SymbolOutcome o = run_symbol(spec);
    if (spec.wants("csv")) {
        const std::string decay = out_path(spec, "decay.csv");
        CsvWriter csv(decay, {"t", "normU_j0", "normU_j1", "normW", "normV", "v_origin"});
        for (const auto& r : o.rows) csv.row({r.t, r.normU_j0, r.normU_j1, r.normW, r.normV, r.v_origin});
        const std::string fits = out_path(spec, "fits.csv");
        CsvWriter fc(fits, {"series", "t_lo", "t_hi", "slope", "intercept", "r2", "points"});
        for (const auto& f : o.fits)
            fc.row_text({f.series_id, format_f64(f.t_lo), format_f64(f.t_hi), format_f64(f.slope),
                         format_f64(f.intercept), format_f64(f.r2), std::to_string(f.points)});
        res.outputs.push_back(decay);
        res.outputs.push_back(fits);
    }
    if (spec.wants("svg")) {
        std::vector<PlotSeries> ps = {{"|U|", {}, {}}, {"|grad U|", {}, {}}, {"|w|", {}, {}}, {"|v|", {}, {}}};
        for (const auto& r : o.rows) {
            const double y[4] = {r.normU_j0, r.normU_j1, r.normW, r.normV};
            for (int k = 0; k < 4; ++k) {
                ps[k].x.push_back(r.t);
                ps[k].y.push_back(y[k]);
            }
        }
        const std::string path = out_path(spec, "decay.svg");
        write_svg_loglog(path, "radial decay", ps);
        res.outputs.push_back(path);
    }
    res.message = "symbol run with " + std::to_string(o.spectrum.xi.size()) + " radial nodes";
    return res;
}

// ---------------------------------------------------------------- verify-energy

bool VerifyReport::all_passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.passed; });
}

double max_identity_residual(const std::vector<EnergyReport>& series, int order, const PhysicalParams& p,
                             double dissipation_sign) {
    double res = 0.0, scale = 0.0;
    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
        IdentityResidual r = energy_identity_residual(series, series[i].t, order, p, dissipation_sign);
        res = std::max(res, r.residual);
        scale = std::max(scale, std::abs(r.rhs));
    }
    return scale > 0.0 ? res / scale : res;
}

VerifyReport run_verify_energy(const RunSpec& spec) {
    VerifyReport rep;
    const PhysicalParams p = spec.params();
    const double sign = spec.verify.corrupt_dissipation ? -1.0 : 1.0;

    // short trajectory, sampled every step for the centered differences
    StateVector init = initial_state_for(spec, p);
    SolverConfig cfg = spec.solver();
    cfg.monitor_stride = 1;
    SimulationRecord rec = run_simulation(init, p, cfg, nullptr, false);
    const double tol_id = p.k == 0.0 ? 1e-5 : 1e-3;
    if (rec.result.blew_up) {
        rep.rows.push_back({"trajectory", rec.result.blowup_time, 0.0, false, rec.result.message});
    } else if (rec.series.size() >= 3) {
        for (int order = 1; order <= 2; ++order) {
            double r = max_identity_residual(rec.series, order, p, sign);
            rep.rows.push_back({"identity_E" + std::to_string(order), r, tol_id, r < tol_id,
                                "max relative residual of dE/dt against dissipation and R terms"});
        }
    } else {
        rep.rows.push_back({"trajectory", 0.0, 0.0, false, "fewer than 3 samples"});
    }
    rep.rows.push_back({"invariants", static_cast<double>(rec.violations.size()), 0.0, rec.violations.empty(),
                        rec.violations.empty() ? "" : rec.violations.front()});

    // random admissible states
    GridPtr small = make_grid(spec.grid.dim, 16, spec.grid.box_length);
    std::vector<StateVector> states;
    for (int i = 0; i < spec.verify.samples; ++i)
        states.push_back(random_state(small, p, spec.experiment.seed + static_cast<std::uint64_t>(i)));
    rep.constants = calibrate_constants(p, states);
    rep.lp = select_lyapunov_params(p, rep.constants);
    double lo[3], hi[3];
    std::fill(lo, lo + 3, std::numeric_limits<double>::infinity());
    std::fill(hi, hi + 3, -std::numeric_limits<double>::infinity());
    for (const auto& s : states) {
        ReportOptions opt;
        opt.r_terms = false;
        opt.v_inf = false;
        opt.lp = rep.lp.feasible ? &rep.lp : nullptr;
        EnergyReport r = energy_report(s, p, opt);
        const double q[3] = {r.E1 / r.scriptE1, r.E2 / r.scriptE2,
                             rep.lp.feasible ? r.lyapunov / (r.scriptE1 + r.scriptE2 + r.w_l2_sq) : kNaN};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], q[a]);
            hi[a] = std::max(hi[a], q[a]);
        }
    }
    const char* names[3] = {"ratio_E1", "ratio_E2", "ratio_lyapunov"};
    for (int a = 0; a < 3; ++a) {
        const bool ok = std::isfinite(lo[a]) && std::isfinite(hi[a]) && lo[a] > 0.0;
        rep.rows.push_back({std::string(names[a]) + "_min", lo[a], 0.0, ok, "must be strictly positive"});
        rep.rows.push_back({std::string(names[a]) + "_max", hi[a], 0.0, ok, "must be finite"});
    }
    for (const auto& e : check_lyapunov_chain(rep.lp, p, rep.constants))
        rep.rows.push_back({"lyapunov_" + e.name, e.passed ? 1.0 : 0.0, 0.0, e.passed, e.detail});

    // no memory: E1 against its closed form on a single cosine mode
    {
        PhysicalParams p0 = make_params(p.tau, p.c, p.delta, 0.0, 0.0, p.kernel.tau_k, p.alpha, true);
        GridPtr g = make_grid(spec.grid.dim, 8, spec.grid.box_length);
        SingleModeProfile sm;
        const std::array<int, 3> mode{1, spec.grid.dim > 1 ? 2 : 0, 0};
        sm.mode = mode;
        sm.a0 = 0.7;
        sm.a1 = -0.3;
        sm.a2 = 1.1;
        sm.real = true;
        HistoryOptions h;
        h.mode = MemoryMode::closed;
        StateVector s = initial_state(g, sm, p0, h);
        double xi2 = 0.0;
        for (int a = 0; a < g->dim(); ++a) {
            const double k = 2.0 * std::numbers::pi * mode[a] / g->length(a);
            xi2 += k * k;
        }
        const double half_v = 0.5 * g->volume();
        const double a = 0.7 + p0.tau * -0.3, B = -0.3 + p0.tau * 1.1;
        const double exact = 0.5 * (p0.c * p0.c * xi2 * a * a * half_v + p0.tau * p0.delta * xi2 * 0.09 * half_v +
                                    B * B * half_v);
        const double got = E1(s, p0);
        const double rel = std::abs(got - exact) / exact;
        rep.rows.push_back({"closed_form_E1_no_memory", rel, 1e-12, rel < 1e-12, "single cosine mode"});
    }
    rep.rows.push_back({"constant_C", rep.constants.C, 0.0, std::isfinite(rep.constants.C), "empirical"});
    rep.rows.push_back({"constant_eta_ratio", rep.constants.eta_ratio, 0.0, std::isfinite(rep.constants.eta_ratio),
                        "empirical"});
    return rep;
}

CommandResult cmd_verify_energy(const RunSpec& spec) {
    CommandResult res;
    VerifyReport rep = run_verify_energy(spec);
    const std::string path = out_path(spec, "verify.csv");
    CsvWriter csv(path, {"check", "value", "tolerance", "passed", "detail"});
    for (const auto& r : rep.rows) {
        std::string detail = r.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        csv.row_text({r.check, format_f64(r.value), format_f64(r.tolerance), r.passed ? "true" : "false", detail});
    }
    res.outputs.push_back(path);
    std::size_t failed = 0;
    for (const auto& r : rep.rows) failed += r.passed ? 0 : 1;
    if (failed) {
        res.exit_code = kExitInvariant;
        res.message = std::to_string(failed) + " verification checks failed";
    } else {
        res.message = "all " + std::to_string(rep.rows.size()) + " verification checks passed";
    }
    return res;
}

// ---------------------------------------------------------------- scan-smallness

namespace {

RunSpec with_amplitude(const RunSpec& spec, double a) {
    RunSpec s = spec;
    const double ref = spec.experiment.amplitude != 0.0 ? spec.experiment.amplitude : 1.0;
    s.experiment.amplitude = a;
    s.experiment.velocity_amplitude = spec.experiment.velocity_amplitude * a / ref;
    s.experiment.accel_amplitude = spec.experiment.accel_amplitude * a / ref;
    s.time.resume_from.clear();
    return s;
}

std::vector<double> triple_norm(const std::vector<EnergyReport>& series) {
    std::vector<double> out;
    for (const auto& r : series) out.push_back(r.seminorm_E + std::sqrt(std::max(0.0, r.dissipation_D_cum)));
    return out;
}

}  // namespace

double linear_response_constant(const RunSpec& spec, const PhysicalParams& p) {
    PhysicalParams lin = p;
    lin.k = 0.0;
    const double a = spec.scan.amp_max > 0.0 ? spec.scan.amp_max : 1.0;
    StateVector init = initial_state_for(with_amplitude(spec, a), lin);
    const double n0 = energy_norm(init, lin);
    if (!(n0 > 0.0)) return 1.0;
    SimulationRecord rec = run_simulation(init, lin, spec.solver(), nullptr, false);
    auto tr = triple_norm(rec.series);
    return *std::max_element(tr.begin(), tr.end()) / n0;
}

ScanRun scan_single(const RunSpec& spec, const PhysicalParams& p, double amplitude, double C0) {
    ScanRun run;
    run.amplitude = amplitude;
    StateVector init = initial_state_for(with_amplitude(spec, amplitude), p);
    run.norm0 = energy_norm(init, p);
    SimulationRecord rec = run_simulation(init, p, spec.solver(), nullptr, false);
    for (const auto& r : rec.series) run.t.push_back(r.t);
    run.M = rec.M;
    run.triple = triple_norm(rec.series);
    run.sup_norm = rec.series.empty() ? 0.0 : rec.series.back().seminorm_E;
    const double t_end = spec.time.t_end;
    run.M_end = run.M.empty() ? 0.0 : run.M.back();
    run.M_tenth = 0.0;
    for (std::size_t i = 0; i < run.t.size() && run.t[i] <= 0.1 * t_end * (1 + 1e-12); ++i) run.M_tenth = run.M[i];

    const bool growing = run.M_end > spec.scan.growth_factor * run.M_tenth;
    const bool within = run.sup_norm <= spec.scan.bound_factor * run.norm0;
    if (rec.result.blew_up) run.verdict = "blow-up";
    else if (!growing && within) run.verdict = "bounded";
    else run.verdict = "growing";

    const double kappa = spec.scan.kappa;
    run.C1 = C0 * run.norm0;
    run.C2 = 0.0;
    for (double m : run.triple)
        if (m > 0.0) run.C2 = std::max(run.C2, (m - run.C1) / std::pow(m, kappa));
    run.bootstrap = bootstrap_check(run.triple, run.C1, run.C2, kappa);
    if (run.norm0 == 0.0) {
        run.bootstrap.initial = run.bootstrap.hypothesis = run.bootstrap.conclusion = true;
        run.bootstrap.smallness = true;
    }
    return run;
}

ScanResult run_scan(const RunSpec& spec) {
    ScanResult out;
    const PhysicalParams p = spec.params();
    const auto& sc = spec.scan;
    if (sc.amp_max == 0.0) {
        out.C0 = 1.0;
        out.runs.push_back(scan_single(spec, p, 0.0, out.C0));
        return out;
    }
    out.C0 = linear_response_constant(spec, p);
    std::vector<double> ladder;
    for (double a = sc.amp_min; a <= sc.amp_max * (1 + 1e-12); a *= sc.ladder_factor) ladder.push_back(a);
    if (ladder.back() < sc.amp_max * (1 - 1e-12)) ladder.push_back(sc.amp_max);

    bool have_bad = false;
    bool have_ok = false;
    for (double a : ladder) {
        ScanRun r = scan_single(spec, p, a, out.C0);
        const bool ok = r.verdict == "bounded";
        out.runs.push_back(std::move(r));
        if (ok && !have_bad) {
            out.a_ok = a;
            have_ok = true;
        } else if (!ok && !have_bad) {
            out.a_bad = a;
            have_bad = true;
        }
    }
    out.bracketed = have_ok && have_bad;
    if (out.bracketed) {
        for (int i = 0; i < sc.bisect_steps; ++i) {
            const double mid = std::sqrt(out.a_ok * out.a_bad);
            ScanRun r = scan_single(spec, p, mid, out.C0);
            if (r.verdict == "bounded") out.a_ok = mid;
            else out.a_bad = mid;
            out.runs.push_back(std::move(r));
        }
    }
    std::stable_sort(out.runs.begin(), out.runs.end(),
                     [](const ScanRun& a, const ScanRun& b) { return a.amplitude < b.amplitude; });
    return out;
}

CommandResult cmd_scan_smallness(const RunSpec& spec) {
    CommandResult res;
    if (spec.scan.amp_max > 0.0 && !(spec.scan.amp_min > 0.0))
        throw ConfigError("scan: amplitude range too narrow to bracket (amp_min must be positive)");
    ScanResult sr = run_scan(spec);
    const std::string path = out_path(spec, "scan.csv");
    CsvWriter csv(path, {"amplitude", "verdict", "norm0", "sup_norm", "M_tenth", "M_end", "C1", "C2", "product",
                         "threshold", "bootstrap"});
    for (const auto& r : sr.runs)
        csv.row_text({format_f64(r.amplitude), r.verdict, format_f64(r.norm0), format_f64(r.sup_norm),
                      format_f64(r.M_tenth), format_f64(r.M_end), format_f64(r.C1), format_f64(r.C2),
                      format_f64(r.bootstrap.product), format_f64(r.bootstrap.threshold),
                      r.bootstrap.passed() ? "pass" : "fail"});
    const std::string bpath = out_path(spec, "bracket.csv");
    CsvWriter bc(bpath, {"bracketed", "a_ok", "a_bad", "C0"});
    bc.row_text({sr.bracketed ? "true" : "false", format_f64(sr.a_ok), format_f64(sr.a_bad), format_f64(sr.C0)});
    const std::string mpath = out_path(spec, "scan_series.csv");
    CsvWriter mc(mpath, {"amplitude", "t", "M", "triple"});
    for (const auto& r : sr.runs)
        for (std::size_t i = 0; i < r.t.size(); ++i) mc.row({r.amplitude, r.t[i], r.M[i], r.triple[i]});
    res.outputs = {path, bpath, mpath};
    if (spec.wants("svg")) {
        std::vector<PlotSeries> ps;
        for (const auto& r : sr.runs) ps.push_back({"a=" + format_f64(r.amplitude).substr(0, 8), r.t, r.M});
        const std::string svg = out_path(spec, "scan.svg");
        write_svg_loglog(svg, "monitor M per amplitude", ps);
        res.outputs.push_back(svg);
    }
    if (sr.runs.size() > 1 && !sr.bracketed) {
        res.exit_code = kExitConfig;
        res.message = "amplitude range too narrow to bracket";
    } else {
        res.message = sr.bracketed ? "bracket [" + format_f64(sr.a_ok) + ", " + format_f64(sr.a_bad) + "]"
                                   : "single amplitude run";
    }
    return res;
}

// ---------------------------------------------------------------- convergence

std::vector<ConvergenceRow> run_convergence(const RunSpec& spec) {
    const PhysicalParams p = spec.params();
    const int L = spec.convergence.levels;
    std::vector<ConvergenceRow> rows;
    auto fill_orders = [&](std::size_t first) {
        for (std::size_t i = first; i < rows.size(); ++i) {
            rows[i].order = i + 1 < rows.size() && rows[i + 1].error > 0.0 && rows[i].error > 0.0
                                ? std::log2(rows[i].error / rows[i + 1].error)
                                : kNaN;
        }
    };
    const std::string& kind = spec.convergence.kind;
    if (kind == "time" || kind == "both") {
        std::vector<StateVector> finals;
        for (int i = 0; i <= L; ++i) {
            RunSpec s = spec;
            s.time.dt = spec.time.dt / std::ldexp(1.0, i);
            SolverConfig cfg = s.solver();
            cfg.monitor_stride = std::numeric_limits<std::size_t>::max();
            SolveResult r = solve(initial_state_for(s, p), p, cfg);
            if (r.blew_up) throw BlowUpError("convergence run blew up: " + r.message, r.blowup_time);
            finals.push_back(std::move(r.final_state));
        }
        const std::size_t first = rows.size();
        for (int i = 0; i < L; ++i)
            rows.push_back({"time", i, spec.time.dt / std::ldexp(1.0, i), state_distance(finals[i], finals[L]), 0.0});
        fill_orders(first);
    }
    if (kind == "space" || kind == "both") {
        const double finest = std::pow(static_cast<double>(spec.grid.points) * std::ldexp(1.0, L), spec.grid.dim);
        if (finest > 4.2e6) throw ConfigError("convergence: finest grid exceeds 2^22 points; reduce levels or points");
        std::vector<StateVector> finals;
        for (int i = 0; i <= L; ++i) {
            RunSpec s = spec;
            s.grid.points = spec.grid.points << i;
            SolverConfig cfg = s.solver();
            cfg.monitor_stride = std::numeric_limits<std::size_t>::max();
            SolveResult r = solve(initial_state_for(s, p), p, cfg);
            if (r.blew_up) throw BlowUpError("convergence run blew up: " + r.message, r.blowup_time);
            finals.push_back(std::move(r.final_state));
        }
        const GridPtr& fine = finals[L].grid();
        const std::size_t first = rows.size();
        for (int i = 0; i < L; ++i) {
            const auto& a = finals[i];
            const auto& b = finals[L];
            const double e = std::sqrt(l2_diff(project_to(a.psi, fine), b.psi) + l2_diff(project_to(a.v, fine), b.v) +
                                       l2_diff(project_to(a.w, fine), b.w));
            rows.push_back({"space", i, spec.grid.box_length / (spec.grid.points << i), e, 0.0});
        }
        fill_orders(first);
    }
    return rows;
}

CommandResult cmd_convergence(const RunSpec& spec) {
    CommandResult res;
    auto rows = run_convergence(spec);
    const std::string path = out_path(spec, "convergence.csv");
    CsvWriter csv(path, {"kind", "level", "h", "error", "order"});
    for (const auto& r : rows)
        csv.row_text({r.kind, std::to_string(r.level), format_f64(r.h), format_f64(r.error), format_f64(r.order)});
    res.outputs.push_back(path);
    res.message = "convergence table with " + std::to_string(rows.size()) + " rows";
    return res;
}

// ---------------------------------------------------------------- dispatch

CommandResult run_command(const std::string& command, const RunSpec& spec_in) {
    RunSpec spec = spec_in;
    spec.experiment.kind = command;
    const auto start = std::chrono::steady_clock::now();
    CommandResult res;
    try {
        validate(spec);
        ensure_directory(spec.output.directory);
        if (command == "simulate") res = cmd_simulate(spec);
        else if (command == "symbol") res = cmd_symbol(spec);
        else if (command == "verify-energy") res = cmd_verify_energy(spec);
        else if (command == "scan-smallness") res = cmd_scan_smallness(spec);
        else if (command == "convergence") res = cmd_convergence(spec);
        else throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        res.exit_code = kExitConfig;
        res.message = e.what();
    } catch (const ParamError& e) {
        res.exit_code = kExitConfig;
        res.message = e.what();
    } catch (const CheckpointError& e) {
        res.exit_code = kExitConfig;
        res.message = e.what();
    } catch (const BlowUpError& e) {
        res.exit_code = kExitBlowUp;
        res.message = e.what();
    }
    if (res.exit_code != kExitConfig || std::filesystem::is_directory(spec.output.directory)) {
        ManifestInfo m;
        m.command = command;
        m.config_text = dump_config(spec);
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        m.outputs = res.outputs;
        m.extra = {{"exit_code", std::to_string(res.exit_code)}, {"message", res.message}};
        write_manifest(spec.output.directory, m);
    }
    return res;
}

}  // namespace jmgt
