#pragma once

// The five CLI commands as library calls. Each writes its files under the
// configured output directory and returns the process exit code.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bcsgap/certificate.hpp"
#include "bcsgap/config.hpp"
#include "bcsgap/errors.hpp"
#include "bcsgap/g_function.hpp"
#include "bcsgap/gap_operator.hpp"
#include "bcsgap/io.hpp"
#include "bcsgap/model.hpp"
#include "bcsgap/simple_gap.hpp"
#include "bcsgap/solver.hpp"
#include "bcsgap/thermo.hpp"

namespace bcsgap {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_certificate = 2, exit_convergence = 3, exit_config = 4 };

/// Everything derived from a RunConfig before any solve.
struct Model {
    PhysicalParams params;
    Potential potential;
    EnergyGrid grid;
    GapOperator op;
    Envelope envelope;
    double margin = 0.0;  // 0 when U_1, U_2 came from the config
};

inline PotentialSpec potential_spec(const RunConfig& c) {
    if (c.potential_type == "constant") return ConstantPotential{c.u0};
    if (c.potential_type == "gaussian_bump") return GaussianBumpPotential{c.base, c.amplitude, c.width};
    return read_potential_csv(c.csv);
}

/// Extremes of U over [eps, hw]^2, used for the default coupling bounds.
inline std::pair<double, double> potential_extremes(const PotentialSpec& spec, double eps, double hw) {
    if (const auto* p = std::get_if<ConstantPotential>(&spec)) return {p->u0, p->u0};
    if (const auto* p = std::get_if<GaussianBumpPotential>(&spec)) {
        const double d = (hw - eps) / p->width;
        const double far = p->base + p->amplitude * std::exp(-0.5 * d * d);
        const double near = p->base + p->amplitude;
        return {std::min(far, near), std::max(far, near)};
    }
    const auto& t = std::get<TablePotential>(spec);
    const auto [lo, hi] = std::minmax_element(t.values.begin(), t.values.end());
    return {*lo, *hi};
}

inline std::unique_ptr<Model> build_model(const RunConfig& c) {
    auto spec = potential_spec(c);
    RawParams raw = c.params;
    double margin = 0.0;
    if (!c.u_lower_given || !c.u_upper_given) {
        const auto [lo, hi] = potential_extremes(spec, raw.epsilon_cutoff, raw.hbar_omega_d);
        if (!c.u_lower_given) raw.u_lower = lo * (1.0 - c.margin);
        if (!c.u_upper_given) raw.u_upper = hi * (1.0 + c.margin);
        margin = c.margin;
    }
    const auto params = make_params(raw);
    Potential potential(std::move(spec), params);
    check_potential_bounds(potential, params);
    auto grid = build_grid(params, c.panels, c.order);
    GapOperator op(potential, grid);
    Envelope envelope(params, grid);
    return std::make_unique<Model>(Model{params, std::move(potential), std::move(grid), std::move(op),
                                         std::move(envelope), margin});
}

inline std::filesystem::path out_path(const RunConfig& c, const char* name) {
    return std::filesystem::path(c.output_dir) / name;
}

// ---------------------------------------------------------------------------

inline int cmd_simple(const RunConfig& c) {
    const auto m = build_model(c);
    const auto& lo = m->envelope.lower();
    const auto& hi = m->envelope.upper();
    for (const auto* g : {&lo, &hi}) {
        const auto curve = make_envelope_curve(*g);
        io::CsvTable t{"T", "delta"};
        for (std::size_t i = 0; i < curve.t_nodes.size(); ++i) t.row({curve.t_nodes[i], curve.delta_values[i]});
        t.save(out_path(c, g == &lo ? "envelope_U1.csv" : "envelope_U2.csv"));
    }
    io::Report r;
    r.add("u_lower", m->params.u_lower()).add("u_upper", m->params.u_upper()).add("margin", m->margin);
    r.add("tau_1", lo.tau()).add("tau_2", hi.tau());
    r.add("delta0_1", delta0_closed_form(lo.coupling(), m->params));
    r.add("delta0_2", delta0_closed_form(hi.coupling(), m->params));
    r.add("delta0_1_grid", lo.delta(0.0)).add("delta0_2_grid", hi.delta(0.0));
    r.add("v_1", lo.implicit_slope_v()).add("v_2", hi.implicit_slope_v());
    r.save(out_path(c, "simple_summary.txt"));
    return exit_ok;
}

inline CertificateOptions certificate_options(const RunConfig& c, const Model& m) {
    CertificateOptions o;
    o.tau = c.certificate_tau;
    o.margin = m.margin;
    o.alpha.threads = c.threads;
    return o;
}

inline int cmd_certify(const RunConfig& c) {
    const auto m = build_model(c);
    const auto tc = critical_temperature(m->op, m->envelope);
    const auto cert = search_certificate(m->potential, m->params, m->op, m->envelope, tc.t_c, certificate_options(c, *m));
    cert.report().save(out_path(c, "certificate.txt"));
    return cert.success ? exit_ok : exit_certificate;
}

struct SolveOutcome {
    CriticalTemperature tc;
    CriticalTemperatureCheck check;
    ContractionCertificate certificate;
    GapSurface surface;
};

inline SolveOutcome run_solve(const RunConfig& c, const Model& m) {
    SolveOutcome o;
    o.tc = critical_temperature(m.op, m.envelope);
    o.certificate = search_certificate(m.potential, m.params, m.op, m.envelope, o.tc.t_c, certificate_options(c, m));
    o.check = check_critical_temperature(m.op, m.envelope, o.tc.t_c, 1e-2, c.tol);

    SurfaceOptions so;
    so.tol = c.tol;
    so.max_iter = c.max_iter;
    so.t_resolution = c.t_resolution;
    so.threads = c.threads;
    if (o.certificate.success) {
        so.tau = o.certificate.tau;
        so.alpha = o.certificate.alpha;
    } else {
        so.tau = m.envelope.lower().tau();
    }
    if (c.solver_tau) so.tau = *c.solver_tau;
    o.surface = solve_surface(m.op, m.envelope, o.tc.t_c, so);
    return o;
}

inline void write_solve(const RunConfig& c, const SolveOutcome& o) {
    surface_csv(o.surface).save(out_path(c, "surface.csv"));

    io::CsvTable trace{"T", "iterations", "final_ratio", "alpha_used", "final_residual"};
    for (std::size_t i = 0; i < o.surface.traces.size(); ++i) {
        const auto& t = o.surface.traces[i];
        trace.row({o.surface.t_nodes[i], static_cast<double>(t.iterations), t.asymptotic_ratio, t.alpha_used,
                   t.final_residual});
    }
    trace.save(out_path(c, "trace.csv"));

    io::Report r;
    r.add("t_c", o.tc.t_c).add("tau_1", o.tc.bracket_lo).add("tau_2", o.tc.bracket_hi);
    r.add("radius_at_tau_1", o.tc.radius_at_lo).add("radius_at_tau_2", o.tc.radius_at_hi);
    r.add("check_delta", o.check.delta).add("check_sup_below", o.check.sup_below);
    r.add("check_sqrt_scaling", o.check.sqrt_scaling).add("check_radius_above", o.check.radius_above);
    r.add("check_consistent", o.check.consistent);
    r.add("tau", o.surface.tau).add("alpha", o.surface.certificate_alpha);
    r.add("status", o.surface.certified ? "certified" : "uncertified");
    r.save(out_path(c, "tc.txt"));
}

inline int cmd_solve(const RunConfig& c) {
    const auto m = build_model(c);
    write_solve(c, run_solve(c, *m));
    return exit_ok;
}

inline int cmd_thermo(const RunConfig& c) {
    const auto m = build_model(c);
    const auto o = run_solve(c, *m);
    write_solve(c, o);
    const auto r = run_thermo(o.surface, m->op, m->params);

    io::CsvTable p{"T", "psi"}, s{"T", "entropy"}, h{"T", "specific_heat"};
    for (std::size_t i = 0; i < r.t_nodes.size(); ++i) {
        p.row({r.t_nodes[i], r.psi_values[i]});
        s.row({r.t_nodes[i], r.heat.entropy[i]});
        h.row({r.t_nodes[i], r.heat.specific_heat[i]});
    }
    p.save(out_path(c, "psi.csv"));
    s.save(out_path(c, "entropy.csv"));
    h.save(out_path(c, "heat.csv"));

    io::CsvTable v{"x", "v", "error", "fd_v"}, w{"x", "w", "error", "w_first_estimator"};
    for (std::size_t j = 0; j < r.v_table.values.size(); ++j) {
        v.row({r.v_table.x_nodes[j], r.v_table.values[j], r.v_table.extrapolation_error[j], r.v_table.fd_values[j]});
        w.row({r.w_table.x_nodes[j], r.w_table.values[j], r.w_table.extrapolation_error[j],
               r.w_table.first_estimator[j]});
    }
    v.save(out_path(c, "v.csv"));
    w.save(out_path(c, "w.csv"));

    auto summary = r.summary();
    summary.add("w_estimators_agree", r.w_table.estimators_agree);
    summary.save(out_path(c, "thermo_summary.txt"));
    return exit_ok;
}

inline int cmd_gcheck(const std::filesystem::path& output_dir) {
    io::CsvTable t{"eta", "g"};
    for (int k = 0; k <= 60; ++k) {
        const double eta = std::pow(10.0, -3.0 + 6.0 * k / 60.0);
        t.row({eta, g_eval(eta)});
    }
    t.save(output_dir / "g.csv");
    const auto gi = g_integral();
    io::Report r;
    r.add("g0", g_eval(0.0)).add("integral", gi.value).add("integral_truncated", gi.truncated);
    r.add("cutoff", gi.cutoff).add("tail_bound", gi.tail_bound);
    r.save(output_dir / "g_summary.txt");
    return exit_ok;
}

}  // namespace bcsgap
