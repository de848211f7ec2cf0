#pragma once

// Picard iteration to the fixed point of the gap operator, location of the
// transition temperature, and assembly of the gap surface u0(T, x) on
// [tau, T_c] x [epsilon, hbar*omega_D].

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bcsgap/errors.hpp"
#include "bcsgap/gap_operator.hpp"
#include "bcsgap/io.hpp"
#include "bcsgap/simple_gap.hpp"

namespace bcsgap {

struct SolveTrace {
    std::vector<double> differences;  // ||u_{n+1} - u_n||
    double final_residual = 0.0;      // ||u - A u|| of the returned field
    std::size_t iterations = 0;
    double asymptotic_ratio = 0.0;    // geometric-mean ratio over the last rate_window iterations
    double alpha_used = 0.0;          // contraction constant behind the stopping rule
    bool certified = false;

    /// Ratios d_{n+1}/d_n over the trace.
    std::vector<double> ratios() const {
        std::vector<double> r;
        for (std::size_t i = 1; i < differences.size(); ++i)
            if (differences[i - 1] > 0.0) r.push_back(differences[i] / differences[i - 1]);
        return r;
    }
};

struct PicardOptions {
    double tol = 1e-12;
    std::size_t max_iter = 5'000'000;
    /// Certified contraction constant in (0, 1). Without one the stopping rule
    /// uses the observed rate of the run itself.
    std::optional<double> alpha;
    /// Starting field; defaults to Delta_2(T) * 1.
    std::optional<std::vector<double>> initial;
    /// Iterations over which the empirical rate is averaged.
    std::size_t rate_window = 32;
};

struct PicardResult {
    GapField field;
    SolveTrace trace;
};

/// Iterates u_{n+1} = A u_n until the contraction a-posteriori bound
/// alpha/(1 - alpha) ||u_{n+1} - u_n|| drops to tol.
///
/// If the linearization at zero has Perron root <= 1 the only nonnegative
/// fixed point is u = 0 (T >= T_c), which is returned directly.
inline PicardResult picard_solve(double temperature, const GapOperator& op, const Envelope& envelope,
                                 const PicardOptions& opt = {}) {
    if (!(temperature > 0.0)) throw DomainError("picard_solve: temperature must be > 0");
    if (opt.alpha && !(*opt.alpha > 0.0 && *opt.alpha < 1.0))
        throw InvalidParameter("alpha", "certified alpha must lie in (0, 1)");
    const std::size_t n = op.size();

    PicardResult res;
    res.field.temperature = temperature;
    res.trace.certified = opt.alpha.has_value();
    res.trace.alpha_used = opt.alpha.value_or(0.0);

    if (op.spectral_radius(temperature).radius <= 1.0 + 1e-12) {
        res.field.values.assign(n, 0.0);
        return res;
    }

    std::vector<double> cur = opt.initial ? *opt.initial : std::vector<double>(n, envelope.delta2(temperature));
    if (cur.size() != n) throw InvalidParameter("picard_solve", "initial field length does not match the grid");
    std::vector<double> next(n), scratch;
    std::vector<double> recent;  // last differences above the round-off floor
    double alpha = opt.alpha.value_or(1.0);
    // geometric-mean rate over the window; far less noisy than single ratios
    auto observed_rate = [&] {
        if (recent.size() < 2) return 1.0;
        return std::pow(recent.back() / recent.front(), 1.0 / static_cast<double>(recent.size() - 1));
    };

    bool converged = false;
    for (std::size_t it = 1; it <= opt.max_iter && !converged; ++it) {
        op.apply(cur, temperature, next, scratch);
        const double d = sup_distance(next, cur);
        res.trace.differences.push_back(d);
        std::swap(cur, next);
        // below this the differences are round-off and carry no rate information
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * GapField{0.0, cur}.sup();
        if (d <= noise) {
            if (!opt.alpha && recent.size() >= 2) alpha = std::min(alpha, observed_rate());
            res.trace.alpha_used = alpha;
            if (d == 0.0 || (alpha < 1.0 && alpha / (1.0 - alpha) * d <= opt.tol)) {
                converged = true;
                break;
            }
            throw ConvergenceError("picard_solve: stalled at round-off before reaching tol at T = " +
                                       std::to_string(temperature),
                                   alpha);
        }
        recent.push_back(d);
        if (recent.size() > opt.rate_window + 1) recent.erase(recent.begin());

        if (!opt.alpha) {
            if (recent.size() <= opt.rate_window) continue;
            const double a = observed_rate();
            if (!(a < 1.0)) continue;
            alpha = a;
        }
        res.trace.alpha_used = alpha;
        converged = d <= opt.tol * (1.0 - alpha) / alpha;
    }
    if (!converged) {
        const double ratio = observed_rate();
        std::ostringstream os;
        os.precision(6);
        os << "picard_solve: no convergence after " << opt.max_iter << " iterations at T = " << temperature
           << " (observed ratio " << ratio << ")";
        throw ConvergenceError(os.str(), ratio);
    }

    res.trace.iterations = res.trace.differences.size();
    res.trace.asymptotic_ratio = observed_rate();
    op.apply(cur, temperature, next, scratch);
    res.trace.final_residual = sup_distance(cur, next);
    res.field.values = std::move(cur);
    return res;
}

// ---------------------------------------------------------------------------

struct CriticalTemperature {
    double t_c = 0.0;
    double bracket_lo = 0.0;  // tau_1
    double bracket_hi = 0.0;  // tau_2
    double radius_at_lo = 0.0;
    double radius_at_hi = 0.0;
    std::size_t bisection_steps = 0;
    std::vector<double> eigenvector;  // Perron vector at T_c
};

/// Bisection on the Perron root lambda(T) = 1 inside [tau_1, tau_2].
inline CriticalTemperature critical_temperature(const GapOperator& op, const Envelope& envelope) {
    CriticalTemperature ct;
    double lo = envelope.lower().tau();
    double hi = envelope.upper().tau();
    ct.bracket_lo = lo;
    ct.bracket_hi = hi;
    auto lo_r = op.spectral_radius(lo);
    auto hi_r = op.spectral_radius(hi);
    ct.radius_at_lo = lo_r.radius;
    ct.radius_at_hi = hi_r.radius;
    if (lo_r.radius < 1.0 || hi_r.radius > 1.0) {
        std::ostringstream os;
        os.precision(17);
        os << "critical_temperature: bracket failure, lambda(tau_1) = " << lo_r.radius
           << ", lambda(tau_2) = " << hi_r.radius << "; the potential violates U_1 < U < U_2";
        throw InvariantViolation(os.str());
    }
    std::vector<double> vec = lo_r.eigenvector;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        auto r = op.spectral_radius(mid, vec);
        vec = r.eigenvector;
        (r.radius >= 1.0 ? lo : hi) = mid;
        ++ct.bisection_steps;
    }
    auto rl = op.spectral_radius(lo, vec);
    auto rh = op.spectral_radius(hi, vec);
    if (std::abs(rl.radius - 1.0) <= std::abs(rh.radius - 1.0)) {
        ct.t_c = lo;
        ct.eigenvector = std::move(rl.eigenvector);
    } else {
        ct.t_c = hi;
        ct.eigenvector = std::move(rh.eigenvector);
    }
    return ct;
}

/// Consistency of the spectral locator with the vanishing of the solution.
struct CriticalTemperatureCheck {
    double delta = 0.0;
    double sup_below = 0.0;          // sup u at T_c - delta
    double sup_below_quarter = 0.0;  // sup u at T_c - delta/4
    double sqrt_scaling = 0.0;       // sup_below / sup_below_quarter, ~2 for u ~ sqrt(T_c - T)
    double radius_above = 0.0;       // Perron root at T_c + delta
    bool consistent = false;
};

inline CriticalTemperatureCheck check_critical_temperature(const GapOperator& op, const Envelope& envelope,
                                                           double t_c, double relative_delta = 1e-2,
                                                           double tol = 1e-12) {
    CriticalTemperatureCheck c;
    c.delta = relative_delta * t_c;
    PicardOptions opt;
    opt.tol = tol;
    c.sup_below = picard_solve(t_c - c.delta, op, envelope, opt).field.sup();
    c.sup_below_quarter = picard_solve(t_c - 0.25 * c.delta, op, envelope, opt).field.sup();
    c.sqrt_scaling = c.sup_below_quarter > 0.0 ? c.sup_below / c.sup_below_quarter : 0.0;
    c.radius_above = op.spectral_radius(t_c + c.delta).radius;
    c.consistent = c.sup_below > 0.0 && std::abs(c.sqrt_scaling - 2.0) < 0.2 && c.radius_above < 1.0;
    return c;
}

// ---------------------------------------------------------------------------

struct GapSurface {
    std::vector<double> t_nodes;  // increasing, last entry is t_c
    std::vector<double> x_nodes;
    std::vector<double> values;   // row-major: values[i * x_nodes.size() + j] = u0(T_i, x_j)
    double t_c = 0.0;
    double tau = 0.0;
    double certificate_alpha = 0.0;
    bool certified = false;
    std::vector<SolveTrace> traces;  // one per T node below t_c

    std::size_t rows() const noexcept { return t_nodes.size(); }
    std::size_t cols() const noexcept { return x_nodes.size(); }
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols(), cols()}; }
};

struct SurfaceOptions {
    double tau = 0.0;                   // lower end of the temperature range
    std::size_t t_resolution = 24;      // nodes below T_c
    double ratio = 0.7;                 // geometric clustering ratio toward T_c
    double min_gap_fraction = 1e-3;     // smallest T_c - T as a fraction of T_c
    double tol = 1e-12;
    std::size_t max_iter = 5'000'000;
    std::optional<double> alpha;        // certified alpha, if any
    double invariant_tol = 1e-9;
    unsigned threads = 0;               // 0: hardware concurrency
};

/// T_c - delta_i with delta_i = (T_c - tau) r^i, i = 0..N-1. The ratio r is
/// raised above opts.ratio when needed so the last node keeps
/// T_c - T >= min_gap_fraction * T_c.
inline std::vector<double> surface_temperatures(double t_c, const SurfaceOptions& opts) {
    if (!(opts.tau > 0.0 && opts.tau < t_c)) throw InvalidParameter("solver.tau", "requires 0 < tau < T_c");
    if (opts.t_resolution < 2) throw InvalidParameter("solver.t_resolution", "must be >= 2");
    const double d0 = t_c - opts.tau;
    const double floor = opts.min_gap_fraction * t_c;
    double r = opts.ratio;
    const auto n = static_cast<double>(opts.t_resolution - 1);
    if (d0 * std::pow(r, n) < floor) r = std::pow(std::min(1.0, floor / d0), 1.0 / n);
    std::vector<double> t;
    for (std::size_t i = 0; i < opts.t_resolution; ++i) t.push_back(t_c - d0 * std::pow(r, static_cast<double>(i)));
    t.push_back(t_c);
    return t;
}

namespace detail {

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Throws InvariantViolation naming the offending (T, x).
inline void validate_surface(const GapSurface& s, const Envelope& envelope, double tol) {
    auto fail = [&](const char* what, std::size_t i, std::size_t j) {
        std::ostringstream os;
        os.precision(17);
        os << "gap surface " << what << " at (T, x) = (" << s.t_nodes[i] << ", " << s.x_nodes[j] << ")";
        throw InvariantViolation(os.str());
    };
    const std::size_t last = s.rows() - 1;
    for (std::size_t i = 0; i < s.rows(); ++i) {
        const double lo = envelope.delta1(s.t_nodes[i]);
        const double hi = envelope.delta2(s.t_nodes[i]);
        for (std::size_t j = 0; j < s.cols(); ++j) {
            const double u = s(i, j);
            if (!(u >= lo - tol && u <= hi + tol)) fail("leaves the envelope", i, j);
            if (i + 1 < s.rows() && s(i + 1, j) > u + tol) fail("is not monotone in T", i, j);
            if (i == last && u != 0.0) fail("has a nonzero terminal row", i, j);
        }
    }
}

inline GapSurface solve_surface(const GapOperator& op, const Envelope& envelope, double t_c,
                                const SurfaceOptions& opts) {
    GapSurface s;
    s.t_nodes = surface_temperatures(t_c, opts);
    s.x_nodes = op.grid().nodes;
    s.t_c = t_c;
    s.tau = opts.tau;
    s.certified = opts.alpha.has_value();
    const std::size_t n = op.size();
    const std::size_t solved = s.t_nodes.size() - 1;
    s.values.assign(s.t_nodes.size() * n, 0.0);
    s.traces.resize(solved);

    PicardOptions popt;
    popt.tol = opts.tol;
    popt.max_iter = opts.max_iter;
    popt.alpha = opts.alpha;
    detail::parallel_for(solved, opts.threads, [&](std::size_t i) {
        auto r = picard_solve(s.t_nodes[i], op, envelope, popt);
        std::copy(r.field.values.begin(), r.field.values.end(), s.values.begin() + static_cast<std::ptrdiff_t>(i * n));
        s.traces[i] = std::move(r.trace);
    });

    if (opts.alpha) {
        s.certificate_alpha = *opts.alpha;
    } else {
        for (const auto& tr : s.traces) s.certificate_alpha = std::max(s.certificate_alpha, tr.alpha_used);
    }
    validate_surface(s, envelope, opts.invariant_tol);
    return s;
}

inline io::CsvTable surface_csv(const GapSurface& s) {
    io::CsvTable t{"T", "x", "u"};
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) t.row({s.t_nodes[i], s.x_nodes[j], s(i, j)});
    return t;
}

}  // namespace bcsgap
