#pragma once

// Contraction constant
//
//   alpha = max_{(T, x)} { int U(x, xi) tanh(E2/2T)/E2 dxi
//                          + Delta_2(tau)^2/(2 eps^2) int U(x, xi) tanh(xi/2T)/xi dxi },
//   E2 = sqrt(xi^2 + Delta_2(T)^2),
//
// over [tau, T_c] x [eps, hbar*omega_D], and the scan over tau for alpha < 1.
//
// Note: since k(0) <= k(D^2) + D^2/(2 eps^2) k(0) for the kernel k(s) =
// tanh(sqrt(xi^2 + s)/2T)/sqrt(xi^2 + s), alpha at T = T_c is bounded below by
// the largest row sum of the linearized kernel, which is >= its Perron root = 1.
// The failure report carries that row sum so the obstruction is visible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bcsgap/errors.hpp"
#include "bcsgap/gap_operator.hpp"
#include "bcsgap/io.hpp"
#include "bcsgap/simple_gap.hpp"
#include "bcsgap/solver.hpp"

namespace bcsgap {

struct AlphaTerms {
    double first = 0.0;
    double second = 0.0;
    double total() const noexcept { return first + second; }
};

/// Both integrals at a single (T, x). d2_at_t = Delta_2(T), d2_at_tau = Delta_2(tau).
inline AlphaTerms alpha_terms(double temperature, double x, double d2_at_t, double d2_at_tau,
                              const Potential& potential, const EnergyGrid& grid) {
    const double s = d2_at_t * d2_at_t;
    const double eps = grid.lo;
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double u = potential.value_unchecked(x, grid.nodes[j]) * grid.weights[j];
        a += u * gap_kernel(grid.nodes[j], s, temperature);
        b += u * gap_kernel(grid.nodes[j], 0.0, temperature);
    }
    return {a, d2_at_tau * d2_at_tau / (2.0 * eps * eps) * b};
}

inline double alpha_integrand(double temperature, double x, double tau, const Potential& potential,
                              const Envelope& envelope, const EnergyGrid& grid) {
    if (!(tau > 0.0 && temperature >= tau)) throw DomainError("alpha_integrand: requires 0 < tau <= T");
    if (!(x >= grid.lo && x <= grid.hi)) throw DomainError("alpha_integrand: x outside [epsilon, hbar*omega_D]");
    return alpha_terms(temperature, x, envelope.delta2(temperature), envelope.delta2(tau), potential, grid).total();
}

struct AlphaResult {
    double alpha = 0.0;
    double max_t = 0.0;
    double max_x = 0.0;
    double first_term_max = 0.0;  // max of the first integral over the lattice
};

struct AlphaOptions {
    std::size_t t_samples = 64;
    std::size_t x_samples = 64;
    std::size_t refine_sweeps = 2;
    bool confirm = true;  // 4x finer lattice pass after refinement
    unsigned threads = 0;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline std::vector<double> geomspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(n - 1));
    v.back() = b;
    return v;
}

/// Maximizes f on [a, b] by golden-section search.
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, int steps = 40) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < steps; ++k) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

struct LatticeMax {
    double value = -std::numeric_limits<double>::infinity();
    double first = -std::numeric_limits<double>::infinity();
    std::size_t i = 0, j = 0;
};

inline LatticeMax lattice_max(const std::vector<double>& ts, const std::vector<double>& xs, double d2_at_tau,
                              const Potential& potential, const Envelope& envelope, const EnergyGrid& grid,
                              unsigned threads) {
    std::vector<LatticeMax> per_row(ts.size());
    parallel_for(ts.size(), threads, [&](std::size_t i) {
        const double d2 = envelope.delta2(ts[i]);
        LatticeMax m;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const auto a = alpha_terms(ts[i], xs[j], d2, d2_at_tau, potential, grid);
            m.first = std::max(m.first, a.first);
            if (a.total() > m.value) {
                m.value = a.total();
                m.i = i;
                m.j = j;
            }
        }
        per_row[i] = m;
    });
    LatticeMax best;
    for (const auto& m : per_row) {
        best.first = std::max(best.first, m.first);
        if (m.value > best.value) {
            best.value = m.value;
            best.i = m.i;
            best.j = m.j;
        }
    }
    return best;
}

}  // namespace detail

/// alpha(tau) over [tau, T_c] x [eps, hbar*omega_D]: lattice, golden-section
/// refinement around the lattice maximizer, then a 4x finer confirmation lattice.
inline AlphaResult compute_alpha(double tau, double t_c, const Potential& potential, const Envelope& envelope,
                                 const EnergyGrid& grid, const AlphaOptions& opt = {}) {
    if (!(tau > 0.0)) throw InvalidParameter("certificate.tau", "must be > 0");
    if (!(tau < t_c)) throw InvalidParameter("certificate.tau", "tau must be below T_c (empty interval)");
    if (opt.t_samples < 2 || opt.x_samples < 2) throw InvalidParameter("certificate.samples", "need >= 2 per axis");

    const double d2_tau = envelope.delta2(tau);
    const auto ts = detail::linspace(tau, t_c, opt.t_samples);
    const auto xs = detail::geomspace(grid.lo, grid.hi, opt.x_samples);
    const auto coarse = detail::lattice_max(ts, xs, d2_tau, potential, envelope, grid, opt.threads);

    AlphaResult r{coarse.value, ts[coarse.i], xs[coarse.j], coarse.first};
    auto eval = [&](double t, double x) {
        return alpha_terms(t, x, envelope.delta2(t), d2_tau, potential, grid).total();
    };
    const double t_lo = ts[coarse.i == 0 ? 0 : coarse.i - 1];
    const double t_hi = ts[std::min(coarse.i + 1, ts.size() - 1)];
    const double x_lo = xs[coarse.j == 0 ? 0 : coarse.j - 1];
    const double x_hi = xs[std::min(coarse.j + 1, xs.size() - 1)];
    double t = r.max_t, x = r.max_x;
    for (std::size_t sweep = 0; sweep < opt.refine_sweeps; ++sweep) {
        auto [tb, vt] = detail::golden_max([&](double tt) { return eval(tt, x); }, t_lo, t_hi);
        if (vt > r.alpha) r = {vt, tb, x, r.first_term_max};
        t = r.max_t;
        auto [xb, vx] = detail::golden_max([&](double xx) { return eval(t, xx); }, x_lo, x_hi);
        if (vx > r.alpha) r = {vx, t, xb, r.first_term_max};
        x = r.max_x;
    }

    if (opt.confirm) {
        const auto fine_t = detail::linspace(tau, t_c, 4 * opt.t_samples);
        const auto fine_x = detail::geomspace(grid.lo, grid.hi, 4 * opt.x_samples);
        const auto fine = detail::lattice_max(fine_t, fine_x, d2_tau, potential, envelope, grid, opt.threads);
        r.first_term_max = std::max(r.first_term_max, fine.first);
        if (fine.value > r.alpha) {
            r.alpha = fine.value;
            r.max_t = fine_t[fine.i];
            r.max_x = fine_x[fine.j];
        }
    }
    return r;
}

struct ContractionCertificate {
    bool success = false;
    double tau = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;  // at the returned tau; the best alpha found when !success
    double max_t = 0.0;
    double max_x = 0.0;
    double delta2_at_tau = 0.0;
    double t_c = 0.0;
    double margin = 0.0;  // coupling margin used for U_1, U_2 (0 when user-given)
    // failure diagnostics
    double delta2_tc_over_epsilon = 0.0;
    double row_sum_at_tc = 0.0;  // max_x int U(x, xi) tanh(xi/2T_c)/xi dxi, a lower bound for alpha
    std::size_t tau_candidates = 0;

    io::Report report() const {
        io::Report r;
        r.add("status", success ? "certified" : "failed");
        r.add("tau", tau).add("epsilon", epsilon).add("alpha", alpha);
        r.add("max_T", max_t).add("max_x", max_x).add("delta2_at_tau", delta2_at_tau);
        r.add("t_c", t_c).add("margin", margin);
        if (!success) {
            r.add("best_alpha", alpha).add("best_tau", tau);
            r.add("delta2_tc_over_epsilon", delta2_tc_over_epsilon);
            r.add("row_sum_at_tc", row_sum_at_tc);
            r.add_int("tau_candidates", static_cast<long long>(tau_candidates));
        }
        return r;
    }
};

struct CertificateOptions {
    std::size_t tau_candidates = 16;
    std::optional<double> tau;  // evaluate only this tau
    double margin = 0.0;
    AlphaOptions alpha;
};

/// Largest linearized row sum at T.
inline double max_row_sum(const GapOperator& op, double temperature) {
    const auto k = op.kernel_matrix(temperature);
    double m = 0.0;
    for (std::size_t i = 0; i < k.n; ++i) m = std::max(m, k.row_sum(i));
    return m;
}

/// Scans tau geometrically over (tau_1, T_c) and returns the smallest tau with
/// alpha < 1. Failure is a value carrying the best alpha and its diagnostics.
inline ContractionCertificate search_certificate(const Potential& potential, const PhysicalParams& params,
                                                 const GapOperator& op, const Envelope& envelope, double t_c,
                                                 const CertificateOptions& opt = {}) {
    ContractionCertificate c;
    c.epsilon = params.epsilon_cutoff();
    c.t_c = t_c;
    c.margin = opt.margin;
    const EnergyGrid& grid = op.grid();

    std::vector<double> taus;
    if (opt.tau) {
        if (!(*opt.tau < t_c)) throw InvalidParameter("certificate.tau", "tau must be below T_c (empty interval)");
        taus.push_back(*opt.tau);
    } else {
        const double t1 = envelope.lower().tau();
        const std::size_t k = std::max<std::size_t>(opt.tau_candidates, 1);
        for (std::size_t i = 1; i <= k; ++i)
            taus.push_back(t1 * std::pow(t_c / t1, static_cast<double>(i) / static_cast<double>(k + 1)));
    }
    c.tau_candidates = taus.size();

    AlphaOptions scan = opt.alpha;
    scan.confirm = false;
    double best = std::numeric_limits<double>::infinity();
    double best_tau = taus.front();
    for (double tau : taus) {
        auto a = compute_alpha(tau, t_c, potential, envelope, grid, scan);
        if (a.alpha < 1.0) {
            a = compute_alpha(tau, t_c, potential, envelope, grid, opt.alpha);
            if (a.alpha < 1.0) {
                c.success = true;
                c.tau = tau;
                c.alpha = a.alpha;
                c.max_t = a.max_t;
                c.max_x = a.max_x;
                c.delta2_at_tau = envelope.delta2(tau);
                return c;
            }
        }
        if (a.alpha < best) {
            best = a.alpha;
            best_tau = tau;
        }
    }
    const auto a = compute_alpha(best_tau, t_c, potential, envelope, grid, opt.alpha);
    c.tau = best_tau;
    c.alpha = a.alpha;
    c.max_t = a.max_t;
    c.max_x = a.max_x;
    c.delta2_at_tau = envelope.delta2(best_tau);
    c.delta2_tc_over_epsilon = envelope.delta2(t_c) / c.epsilon;
    c.row_sum_at_tc = max_row_sum(op, t_c);
    return c;
}

}  // namespace bcsgap
