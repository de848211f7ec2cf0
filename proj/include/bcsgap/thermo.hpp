#pragma once

// Thermodynamics of the solved surface: the potential difference Psi(T), the
// limit functions v = -d(u^2)/dT and w = d^2(u^2)/dT^2 at T_c, the
// specific-heat jump, and the second-order transition checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bcsgap/errors.hpp"
#include "bcsgap/g_function.hpp"
#include "bcsgap/gap_operator.hpp"
#include "bcsgap/io.hpp"
#include "bcsgap/model.hpp"
#include "bcsgap/quadrature.hpp"
#include "bcsgap/solver.hpp"

namespace bcsgap {

// ---------------------------------------------------------------------------
// Psi

/// Psi(T) for the field u on the grid nodes. Uses E - xi = u^2/(E + xi) and
/// ln((1 + e^{-E/T})/(1 + e^{-xi/T})) = log1p(f(xi/T) expm1(-(E - xi)/T)),
/// f the Fermi factor, so nothing cancels or overflows.
inline double psi(double temperature, std::span<const double> u, const PhysicalParams& params,
                  const EnergyGrid& grid) {
    if (u.size() != grid.size()) throw InvalidParameter("psi", "field length does not match the grid");
    if (!(temperature > 0.0)) throw DomainError("psi: temperature must be > 0");
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double xi = grid.nodes[j];
        const double s = u[j] * u[j];
        if (s == 0.0) continue;
        const double e = std::sqrt(xi * xi + s);
        const double gap = s / (e + xi);  // E - xi
        const double t1 = -2.0 * gap;
        const double t2 = s / e * tanh_sat(e / (2.0 * temperature));
        const double t3 = -4.0 * temperature * std::log1p(fermi(xi / temperature) * std::expm1(-gap / temperature));
        acc += grid.weights[j] * (t1 + t2 + t3);
    }
    return params.n0_dos() * acc;
}

inline double psi(const GapField& u, const PhysicalParams& params, const EnergyGrid& grid) {
    return psi(u.temperature, u.values, params, grid);
}

inline std::vector<double> psi_table(const GapSurface& s, const PhysicalParams& params, const EnergyGrid& grid) {
    std::vector<double> out(s.rows());
    for (std::size_t i = 0; i < s.rows(); ++i) out[i] = psi(s.t_nodes[i], s.row(i), params, grid);
    return out;
}

// ---------------------------------------------------------------------------
// finite differences and extrapolation

namespace detail {

/// Fornberg weights for derivatives 0..m at x0 from the stencil xs.
inline std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> xs, std::size_t m) {
    const std::size_t n = xs.size();
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

inline double fd_derivative(double x0, std::span<const double> xs, std::span<const double> ys, std::size_t order) {
    const auto w = fd_weights(x0, xs, order);
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += w[order][i] * ys[i];
    return acc;
}

struct Extrapolated {
    double value = 0.0;
    double error = 0.0;  // |P_k(0) - P_{k-1}(0)|
};

/// Polynomial extrapolation to h = 0 (Neville) from all points, with the
/// change from dropping the point farthest from 0 as the error estimate.
inline Extrapolated extrapolate_to_zero(std::span<const double> h, std::span<const double> y) {
    auto neville = [](std::span<const double> hh, std::span<const double> yy) {
        std::vector<double> p(yy.begin(), yy.end());
        const std::size_t n = p.size();
        for (std::size_t k = 1; k < n; ++k)
            for (std::size_t i = 0; i + k < n; ++i) p[i] = (hh[i + k] * p[i] - hh[i] * p[i + 1]) / (hh[i + k] - hh[i]);
        return p[0];
    };
    if (h.size() < 2) throw InvalidParameter("extrapolate", "needs at least two points");
    // points ordered with the farthest first
    const double full = neville(h, y);
    const double fewer = neville(h.subspan(1), y.subspan(1));
    return {full, std::abs(full - fewer)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// v and w

struct VTable {
    std::vector<double> x_nodes;
    std::vector<double> values;
    std::vector<double> extrapolation_error;
    std::vector<double> fd_values;  // one-sided FD of -d(u^2)/dT at T_c
    std::vector<double> fd_error;
    double max_relative_error = 0.0;
    bool estimators_agree = true;
};

struct WTable {
    std::vector<double> x_nodes;
    std::vector<double> values;  // extrapolated second differences of u^2
    std::vector<double> extrapolation_error;
    std::vector<double> first_estimator;  // -2[s + (T_c - T) ds/dT]/(T_c - T)^2, extrapolated
    double estimator_disagreement = 0.0;  // max relative difference of the two
    bool estimators_agree = true;         // disagreement <= 1e-2
};

struct ExtractOptions {
    std::size_t points = 6;  // nodes nearest T_c used per extrapolation
};

namespace detail {

/// delta_i = T_c - T_i for rows below T_c, nearest-last.
inline std::vector<double> gaps_to_tc(const GapSurface& s) {
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < s.rows(); ++i) d.push_back(s.t_c - s.t_nodes[i]);
    return d;
}

inline void require_resolution(const GapSurface& s, std::size_t points) {
    const auto d = gaps_to_tc(s);
    if (d.size() < std::max<std::size_t>(points + 1, 6) || d.front() / d.back() < 100.0)
        throw DomainError("insufficient near-T_c resolution: need >= 6 nodes below T_c spanning two decades of T_c - T");
}

}  // namespace detail

inline VTable v_table_extract(const GapSurface& s, const ExtractOptions& opt = {}) {
    detail::require_resolution(s, opt.points);
    const auto d = detail::gaps_to_tc(s);
    const std::size_t m = d.size();
    const std::size_t k = opt.points;
    VTable v;
    v.x_nodes = s.x_nodes;
    std::vector<double> h(k), q(k);
    for (std::size_t j = 0; j < s.cols(); ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t r = m - k + i;
            h[i] = d[r];
            q[i] = s(r, j) * s(r, j) / d[r];
        }
        const auto e = detail::extrapolate_to_zero(h, q);
        v.values.push_back(e.value);
        v.extrapolation_error.push_back(e.error);
        v.max_relative_error = std::max(v.max_relative_error, e.error / std::abs(e.value));

        // -ds/dT = ds/d(delta) at delta = 0 from (0, d_{m-1}, d_{m-2}) and the next stencil out
        auto one_sided = [&](std::size_t a) {
            const std::array<double, 3> xs{0.0, d[a], d[a - 1]};
            const std::array<double, 3> ys{0.0, s(a, j) * s(a, j), s(a - 1, j) * s(a - 1, j)};
            return detail::fd_derivative(0.0, xs, ys, 1);
        };
        const double fd = one_sided(m - 1);
        v.fd_values.push_back(fd);
        // O(h^2) stencil: the error is the stencil difference over 1 - (d_{m-1}/d_{m-2})^2
        const double q = d[m - 1] / d[m - 2];
        v.fd_error.push_back(std::abs(fd - one_sided(m - 2)) / (1.0 - q * q));
        if (std::abs(fd - e.value) > v.fd_error.back() + e.error) v.estimators_agree = false;
    }
    return v;
}

inline WTable w_table_extract(const GapSurface& s, const ExtractOptions& opt = {}) {
    detail::require_resolution(s, opt.points);
    const auto d = detail::gaps_to_tc(s);
    const std::size_t m = d.size();
    const std::size_t k = opt.points;
    WTable w;
    w.x_nodes = s.x_nodes;
    std::vector<double> h(k), y(k), h1(k), y1(k);
    for (std::size_t j = 0; j < s.cols(); ++j) {
        auto sq = [&](std::size_t r) { return s(r, j) * s(r, j); };
        // second differences through the zero at T_c: 2 s[0, d_r, d_{r+1}]
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t r = m - k - 1 + i;
            const double a = d[r], b = d[r + 1];
            h[i] = a;
            y[i] = 2.0 * (sq(r) / a - sq(r + 1) / b) / (a - b);
        }
        const auto e2 = detail::extrapolate_to_zero(h, y);
        // first estimator at interior nodes; ds/dT by 3-point FD in T
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t r = m - k - 1 + i;
            const std::array<double, 3> ts{s.t_nodes[r - 1], s.t_nodes[r], s.t_nodes[r + 1]};
            const std::array<double, 3> ys{sq(r - 1), sq(r), sq(r + 1)};
            const double dsdt = detail::fd_derivative(s.t_nodes[r], ts, ys, 1);
            h1[i] = d[r];
            y1[i] = -2.0 * (sq(r) + d[r] * dsdt) / (d[r] * d[r]);
        }
        const auto e1 = detail::extrapolate_to_zero(h1, y1);
        w.values.push_back(e2.value);
        w.extrapolation_error.push_back(e2.error);
        w.first_estimator.push_back(e1.value);
        w.estimator_disagreement =
            std::max(w.estimator_disagreement, std::abs(e1.value - e2.value) / std::max(std::abs(e2.value), 1e-300));
    }
    w.estimators_agree = w.estimator_disagreement <= 1e-2;
    return w;
}

// ---------------------------------------------------------------------------
// F and G self-consistency

/// sup|sqrt(v) - K_{T_c} sqrt(v)| / sup sqrt(v).
inline double f_consistency(std::span<const double> v, double t_c, const GapOperator& op) {
    const std::size_t n = op.size();
    if (v.size() != n) throw InvalidParameter("f_consistency", "v length does not match the grid");
    const auto k = op.kernel_matrix(t_c);
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(v[j] > 0.0)) throw DomainError("f_consistency: v must be positive");
        r[j] = std::sqrt(v[j]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += k(i, j) * r[j];
        num = std::max(num, std::abs(r[i] - acc));
        den = std::max(den, r[i]);
    }
    return num / den;
}

/// G(x_i) on the grid nodes.
inline std::vector<double> g_function_values(std::span<const double> v, std::span<const double> w, double t_c,
                                             const GapOperator& op) {
    const std::size_t n = op.size();
    if (v.size() != n || w.size() != n) throw InvalidParameter("g_consistency", "table length does not match the grid");
    const auto& nodes = op.grid().nodes;
    std::vector<double> a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double eta = nodes[j];
        const double rv = std::sqrt(v[j]);
        const double th = tanh_sat(eta / (2.0 * t_c));
        a[j] = rv / eta * th;
        b[j] = (w[j] / (eta * rv) - 2.0 * v[j] * rv / (eta * eta * eta)) * th +
               rv * sech2(eta / (2.0 * t_c)) * (v[j] / (eta * eta * t_c) + 2.0 / (t_c * t_c));
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        double fa = 0.0, fb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            fa += op.weighted(i, j) * a[j];
            fb += op.weighted(i, j) * b[j];
        }
        g[i] = fa * fb;
    }
    return g;
}

/// sup|w - G| / sup|w|.
inline double g_consistency(std::span<const double> v, std::span<const double> w, double t_c, const GapOperator& op) {
    const auto g = g_function_values(v, w, t_c, op);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        num = std::max(num, std::abs(w[i] - g[i]));
        den = std::max(den, std::abs(w[i]));
    }
    return num / den;
}

// ---------------------------------------------------------------------------
// g and the specific-heat jump

struct GIntegral {
    double value = 0.0;       // int_0^R g + analytic tail -1/(2R^2)
    double truncated = 0.0;   // int_0^R g
    double tail_bound = 0.0;  // |int_R^inf g| <= 1/(2R^2)
    double cutoff = 0.0;      // R
};

/// int_0^inf g. Beyond R the sech^2 part is below e^{-2R} and tanh = 1 to
/// double precision, so the tail is -1/(2R^2).
inline GIntegral g_integral(double cutoff = 1000.0) {
    if (!(cutoff > 1.0)) throw InvalidParameter("g_integral", "cutoff must be > 1");
    const auto head = adaptive_integrate(g_eval, 0.0, 1.0, 8, 10, Grading::uniform, 1e-15, 1e-14);
    const auto tail = adaptive_integrate(g_eval, 1.0, cutoff, 8, 10, Grading::geometric, 1e-15, 1e-14);
    GIntegral r;
    r.cutoff = cutoff;
    r.truncated = head.value + tail.value;
    r.tail_bound = 1.0 / (2.0 * cutoff * cutoff);
    r.value = r.truncated - r.tail_bound;
    return r;
}

namespace detail {

/// int_{eps/2T_c}^{hw/2T_c} v(2 T_c eta)^2 g(eta) d eta on the grid mapped by eta = xi / (2 T_c).
inline double eta_integral(std::span<const double> v, double t_c, const EnergyGrid& grid) {
    if (v.size() != grid.size()) throw InvalidParameter("v table", "length does not match the grid");
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        acc += grid.weights[j] / (2.0 * t_c) * v[j] * v[j] * g_eval(grid.nodes[j] / (2.0 * t_c));
    return acc;
}

}  // namespace detail

struct PsiSecond {
    double form_a = 0.0;  // eta-integral
    double form_b = 0.0;  // xi-integral
};

inline PsiSecond psi_second_at_tc(std::span<const double> v, double t_c, const PhysicalParams& params,
                                  const EnergyGrid& grid) {
    PsiSecond p;
    const double n0 = params.n0_dos();
    p.form_a = n0 / (8.0 * t_c * t_c) * detail::eta_integral(v, t_c, grid);
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double xi = grid.nodes[j];
        const double z = xi / (2.0 * t_c);
        acc += grid.weights[j] * v[j] * v[j] / (xi * xi) * (sech2(z) / (2.0 * t_c) - tanh_sat(z) / xi);
    }
    p.form_b = 0.5 * n0 * acc;
    return p;
}

/// Jump of the specific heat at T_c: -(N_0/(8 T_c)) int v(2 T_c eta)^2 g(eta) d eta.
inline double delta_cv(std::span<const double> v, double t_c, const PhysicalParams& params, const EnergyGrid& grid) {
    return -t_c * psi_second_at_tc(v, t_c, params, grid).form_a;
}

// ---------------------------------------------------------------------------
// entropy and specific heat

struct HeatTables {
    std::vector<double> t_nodes;
    std::vector<double> entropy;        // -dPsi/dT
    std::vector<double> specific_heat;  // -T d^2Psi/dT^2
    double jump = 0.0;                  // specific_heat at T_c from below
};

/// Nonuniform FD: 3-point interior stencils; at the ends one-sided 3-point
/// for the first derivative and 4-point for the second.
inline HeatTables entropy_and_heat(std::span<const double> t, std::span<const double> psi_values) {
    const std::size_t n = t.size();
    if (n < 5 || psi_values.size() != n) throw InvalidParameter("entropy_and_heat", "need >= 5 nodes and matching tables");
    HeatTables h;
    h.t_nodes.assign(t.begin(), t.end());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo1, lo2;
        std::size_t len1 = 3, len2 = 3;
        if (i == 0) {
            lo1 = lo2 = 0;
            len2 = 4;
        } else if (i + 1 == n) {
            lo1 = n - 3;
            lo2 = n - 4;
            len2 = 4;
        } else {
            lo1 = lo2 = i - 1;
        }
        const double d1 = detail::fd_derivative(t[i], t.subspan(lo1, len1), psi_values.subspan(lo1, len1), 1);
        const double d2 = detail::fd_derivative(t[i], t.subspan(lo2, len2), psi_values.subspan(lo2, len2), 2);
        h.entropy.push_back(-d1);
        h.specific_heat.push_back(-t[i] * d2);
    }
    h.jump = h.specific_heat.back();
    return h;
}

// ---------------------------------------------------------------------------
// verdicts

struct ThreeTerms {
    double term1 = 0.0;  //  N0 int v/xi
    double term2 = 0.0;  // -N0 int (v/xi) tanh(xi/2T_c)
    double term3 = 0.0;  // -2 N0 int (v/xi) / (e^{xi/T_c} + 1)
    double relative_sum() const { return std::abs(term1 + term2 + term3) / std::abs(term1); }
};

inline ThreeTerms first_derivative_terms(std::span<const double> v, double t_c, const PhysicalParams& params,
                                         const EnergyGrid& grid) {
    ThreeTerms t;
    const double n0 = params.n0_dos();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double xi = grid.nodes[j];
        const double f = grid.weights[j] * v[j] / xi;
        t.term1 += n0 * f;
        t.term2 -= n0 * f * tanh_sat(xi / (2.0 * t_c));
        t.term3 -= 2.0 * n0 * f * fermi(xi / t_c);
    }
    return t;
}

struct Verdict {
    // (a)
    double psi_at_tc = 0.0;
    std::vector<double> second_derivative_sequence;  // one-sided 4-point, step shrinking
    bool second_derivative_converges = false;
    bool a = false;
    // (b)
    std::vector<double> first_derivative_sequence;  // one-sided 3-point, step shrinking
    std::vector<double> steps;
    double observed_order = 0.0;
    double three_term_residual = 0.0;
    bool b = false;
    // (c)
    double psi_second = 0.0;
    double psi_second_error = 0.0;
    bool c = false;
};

/// Definition of a second-order transition, checked numerically:
/// (a) Psi(T_c) = 0 and the FD second derivative settles as the step shrinks,
/// (b) the FD first derivative at T_c vanishes at order >= 1 and the
///     three limit terms cancel, (c) Psi''(T_c) < 0 beyond its error.
inline Verdict second_order_verdict(std::span<const double> t, std::span<const double> psi_values,
                                    std::span<const double> v, double v_relative_error, double t_c,
                                    const PhysicalParams& params, const EnergyGrid& grid, std::size_t window = 6) {
    Verdict r;
    const std::size_t n = t.size();
    if (n < window + 3) throw InvalidParameter("second_order_verdict", "too few temperature nodes");
    r.psi_at_tc = psi_values[n - 1];

    // stencils (T_c, T_i, T_{i-1}, ...) with T_i walking toward T_c
    for (std::size_t i = n - 1 - window; i + 1 < n; ++i) {
        const std::array<double, 3> t3{t[n - 1], t[i], t[i - 1]};
        const std::array<double, 3> p3{psi_values[n - 1], psi_values[i], psi_values[i - 1]};
        const std::array<double, 4> t4{t[n - 1], t[i], t[i - 1], t[i - 2]};
        const std::array<double, 4> p4{psi_values[n - 1], psi_values[i], psi_values[i - 1], psi_values[i - 2]};
        r.steps.push_back(t_c - t[i]);
        r.first_derivative_sequence.push_back(detail::fd_derivative(t[n - 1], t3, p3, 1));
        r.second_derivative_sequence.push_back(detail::fd_derivative(t[n - 1], t4, p4, 2));
    }

    const auto& d2 = r.second_derivative_sequence;
    const double last_change = std::abs(d2.back() - d2[d2.size() - 2]);
    const double first_change = std::abs(d2[1] - d2[0]);
    r.second_derivative_converges = last_change <= first_change && last_change <= 1e-3 * std::abs(d2.back());
    r.a = r.psi_at_tc == 0.0 && r.second_derivative_converges;

    // least-squares slope of log|D1| against log(step)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
        const double y = std::abs(r.first_derivative_sequence[k]);
        if (y == 0.0) continue;
        const double lx = std::log(r.steps[k]), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++used;
    }
    const double m = static_cast<double>(used);
    r.observed_order = used >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::numeric_limits<double>::infinity();
    const auto terms = first_derivative_terms(v, t_c, params, grid);
    r.three_term_residual = terms.term1 == 0.0 ? 0.0 : terms.relative_sum();
    r.b = r.observed_order >= 1.0 && r.three_term_residual <= 1e-10;

    const auto ps = psi_second_at_tc(v, t_c, params, grid);
    r.psi_second = ps.form_a;
    r.psi_second_error = 2.0 * v_relative_error * std::abs(ps.form_a) + std::abs(ps.form_a - ps.form_b);
    r.c = ps.form_a < 0.0 && std::abs(ps.form_a) > r.psi_second_error;
    return r;
}

// ---------------------------------------------------------------------------
// perturbation bound and cutoff divergence

struct PerturbationBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds() const noexcept { return lhs <= rhs; }
};

/// |Psi(u) - Psi(u_ref)| against 2 N0 Delta_2(0) {(1 + 2 T_c/tau) ln(hw/eps) + alpha} ||u - u_ref||.
inline PerturbationBound psi_perturbation_bound(double temperature, std::span<const double> u,
                                                std::span<const double> u_ref, const PhysicalParams& params,
                                                const EnergyGrid& grid, double delta2_at_zero, double t_c, double tau,
                                                double alpha) {
    PerturbationBound b;
    b.lhs = std::abs(psi(temperature, u, params, grid) - psi(temperature, u_ref, params, grid));
    b.rhs = 2.0 * params.n0_dos() * delta2_at_zero * ((1.0 + 2.0 * t_c / tau) * params.log_span() + alpha) *
            sup_distance(u, u_ref);
    return b;
}

struct CutoffScan {
    std::vector<double> epsilons;
    std::vector<double> log_inverse;  // ln(1/eps)
    std::vector<double> values;       // N0 v int_eps^{hw} dxi/xi
    double slope = 0.0;               // least squares of values against ln(1/eps)
};

inline CutoffScan cutoff_divergence_scan(double v, double n0, double hbar_omega_d, std::span<const double> epsilons) {
    CutoffScan c;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        const double e = epsilons[i];
        if (!(e > 0.0)) throw InvalidParameter("cutoff_divergence_scan", "epsilons must be > 0");
        if (i > 0 && !(e < epsilons[i - 1]))
            throw InvalidParameter("cutoff_divergence_scan", "epsilons must be strictly decreasing");
        double integral = 0.0;
        if (e < hbar_omega_d)
            integral = adaptive_integrate([](double xi) { return 1.0 / xi; }, e, hbar_omega_d, 4, 10,
                                          Grading::geometric, 1e-15, 1e-14)
                           .value;
        c.epsilons.push_back(e);
        c.log_inverse.push_back(-std::log(e));
        c.values.push_back(n0 * v * integral);
    }
    const double m = static_cast<double>(c.values.size());
    if (m >= 2) {
        const double mx = std::accumulate(c.log_inverse.begin(), c.log_inverse.end(), 0.0) / m;
        const double my = std::accumulate(c.values.begin(), c.values.end(), 0.0) / m;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            sxx += (c.log_inverse[i] - mx) * (c.log_inverse[i] - mx);
            sxy += (c.log_inverse[i] - mx) * (c.values[i] - my);
        }
        c.slope = sxy / sxx;
    }
    return c;
}

// ---------------------------------------------------------------------------
// report

struct ThermoReport {
    std::vector<double> t_nodes;
    std::vector<double> psi_values;
    HeatTables heat;
    VTable v_table;
    WTable w_table;
    double t_c = 0.0;
    double alpha = 0.0;
    bool certified = false;
    double delta_cv = 0.0;
    PsiSecond psi_second_tc;
    double f_residual = 0.0;
    double g_residual = 0.0;
    Verdict verdict;

    io::Report summary() const {
        io::Report r;
        r.add("t_c", t_c).add("alpha", alpha).add("certified", certified);
        r.add("delta_cv", delta_cv).add("psi_second_tc", psi_second_tc.form_a);
        r.add("psi_second_tc_form_b", psi_second_tc.form_b);
        r.add("cv_jump_fd", heat.jump);
        r.add("v_max_relative_error", v_table.max_relative_error);
        r.add("f_residual", f_residual).add("g_residual", g_residual);
        r.add("w_estimator_disagreement", w_table.estimator_disagreement);
        r.add("observed_order_dpsi", verdict.observed_order);
        r.add("three_term_residual", verdict.three_term_residual);
        r.add("verdict_a", verdict.a).add("verdict_b", verdict.b).add("verdict_c", verdict.c);
        return r;
    }
};

inline ThermoReport run_thermo(const GapSurface& s, const GapOperator& op, const PhysicalParams& params,
                               const ExtractOptions& opt = {}) {
    const EnergyGrid& grid = op.grid();
    ThermoReport r;
    r.t_nodes = s.t_nodes;
    r.t_c = s.t_c;
    r.alpha = s.certificate_alpha;
    r.certified = s.certified;
    r.psi_values = psi_table(s, params, grid);
    r.heat = entropy_and_heat(r.t_nodes, r.psi_values);
    r.v_table = v_table_extract(s, opt);
    r.w_table = w_table_extract(s, opt);
    for (double x : r.v_table.values)
        if (!(x > 0.0)) throw InvariantViolation("v table has a non-positive value");
    r.psi_second_tc = psi_second_at_tc(r.v_table.values, s.t_c, params, grid);
    r.delta_cv = delta_cv(r.v_table.values, s.t_c, params, grid);
    r.f_residual = f_consistency(r.v_table.values, s.t_c, op);
    r.g_residual = g_consistency(r.v_table.values, r.w_table.values, s.t_c, op);
    r.verdict = second_order_verdict(r.t_nodes, r.psi_values, r.v_table.values, r.v_table.max_relative_error, s.t_c,
                                     params, grid);
    return r;
}

}  // namespace bcsgap
