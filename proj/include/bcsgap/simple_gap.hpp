#pragma once

// Constant-potential gap equation
//
//   1 = U * int_eps^{hw} tanh(sqrt(xi^2 + D^2) / 2T) / sqrt(xi^2 + D^2) dxi
//
// on the Nystrom grid: its root temperature tau_U, the gap D(T), the T = 0
// closed form and the slope v = -d(D^2)/dT at tau_U.

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bcsgap/errors.hpp"
#include "bcsgap/g_function.hpp"
#include "bcsgap/model.hpp"
#include "bcsgap/quadrature.hpp"

namespace bcsgap {

/// T = 0 gap for constant coupling U:
///   sqrt((hw - eps e^{1/U}) (hw - eps e^{-1/U})) / sinh(1/U)
inline double delta0_closed_form(double coupling, const PhysicalParams& params) {
    const double hw = params.hbar_omega_d();
    const double eps = params.epsilon_cutoff();
    const double f = closed_form_factor(coupling, hw, eps);
    if (!(f > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "hbar_omega_d - epsilon*exp(1/U) = " << f << " for U = " << coupling;
        throw InvalidParameter("closed_form_validity", os.str());
    }
    return std::sqrt(f * (hw - eps * std::exp(-1.0 / coupling))) / std::sinh(1.0 / coupling);
}

/// Solver for one constant coupling on a fixed grid. Construction locates tau.
class SimpleGap {
public:
    static constexpr int max_bisection_steps = 400;

    SimpleGap(double coupling, const PhysicalParams& params, EnergyGrid grid)
        : u_(coupling), params_(params), grid_(std::move(grid)) {
        if (!(coupling > 0.0)) throw InvalidParameter("coupling", "must be > 0");
        if (!(coupling * params.log_span() > 1.0) || !(linear_row(0.0) > 0.0)) {
            std::ostringstream os;
            os.precision(17);
            os << "U * ln(hbar_omega_d/epsilon) = " << coupling * params.log_span() << " <= 1, no root temperature";
            throw InvalidParameter("tau_existence", os.str());
        }
        tau_ = find_tau();
    }

    double coupling() const noexcept { return u_; }
    double tau() const noexcept { return tau_; }
    const EnergyGrid& grid() const noexcept { return grid_; }
    const PhysicalParams& params() const noexcept { return params_; }

    /// U * int tanh(xi/2T)/xi dxi - 1; strictly decreasing in T.
    double linear_row(double temperature) const {
        return u_ * integrate([&](double xi) { return gap_kernel(xi, 0.0, temperature); }, grid_) - 1.0;
    }

    /// Residual of the gap equation at (T, Delta).
    double residual(double delta, double temperature) const {
        const double s = delta * delta;
        return u_ * integrate([&](double xi) { return gap_kernel(xi, s, temperature); }, grid_) - 1.0;
    }

    double delta0() const { return delta0_closed_form(u_, params_); }

    /// Gap at temperature T; exactly 0 for T >= tau.
    double delta(double temperature) const {
        if (!(temperature >= 0.0)) throw DomainError("SimpleGap::delta: temperature must be >= 0");
        if (temperature >= tau_) return 0.0;
        double lo = 0.0;
        double hi = 1.01 * delta0();
        for (int k = 0; residual(hi, temperature) > 0.0; ++k) {
            if (k > 60) throw ConvergenceError("SimpleGap::delta: no upper bracket");
            hi *= 2.0;
        }
        for (int k = 0; k < max_bisection_steps; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) return closer(lo, hi, temperature);
            (residual(mid, temperature) > 0.0 ? lo : hi) = mid;
        }
        throw ConvergenceError("SimpleGap::delta: bisection did not converge at T = " + std::to_string(temperature));
    }

    /// v = Phi_T / Phi_s at (tau, s = 0), where Phi(T, s) = U int gap_kernel(xi, s, T) - 1.
    ///   Phi_T = -(U/T) [tanh(hw/2T) - tanh(eps/2T)]
    ///   Phi_s = (U / 8T^2) int_{eps/2T}^{hw/2T} g(eta) deta
    double implicit_slope_v() const {
        const double t = tau_;
        const double phi_t = -(u_ / t) * (tanh_sat(params_.hbar_omega_d() / (2.0 * t)) -
                                          tanh_sat(params_.epsilon_cutoff() / (2.0 * t)));
        // eta = xi / 2T on the same nodes
        const double g_int = integrate([&](double xi) { return g_eval(xi / (2.0 * t)) / (2.0 * t); }, grid_);
        const double phi_s = u_ / (8.0 * t * t) * g_int;
        return phi_t / phi_s;
    }

private:
    double closer(double lo, double hi, double temperature) const {
        return std::abs(residual(lo, temperature)) <= std::abs(residual(hi, temperature)) ? lo : hi;
    }

    double find_tau() const {
        double hi = params_.hbar_omega_d();
        for (int k = 0; linear_row(hi) > 0.0; ++k) {
            if (k > 200) throw ConvergenceError("tau_root: no upper bracket");
            hi *= 2.0;
        }
        double lo = 0.5 * hi;
        for (int k = 0; linear_row(lo) <= 0.0; ++k) {
            if (k > 2000) throw ConvergenceError("tau_root: no lower bracket");
            lo *= 0.5;
        }
        for (int k = 0; k < max_bisection_steps; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (linear_row(mid) > 0.0 ? lo : hi) = mid;
        }
        return std::abs(linear_row(lo)) <= std::abs(linear_row(hi)) ? lo : hi;
    }

    double u_;
    PhysicalParams params_;
    EnergyGrid grid_;
    double tau_ = 0.0;
};

inline double tau_root(double coupling, const PhysicalParams& params, const EnergyGrid& grid) {
    return SimpleGap(coupling, params, grid).tau();
}

inline double solve_delta(double coupling, double temperature, const PhysicalParams& params, const EnergyGrid& grid) {
    return SimpleGap(coupling, params, grid).delta(temperature);
}

inline double implicit_slope_v(double coupling, const PhysicalParams& params, const EnergyGrid& grid) {
    return SimpleGap(coupling, params, grid).implicit_slope_v();
}

/// Delta_1 / Delta_2 pair bracketing every solution pointwise.
class Envelope {
public:
    Envelope(const PhysicalParams& params, const EnergyGrid& grid)
        : lower_(params.u_lower(), params, grid), upper_(params.u_upper(), params, grid) {}

    const SimpleGap& lower() const noexcept { return lower_; }
    const SimpleGap& upper() const noexcept { return upper_; }
    double delta1(double t) const { return lower_.delta(t); }
    double delta2(double t) const { return upper_.delta(t); }

private:
    SimpleGap lower_;
    SimpleGap upper_;
};

struct EnvelopeCurve {
    double coupling = 0.0;
    double tau = 0.0;
    std::vector<double> t_nodes;
    std::vector<double> delta_values;
    double delta0 = 0.0;

    /// Zero extension above tau.
    double operator()(double t) const;
};

/// Samples D(T) on `count` uniform nodes over [0, tau] (last node is tau itself).
inline EnvelopeCurve make_envelope_curve(const SimpleGap& gap, std::size_t count = 65) {
    if (count < 2) throw InvalidParameter("envelope.count", "needs at least 2 nodes");
    EnvelopeCurve c;
    c.coupling = gap.coupling();
    c.tau = gap.tau();
    c.delta0 = gap.delta0();
    for (std::size_t i = 0; i < count; ++i) {
        const double t = i + 1 == count ? gap.tau() : gap.tau() * static_cast<double>(i) / static_cast<double>(count - 1);
        c.t_nodes.push_back(t);
        c.delta_values.push_back(gap.delta(t));
    }
    return c;
}

inline double EnvelopeCurve::operator()(double t) const {
    if (t >= tau) return 0.0;
    // linear interpolation between stored nodes
    for (std::size_t i = 1; i < t_nodes.size(); ++i) {
        if (t <= t_nodes[i]) {
            const double a = (t - t_nodes[i - 1]) / (t_nodes[i] - t_nodes[i - 1]);
            return (1 - a) * delta_values[i - 1] + a * delta_values[i];
        }
    }
    return 0.0;
}

}  // namespace bcsgap
