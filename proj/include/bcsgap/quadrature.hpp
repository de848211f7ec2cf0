#pragma once

// Integration over the energy grid and the numerically safe gap-equation
// integrand pieces. Every integral in the library goes through here.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>

#include "bcsgap/errors.hpp"
#include "bcsgap/model.hpp"

namespace bcsgap {

/// tanh, saturated to exactly 1 for z > 40.
inline double tanh_sat(double z) {
    if (z > 40.0) return 1.0;
    if (z < -40.0) return -1.0;
    return std::tanh(z);
}

/// sech z = 2 e^{-|z|} / (1 + e^{-2|z|}); no overflow for large |z|.
inline double sech(double z) {
    const double e = std::exp(-std::abs(z));
    return 2.0 * e / (1.0 + e * e);
}

inline double sech2(double z) {
    const double s = sech(z);
    return s * s;
}

/// z / cosh^2 z
inline double z_sech2(double z) { return z * sech2(z); }

/// Fermi factor 1 / (e^z + 1), evaluated without overflow.
inline double fermi(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

/// ln(1 + e^{-a}) for a >= 0.
inline double log1p_exp_neg(double a) { return std::log1p(std::exp(-a)); }

/// tanh(E / 2T) / E with E = sqrt(xi^2 + s). T == 0 takes the tanh == 1 branch.
inline double gap_kernel(double xi, double s, double temperature) {
    const double e = std::sqrt(xi * xi + s);
    if (temperature == 0.0) return 1.0 / e;
    return tanh_sat(e / (2.0 * temperature)) / e;
}

/// |1 - tanh(z/2) - 2/(e^z + 1)|; the pointwise identity behind dPsi/dT(T_c) = 0.
inline double tanh_half_identity(double z) { return std::abs(1.0 - tanh_sat(0.5 * z) - 2.0 * fermi(z)); }

/// Sum_j w_j f_j.
inline double integrate(std::span<const double> values, const EnergyGrid& grid) {
    if (values.size() != grid.size())
        throw InvalidParameter("integrate", "sample length " + std::to_string(values.size()) +
                                                " does not match grid size " + std::to_string(grid.size()));
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j])) throw DomainError("integrate: non-finite sample at node " + std::to_string(j));
        acc += grid.weights[j] * values[j];
    }
    return acc;
}

/// Sum_j w_j f(xi_j).
template <std::invocable<double> F>
double integrate(F&& f, const EnergyGrid& grid) {
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) acc += grid.weights[j] * f(grid.nodes[j]);
    return acc;
}

struct AdaptiveResult {
    double value;
    double change;  // |I_2n - I_n| at termination
    std::size_t panels;
};

/// Doubles the panel count until |I_2n - I_n| <= max(abs_tol, rel_tol |I_2n|).
template <class F>
AdaptiveResult adaptive_integrate(F&& f, double lo, double hi, std::size_t panels = 8, std::size_t order = 10,
                                  Grading grading = Grading::geometric, double abs_tol = 1e-12,
                                  double rel_tol = 1e-10, std::size_t max_panels = 1u << 14) {
    double prev = integrate(f, build_grid(lo, hi, panels, order, grading));
    while (true) {
        panels *= 2;
        const double cur = integrate(f, build_grid(lo, hi, panels, order, grading));
        const double change = std::abs(cur - prev);
        if (change <= std::max(abs_tol, rel_tol * std::abs(cur))) return {cur, change, panels};
        if (panels >= max_panels)
            throw ConvergenceError("adaptive_integrate: no convergence at " + std::to_string(panels) + " panels");
        prev = cur;
    }
}

}  // namespace bcsgap
