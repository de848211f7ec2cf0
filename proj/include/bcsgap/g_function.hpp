#pragma once

#include <array>
#include <cmath>

#include "bcsgap/errors.hpp"
#include "bcsgap/quadrature.hpp"

namespace bcsgap {

/// g(eta) = 1/(eta^2 cosh^2 eta) - tanh(eta)/eta^3, with g(0) = -2/3.
///
/// Below eta = 0.1 the two terms cancel catastrophically, so the even Taylor
/// series is used there (coefficients from the tanh series: for
/// tanh(eta) = sum a_n eta^(2n-1), the eta^(2n-4) coefficient of g is 2(n-1) a_n).
/// Truncation error below eta = 0.1 is < 1e-15.
inline double g_eval(double eta) {
    if (!(eta >= 0.0)) throw DomainError("g_eval: eta must be >= 0");
    constexpr double eta0 = 0.1;
    if (eta < eta0) {
        constexpr std::array<double, 7> c{-2.0 / 3.0,          8.0 / 15.0,           -34.0 / 105.0,
                                          496.0 / 2835.0,      -2764.0 / 31185.0,    87376.0 / 2027025.0,
                                          -1859138.0 / 91216125.0};
        const double e2 = eta * eta;
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * e2 + *it;
        return acc;
    }
    const double e2 = eta * eta;
    return sech2(eta) / e2 - tanh_sat(eta) / (e2 * eta);
}

}  // namespace bcsgap
