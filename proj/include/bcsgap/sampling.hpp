#pragma once

// Seeded random fields inside the W-envelope:
//   u(T, x) = Delta_1(T) + theta(x) (Delta_2(T) - Delta_1(T)),  0 <= theta <= 1,
// with theta a smooth profile independent of T.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bcsgap/model.hpp"
#include "bcsgap/simple_gap.hpp"

namespace bcsgap {

class EnvelopeSampler {
public:
    EnvelopeSampler(const Envelope& envelope, const EnergyGrid& grid, std::uint64_t seed)
        : envelope_(envelope), grid_(grid), rng_(seed) {}

    /// Smooth profile in [0, 1]: a normalized random cosine series in log x.
    std::vector<double> profile(int modes = 4) {
        std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
        std::vector<double> a(modes), p(modes);
        double norm = 0.0;
        for (int k = 0; k < modes; ++k) {
            a[k] = amp(rng_) / (k + 1);
            p[k] = phase(rng_);
            norm += std::abs(a[k]);
        }
        const double span = std::log(grid_.hi / grid_.lo);
        std::vector<double> theta(grid_.size());
        for (std::size_t j = 0; j < grid_.size(); ++j) {
            const double s = std::log(grid_.nodes[j] / grid_.lo) / span;
            double acc = 0.0;
            for (int k = 0; k < modes; ++k) acc += a[k] * std::cos(std::numbers::pi * (k + 1) * s + p[k]);
            theta[j] = std::clamp(0.5 + 0.5 * acc / norm, 0.0, 1.0);
        }
        return theta;
    }

    std::vector<double> field(double temperature, const std::vector<double>& theta) const {
        const double d1 = envelope_.delta1(temperature);
        const double d2 = envelope_.delta2(temperature);
        std::vector<double> u(theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j) u[j] = d1 + theta[j] * (d2 - d1);
        return u;
    }

    std::vector<double> field(double temperature) { return field(temperature, profile()); }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    std::mt19937_64& engine() noexcept { return rng_; }

private:
    const Envelope& envelope_;
    const EnergyGrid& grid_;
    std::mt19937_64 rng_;
};

}  // namespace bcsgap
