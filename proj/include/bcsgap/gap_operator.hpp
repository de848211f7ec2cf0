#pragma once

// The nonlinear gap operator
//
//   (A u)(x) = int U(x, xi) u(xi) tanh(E/2T)/E dxi,   E = sqrt(xi^2 + u(xi)^2)
//
// discretized by Nystrom collocation: x runs over the quadrature nodes, so
// A is a dense matrix-vector product with a pointwise nonlinearity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bcsgap/errors.hpp"
#include "bcsgap/model.hpp"
#include "bcsgap/quadrature.hpp"

namespace bcsgap {

struct GapField {
    double temperature = 0.0;
    std::vector<double> values;

    double sup() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }
};

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidParameter("sup_distance", "length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Dense n x n matrix, row-major.
struct KernelMatrix {
    double temperature = 0.0;
    std::size_t n = 0;
    std::vector<double> entries;

    double operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
    double row_sum(std::size_t i) const {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += entries[i * n + j];
        return s;
    }
};

struct PerronResult {
    double radius = 0.0;
    std::vector<double> eigenvector;  // positive, sup-norm 1
    std::size_t iterations = 0;
};

/// A bound to a potential and grid. Holds the T-independent product U(x_i, xi_j) w_j.
class GapOperator {
public:
    static constexpr std::size_t max_power_iterations = 100000;

    GapOperator(const Potential& potential, EnergyGrid grid) : grid_(std::move(grid)) {
        const std::size_t n = grid_.size();
        weighted_.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                weighted_[i * n + j] = potential.value_unchecked(grid_.nodes[i], grid_.nodes[j]) * grid_.weights[j];
    }

    const EnergyGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.size(); }

    /// U(x_i, xi_j) * w_j
    double weighted(std::size_t i, std::size_t j) const { return weighted_[i * size() + j]; }

    /// out = A(in) at temperature T. `in` must be nonnegative.
    void apply(std::span<const double> in, double temperature, std::span<double> out,
               std::vector<double>& scratch) const {
        const std::size_t n = size();
        if (in.size() != n || out.size() != n)
            throw InvalidParameter("apply_A", "field length does not match the grid");
        scratch.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double u = in[j];
            scratch[j] = u == 0.0 ? 0.0 : u * gap_kernel(grid_.nodes[j], u * u, temperature);
        }
        matvec(scratch, out);
    }

    GapField apply(const GapField& u) const {
        if (u.values.size() != size()) throw InvalidParameter("apply_A", "field length does not match the grid");
        for (double v : u.values)
            if (!(v >= 0.0)) throw DomainError("apply_A: field must be nonnegative");
        GapField out{u.temperature, std::vector<double>(size())};
        std::vector<double> scratch;
        apply(u.values, u.temperature, out.values, scratch);
        return out;
    }

    /// Linearization of A at u = 0: M_ij = U(x_i, xi_j) tanh(xi_j/2T)/xi_j w_j.
    KernelMatrix kernel_matrix(double temperature) const {
        if (!(temperature > 0.0)) throw DomainError("kernel_matrix: temperature must be > 0");
        const std::size_t n = size();
        KernelMatrix k{temperature, n, std::vector<double>(n * n)};
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) col[j] = gap_kernel(grid_.nodes[j], 0.0, temperature);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) k.entries[i * n + j] = weighted_[i * n + j] * col[j];
        return k;
    }

    /// Perron root of kernel_matrix(T) by power iteration from `seed` (constant 1 if empty).
    PerronResult spectral_radius(double temperature, std::span<const double> seed = {}) const {
        if (!(temperature > 0.0)) throw DomainError("spectral_radius: temperature must be > 0");
        const std::size_t n = size();
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) col[j] = gap_kernel(grid_.nodes[j], 0.0, temperature);

        std::vector<double> x(n, 1.0), y(n), scaled(n);
        if (seed.size() == n) x.assign(seed.begin(), seed.end());
        double prev = -1.0;
        for (std::size_t it = 1; it <= max_power_iterations; ++it) {
            for (std::size_t j = 0; j < n; ++j) scaled[j] = col[j] * x[j];
            matvec(scaled, y);
            const double lambda = *std::max_element(y.begin(), y.end());
            for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / lambda;
            if (std::abs(lambda - prev) <= 1e-13 * std::max(1.0, lambda)) return {lambda, std::move(x), it};
            prev = lambda;
        }
        throw ConvergenceError("spectral_radius: power iteration did not converge at T = " +
                               std::to_string(temperature));
    }

private:
    void matvec(std::span<const double> v, std::span<double> out) const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = weighted_.data() + i * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
            out[i] = acc;
        }
    }

    EnergyGrid grid_;
    std::vector<double> weighted_;
};

inline GapField apply_A(const GapField& u, const GapOperator& op) { return op.apply(u); }

inline KernelMatrix kernel_matrix(double temperature, const GapOperator& op) { return op.kernel_matrix(temperature); }

inline PerronResult spectral_radius(double temperature, const GapOperator& op) {
    return op.spectral_radius(temperature);
}

}  // namespace bcsgap
