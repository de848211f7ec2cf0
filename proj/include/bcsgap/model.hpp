#pragma once

// Physical parameters, pairing potentials and the shared Nystrom energy grid.
//
// Units: k_B = 1, so energies and temperatures share one unit. Examples use
// hbar*omega_D = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bcsgap/errors.hpp"

namespace bcsgap {

struct RawParams {
    double hbar_omega_d = 1.0;
    double epsilon_cutoff = 0.005;
    double n0_dos = 1.0;
    double u_lower = 0.0;
    double u_upper = 0.0;
};

/// Validated model constants. Only make_params() produces these.
class PhysicalParams {
public:
    double hbar_omega_d() const noexcept { return raw_.hbar_omega_d; }
    double epsilon_cutoff() const noexcept { return raw_.epsilon_cutoff; }
    double n0_dos() const noexcept { return raw_.n0_dos; }
    double u_lower() const noexcept { return raw_.u_lower; }
    double u_upper() const noexcept { return raw_.u_upper; }
    /// ln(hbar*omega_D / epsilon)
    double log_span() const noexcept { return std::log(raw_.hbar_omega_d / raw_.epsilon_cutoff); }

    PhysicalParams with_n0(double n0) const {
        RawParams r = raw_;
        r.n0_dos = n0;
        return PhysicalParams(r);
    }

private:
    explicit PhysicalParams(const RawParams& r) : raw_(r) {}
    friend PhysicalParams make_params(const RawParams&);
    RawParams raw_;
};

/// hbar*omega_D - epsilon * exp(1/U); must be positive for the T = 0 closed form.
inline double closed_form_factor(double u, double hbar_omega_d, double epsilon) {
    return hbar_omega_d - epsilon * std::exp(1.0 / u);
}

inline PhysicalParams make_params(const RawParams& r) {
    auto fail = [](const std::string& name, const std::string& detail) {
        throw InvalidParameter(name, detail);
    };
    for (auto [name, v] : {std::pair{"hbar_omega_d", r.hbar_omega_d}, std::pair{"epsilon_cutoff", r.epsilon_cutoff},
                           std::pair{"n0_dos", r.n0_dos}, std::pair{"u_lower", r.u_lower},
                           std::pair{"u_upper", r.u_upper}}) {
        if (!std::isfinite(v)) fail(name, "value is not finite");
    }
    if (!(r.hbar_omega_d > 0.0)) fail("hbar_omega_d", "must be > 0");
    if (!(r.epsilon_cutoff > 0.0 && r.epsilon_cutoff < r.hbar_omega_d))
        fail("epsilon_cutoff", "requires 0 < epsilon_cutoff < hbar_omega_d");
    if (!(r.n0_dos > 0.0)) fail("n0_dos", "must be > 0");
    if (!(r.u_lower > 0.0 && r.u_lower < r.u_upper)) fail("coupling_order", "requires 0 < u_lower < u_upper");
    for (auto [name, u] : {std::pair{"u_lower", r.u_lower}, std::pair{"u_upper", r.u_upper}}) {
        const double f = closed_form_factor(u, r.hbar_omega_d, r.epsilon_cutoff);
        if (!(f > 0.0)) {
            std::ostringstream os;
            os.precision(17);
            os << "closed-form factor hbar_omega_d - epsilon*exp(1/U) = " << f << " <= 0 for U = " << u;
            fail(std::string("closed_form_validity(") + name + ")", os.str());
        }
    }
    const double log_span = std::log(r.hbar_omega_d / r.epsilon_cutoff);
    if (!(r.u_lower * log_span > 1.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "u_lower * ln(hbar_omega_d/epsilon) = " << r.u_lower * log_span << " <= 1, no tau_1 > 0 exists";
        fail("tau_existence", os.str());
    }
    return PhysicalParams(r);
}

// ---------------------------------------------------------------------------
// Potentials

struct ConstantPotential {
    double u0;
};

/// Tabulated U(x, xi) on a rectangular lattice, bilinear interpolation.
struct TablePotential {
    std::vector<double> x_nodes;
    std::vector<double> xi_nodes;
    std::vector<double> values;  // row-major: values[i * xi_nodes.size() + j] = U(x_i, xi_j)
};

/// U(x, xi) = base + amplitude * exp(-(x - xi)^2 / (2 width^2))
struct GaussianBumpPotential {
    double base;
    double amplitude;
    double width;
};

using PotentialSpec = std::variant<ConstantPotential, TablePotential, GaussianBumpPotential>;

namespace detail {

inline double bilinear(const TablePotential& t, double x, double xi) {
    auto cell = [](const std::vector<double>& nodes, double v) {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
        std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
        hi = std::clamp<std::size_t>(hi, 1, nodes.size() - 1);
        const std::size_t lo = hi - 1;
        const double s = std::clamp((v - nodes[lo]) / (nodes[hi] - nodes[lo]), 0.0, 1.0);
        return std::pair{lo, s};
    };
    const auto [i, a] = cell(t.x_nodes, x);
    const auto [j, b] = cell(t.xi_nodes, xi);
    const std::size_t m = t.xi_nodes.size();
    const double v00 = t.values[i * m + j];
    const double v01 = t.values[i * m + j + 1];
    const double v10 = t.values[(i + 1) * m + j];
    const double v11 = t.values[(i + 1) * m + j + 1];
    return (1 - a) * ((1 - b) * v00 + b * v01) + a * ((1 - b) * v10 + b * v11);
}

}  // namespace detail

/// A potential together with its domain [epsilon, hbar*omega_D]^2.
class Potential {
public:
    Potential(PotentialSpec spec, const PhysicalParams& params)
        : spec_(std::move(spec)), lo_(params.epsilon_cutoff()), hi_(params.hbar_omega_d()) {
        if (auto* t = std::get_if<TablePotential>(&spec_)) check_table(*t);
        if (auto* g = std::get_if<GaussianBumpPotential>(&spec_)) {
            if (!(g->width > 0.0)) throw InvalidParameter("potential.width", "must be > 0");
        }
    }

    const PotentialSpec& spec() const noexcept { return spec_; }
    bool is_constant() const noexcept { return std::holds_alternative<ConstantPotential>(spec_); }

    /// Evaluation without the domain check; callers guarantee (x, xi) is in range.
    double value_unchecked(double x, double xi) const {
        return std::visit(
            [&](const auto& p) -> double {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, ConstantPotential>) {
                    return p.u0;
                } else if constexpr (std::is_same_v<P, TablePotential>) {
                    return detail::bilinear(p, x, xi);
                } else {
                    const double d = (x - xi) / p.width;
                    return p.base + p.amplitude * std::exp(-0.5 * d * d);
                }
            },
            spec_);
    }

    double operator()(double x, double xi) const {
        const double slack = 1e-12 * hi_;
        if (!(x >= lo_ - slack && x <= hi_ + slack && xi >= lo_ - slack && xi <= hi_ + slack)) {
            std::ostringstream os;
            os.precision(17);
            os << "(x, xi) = (" << x << ", " << xi << ") outside [" << lo_ << ", " << hi_ << "]^2";
            throw DomainError(os.str());
        }
        return value_unchecked(x, xi);
    }

    double domain_lo() const noexcept { return lo_; }
    double domain_hi() const noexcept { return hi_; }

private:
    void check_table(const TablePotential& t) const {
        auto increasing = [](const std::vector<double>& v) {
            return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
        };
        if (t.x_nodes.size() < 2 || t.xi_nodes.size() < 2)
            throw InvalidParameter("potential.table", "needs at least 2 nodes per axis");
        if (t.values.size() != t.x_nodes.size() * t.xi_nodes.size())
            throw InvalidParameter("potential.table", "value count does not match the lattice");
        if (!increasing(t.x_nodes) || !increasing(t.xi_nodes))
            throw InvalidParameter("potential.table", "nodes must be strictly increasing");
        const double slack = 1e-12 * hi_;
        for (const auto* nodes : {&t.x_nodes, &t.xi_nodes}) {
            if (nodes->front() > lo_ + slack || nodes->back() < hi_ - slack)
                throw InvalidParameter("potential.table", "nodes must span [epsilon, hbar_omega_d]");
        }
        for (double v : t.values)
            if (!std::isfinite(v)) throw InvalidParameter("potential.table", "non-finite value");
    }

    PotentialSpec spec_;
    double lo_;
    double hi_;
};

inline double eval_potential(const Potential& p, double x, double xi) { return p(x, xi); }

struct PotentialRange {
    double min;
    double max;
};

/// Min/max of U on an n x n lattice over [epsilon, hbar*omega_D]^2 (endpoints included).
inline PotentialRange sample_range(const Potential& p, std::size_t n = 64) {
    PotentialRange r{INFINITY, -INFINITY};
    const double lo = p.domain_lo();
    const double hi = p.domain_hi();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
            const double v = p.value_unchecked(x, xi);
            r.min = std::min(r.min, v);
            r.max = std::max(r.max, v);
        }
    }
    // table nodes are where bilinear extrema live
    if (const auto* t = std::get_if<TablePotential>(&p.spec())) {
        for (double v : t->values) {
            r.min = std::min(r.min, v);
            r.max = std::max(r.max, v);
        }
    }
    return r;
}

/// Throws unless every sampled value lies strictly inside (u_lower, u_upper).
inline void check_potential_bounds(const Potential& p, const PhysicalParams& params, std::size_t n = 64) {
    const auto r = sample_range(p, n);
    if (!(r.min > params.u_lower() && r.max < params.u_upper())) {
        std::ostringstream os;
        os.precision(17);
        os << "sampled range [" << r.min << ", " << r.max << "] not strictly inside (" << params.u_lower() << ", "
           << params.u_upper() << ")";
        throw InvalidParameter("potential_bounds", os.str());
    }
}

/// Reads `x,xi,u` CSV (row-major in x then xi).
inline TablePotential read_potential_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("potential.csv", "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidParameter("potential.csv", "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,xi,u") throw InvalidParameter("potential.csv", "header must be `x,xi,u`");

    std::vector<double> xs, xis, us;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 3> v{};
        std::size_t pos = 0;
        for (int k = 0; k < 3; ++k) {
            const std::size_t next = k < 2 ? line.find(',', pos) : line.size();
            if (next == std::string::npos)
                throw InvalidParameter("potential.csv", "line " + std::to_string(lineno) + ": expected 3 fields");
            try {
                std::size_t used = 0;
                const std::string field = line.substr(pos, next - pos);
                v[k] = std::stod(field, &used);
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw InvalidParameter("potential.csv", "line " + std::to_string(lineno) + ": bad number");
            }
            pos = next + 1;
        }
        xs.push_back(v[0]);
        xis.push_back(v[1]);
        us.push_back(v[2]);
    }
    if (xs.empty()) throw InvalidParameter("potential.csv", "no data rows");

    TablePotential t;
    for (std::size_t k = 0; k < xis.size() && xs[k] == xs[0]; ++k) t.xi_nodes.push_back(xis[k]);
    const std::size_t m = t.xi_nodes.size();
    if (xs.size() % m != 0) throw InvalidParameter("potential.csv", "rows do not form a rectangular lattice");
    for (std::size_t i = 0; i < xs.size() / m; ++i) {
        t.x_nodes.push_back(xs[i * m]);
        for (std::size_t j = 0; j < m; ++j) {
            if (xs[i * m + j] != t.x_nodes.back() || xis[i * m + j] != t.xi_nodes[j])
                throw InvalidParameter("potential.csv", "rows must be row-major in x then xi");
        }
    }
    t.values = std::move(us);
    return t;
}

// ---------------------------------------------------------------------------
// Energy grid

/// Composite Gauss-Legendre rule on [epsilon, hbar*omega_D]. The nodes double as
/// the collocation points x_j of every field (Nystrom).
struct EnergyGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t panel_count = 0;
    std::size_t order = 0;
    double lo = 0.0;
    double hi = 0.0;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre abscissae and weights on [-1, 1].
inline void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = z;
        for (std::size_t k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = p2;
        }
        dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}

enum class Grading { geometric, uniform };

/// Composite rule on [lo, hi]. Geometric grading places panel breaks at
/// lo * (hi/lo)^(k/P), which requires lo > 0.
inline EnergyGrid build_grid(double lo, double hi, std::size_t panels, std::size_t order,
                             Grading grading = Grading::geometric) {
    if (panels < 1) throw InvalidParameter("grid.panels", "must be >= 1");
    if (order < 2) throw InvalidParameter("grid.order", "must be >= 2");
    if (!(hi > lo)) throw InvalidParameter("grid", "empty interval");
    if (grading == Grading::geometric && !(lo > 0.0)) throw InvalidParameter("grid", "geometric grading needs lo > 0");

    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);

    std::vector<double> breaks(panels + 1);
    for (std::size_t k = 0; k <= panels; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(panels);
        breaks[k] = grading == Grading::geometric ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
    }
    breaks.front() = lo;
    breaks.back() = hi;

    EnergyGrid g;
    g.panel_count = panels;
    g.order = order;
    g.lo = lo;
    g.hi = hi;
    g.nodes.reserve(panels * order);
    g.weights.reserve(panels * order);
    for (std::size_t k = 0; k < panels; ++k) {
        const double c = 0.5 * (breaks[k] + breaks[k + 1]);
        const double h = 0.5 * (breaks[k + 1] - breaks[k]);
        for (std::size_t i = 0; i < order; ++i) {
            g.nodes.push_back(c + h * gx[i]);
            g.weights.push_back(h * gw[i]);
        }
    }
    return g;
}

inline EnergyGrid build_grid(const PhysicalParams& params, std::size_t panels = 16, std::size_t order = 10) {
    return build_grid(params.epsilon_cutoff(), params.hbar_omega_d(), panels, order, Grading::geometric);
}

}  // namespace bcsgap
