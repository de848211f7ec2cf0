#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bcsgap/sampling.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bcsgap;

namespace {
const Model& m() { return fixture::constant_model(); }
}  // namespace

TEST(Picard, ConstantPotentialMatchesScalarSolution) {
    for (double t : {0.01, 0.03, 0.0375}) {
        const auto r = picard_solve(t, m().op, m().envelope);
        const double d = solve_delta(0.30, t, m().params, m().grid);
        for (double v : r.field.values) EXPECT_NEAR(v, d, 1e-8) << t;
        EXPECT_FALSE(r.trace.certified);
        EXPECT_LE(r.trace.final_residual, 1e-12 * (1.0 - r.trace.alpha_used) * (1.0 + 1e-6));
    }
}

TEST(Picard, ZeroAtCriticalTemperature) {
    const auto r = picard_solve(fixture::constant_tc(), m().op, m().envelope);
    EXPECT_EQ(r.field.sup(), 0.0);
    EXPECT_EQ(picard_solve(1.1 * fixture::constant_tc(), m().op, m().envelope).field.sup(), 0.0);
}

TEST(Picard, AsymptoticRatioBelowUsedAlpha) {
    const auto r = picard_solve(0.036, m().op, m().envelope);
    EXPECT_LT(r.trace.asymptotic_ratio, 1.0);
    EXPECT_LE(r.trace.asymptotic_ratio, r.trace.alpha_used + 1e-12);
    // ratios settle near the used alpha once the iteration is asymptotic
    const auto ratios = r.trace.ratios();
    for (std::size_t k = ratios.size() / 2; k + 5 < ratios.size(); ++k) EXPECT_LE(ratios[k], r.trace.alpha_used + 0.05);
}

TEST(Picard, CertifiedAlphaStoppingRule) {
    PicardOptions o;
    o.alpha = 0.9;
    const auto r = picard_solve(0.02, m().op, m().envelope, o);
    EXPECT_TRUE(r.trace.certified);
    EXPECT_LE(r.trace.differences.back(), 1e-12 * 0.1 / 0.9);
    o.alpha = 1.2;
    EXPECT_THROW(picard_solve(0.02, m().op, m().envelope, o), InvalidParameter);
}

TEST(Picard, BudgetExhaustionReportsRatio) {
    PicardOptions o;
    o.max_iter = 50;
    try {
        picard_solve(0.0375, m().op, m().envelope, o);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.ratio(), 0.5);
        EXPECT_LT(e.ratio(), 1.0);
    }
}

TEST(Picard, UniquenessFromBothEnvelopes) {
    const auto& b = fixture::bump_model();
    for (double t : {0.6 * b.envelope.lower().tau(), 0.95 * b.envelope.lower().tau(), 1.05 * b.envelope.lower().tau()}) {
        const std::size_t n = b.op.size();
        // Delta_1 = 0 above tau_1 and zero is itself a fixed point; start just above it
        const double low = std::max(b.envelope.delta1(t), 1e-3 * b.envelope.delta2(t));
        PicardOptions lo, hi;
        lo.initial = std::vector<double>(n, low);
        hi.initial = std::vector<double>(n, b.envelope.delta2(t));
        const auto a = picard_solve(t, b.op, b.envelope, lo);
        const auto c = picard_solve(t, b.op, b.envelope, hi);
        EXPECT_LE(sup_distance(a.field.values, c.field.values), 2e-12) << t;
    }
}

TEST(Picard, APosterioriBoundAlongTrace) {
    const double t = 0.03;
    PicardOptions tight;
    tight.tol = 1e-14;
    const auto ref = picard_solve(t, m().op, m().envelope, tight).field.values;
    // replay the iteration and compare each iterate with the reference
    std::vector<double> cur(m().op.size(), m().envelope.delta2(t)), next(cur.size()), scratch;
    const double alpha = picard_solve(t, m().op, m().envelope).trace.alpha_used;
    std::size_t violations = 0;
    for (int k = 0; k < 300; ++k) {
        m().op.apply(cur, t, next, scratch);
        const double step = sup_distance(next, cur);
        if (k > 40) violations += sup_distance(next, ref) > alpha / (1 - alpha) * step + 1e-13;
        std::swap(cur, next);
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Picard, ZeroOrPositiveDichotomy) {
    const auto& s = fixture::constant_surface();
    for (std::size_t i = 0; i < s.rows(); ++i) {
        const auto row = s.row(i);
        const double mx = *std::max_element(row.begin(), row.end());
        const double mn = *std::min_element(row.begin(), row.end());
        EXPECT_TRUE(mx <= 1e-12 || mn > 1e-12) << s.t_nodes[i];
    }
}

TEST(CriticalTemperature, ConstantMatchesTauRoot) {
    const auto ct = critical_temperature(m().op, m().envelope);
    EXPECT_NEAR(ct.t_c, oracle::tau_030, 1e-9);
    EXPECT_NEAR(ct.t_c, tau_root(0.30, m().params, m().grid), 1e-12);
    EXPECT_GE(ct.radius_at_lo, 1.0);
    EXPECT_LE(ct.radius_at_hi, 1.0);
}

TEST(CriticalTemperature, CrossCheckBySolutionNorm) {
    const auto c = check_critical_temperature(m().op, m().envelope, fixture::constant_tc());
    EXPECT_TRUE(c.consistent);
    EXPECT_NEAR(c.sqrt_scaling, 2.0, 0.05);
    EXPECT_LT(c.radius_above, 1.0);
    const double v = implicit_slope_v(0.30, m().params, m().grid);
    EXPECT_NEAR(c.sup_below * c.sup_below / c.delta, v, 0.05 * v);
}

TEST(CriticalTemperature, GaussianBumpOrdering) {
    const auto& b = fixture::bump_model();
    const auto ct = critical_temperature(b.op, b.envelope);
    EXPECT_LE(b.envelope.lower().tau(), ct.t_c);
    EXPECT_LE(ct.t_c, b.envelope.upper().tau());
}

TEST(CriticalTemperature, LargerPotentialDoesNotLowerTc) {
    auto lo = fixture::bump_config(), hi = fixture::bump_config();
    lo.amplitude = 0.005;
    hi.amplitude = 0.015;
    for (auto* c : {&lo, &hi}) {
        c->params.u_lower = 0.28;
        c->params.u_upper = 0.32;
        c->u_lower_given = c->u_upper_given = true;
    }
    const auto a = build_model(lo), b = build_model(hi);
    EXPECT_LT(critical_temperature(a->op, a->envelope).t_c, critical_temperature(b->op, b->envelope).t_c);
}

TEST(CriticalTemperature, BracketFailure) {
    // a potential outside its declared bounds breaks the bracket
    RawParams r;
    r.u_lower = 0.25;
    r.u_upper = 0.28;
    const auto p = make_params(r);
    const auto g = build_grid(p);
    const GapOperator op(Potential(ConstantPotential{0.30}, p), g);
    const Envelope env(p, g);
    EXPECT_THROW(critical_temperature(op, env), InvariantViolation);
}

TEST(Surface, Nodes) {
    SurfaceOptions o;
    o.tau = 0.03;
    const auto t = surface_temperatures(0.04, o);
    ASSERT_EQ(t.size(), 25u);
    EXPECT_EQ(t.front(), 0.03);
    EXPECT_EQ(t.back(), 0.04);
    EXPECT_GE(0.04 - t[23], 1e-3 * 0.04 * (1 - 1e-12));
    for (std::size_t i = 1; i + 1 < t.size(); ++i)
        EXPECT_NEAR((0.04 - t[i]) / (0.04 - t[i - 1]), (0.04 - t[1]) / (0.04 - t[0]), 1e-12);
    o.tau = 0.05;
    EXPECT_THROW(surface_temperatures(0.04, o), InvalidParameter);
}

TEST(Surface, ConstantRowsMatchScalar) {
    const auto& s = fixture::constant_surface();
    for (std::size_t i = 0; i < s.rows(); ++i) {
        const double d = solve_delta(0.30, s.t_nodes[i], m().params, m().grid);
        for (std::size_t j = 0; j < s.cols(); ++j) EXPECT_NEAR(s(i, j), d, 1e-8);
    }
    EXPECT_EQ(s.t_nodes.back(), s.t_c);
    for (std::size_t j = 0; j < s.cols(); ++j) EXPECT_EQ(s(s.rows() - 1, j), 0.0);
    EXPECT_FALSE(s.certified);
}

TEST(Surface, GaussianBumpInvariants) {
    const auto& b = fixture::bump_model();
    const auto ct = critical_temperature(b.op, b.envelope);
    SurfaceOptions o;
    o.tau = 0.9 * b.envelope.lower().tau();
    o.t_resolution = 10;
    o.min_gap_fraction = 1e-2;
    const auto s = solve_surface(b.op, b.envelope, ct.t_c, o);
    EXPECT_NO_THROW(validate_surface(s, b.envelope, 1e-9));
    for (std::size_t j = 0; j < s.cols(); ++j)
        for (std::size_t i = 1; i < s.rows(); ++i) EXPECT_LE(s(i, j), s(i - 1, j));
    // non-constant potential gives an x-dependent gap
    const auto row = s.row(0);
    EXPECT_GT(*std::max_element(row.begin(), row.end()) - *std::min_element(row.begin(), row.end()), 1e-4);
}

TEST(Surface, ValidationNamesThePoint) {
    auto s = fixture::constant_surface();
    s.values[3 * s.cols() + 7] *= 1.5;
    try {
        validate_surface(s, m().envelope, 1e-9);
        FAIL();
    } catch (const InvariantViolation& e) {
        EXPECT_NE(std::string(e.what()).find("(T, x)"), std::string::npos);
    }
}

TEST(Surface, Csv) {
    const auto& s = fixture::constant_surface();
    const auto text = surface_csv(s).str();
    EXPECT_EQ(text.rfind("T,x,u\n", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), s.rows() * s.cols() + 1);
}
