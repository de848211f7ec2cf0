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

TEST(ApplyA, ZeroAndConstant) {
    const std::size_t n = m().op.size();
    const auto z = m().op.apply(GapField{0.03, std::vector<double>(n, 0.0)});
    EXPECT_EQ(z.sup(), 0.0);
    const auto c = m().op.apply(GapField{0.03, std::vector<double>(n, 0.04)});
    EXPECT_EQ(c.temperature, 0.03);
    const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
    EXPECT_LE(*hi - *lo, 1e-15 * *hi);
}

TEST(ApplyA, RejectsBadInput) {
    EXPECT_THROW(m().op.apply(GapField{0.03, std::vector<double>(3, 0.0)}), InvalidParameter);
    std::vector<double> neg(m().op.size(), 0.01);
    neg[5] = -1e-3;
    EXPECT_THROW(m().op.apply(GapField{0.03, neg}), DomainError);
}

TEST(ApplyA, FixedPointOfConstantPotential) {
    const double t = 0.03;
    const double d = solve_delta(0.30, t, m().params, m().grid);
    const auto out = m().op.apply(GapField{t, std::vector<double>(m().op.size(), d)});
    for (double v : out.values) EXPECT_NEAR(v, d, 1e-14);
}

TEST(KernelMatrix, RowSumsAndPositivity) {
    const double t = 0.035;
    const auto k = kernel_matrix(t, m().op);
    const double expect = 0.30 * integrate([&](double xi) { return std::tanh(xi / (2 * t)) / xi; }, m().grid);
    for (std::size_t i = 0; i < k.n; ++i) EXPECT_NEAR(k.row_sum(i), expect, 1e-13);
    EXPECT_GT(*std::min_element(k.entries.begin(), k.entries.end()), 0.0);
    const auto k2 = kernel_matrix(0.036, m().op);
    for (std::size_t e = 0; e < k.entries.size(); ++e) EXPECT_LT(k2.entries[e], k.entries[e]);
    EXPECT_THROW(kernel_matrix(0.0, m().op), DomainError);
}

TEST(KernelMatrix, UnitRowSumAtTau) {
    const auto k = kernel_matrix(oracle::tau_030, m().op);
    EXPECT_NEAR(k.row_sum(0), 1.0, 1e-10);
}

TEST(SpectralRadius, ConstantPotential) {
    const auto r = spectral_radius(oracle::tau_030, m().op);
    EXPECT_NEAR(r.radius, 1.0, 1e-9);
    for (double e : r.eigenvector) EXPECT_NEAR(e, 1.0, 1e-12);
}

TEST(SpectralRadius, DecreasingInT) {
    const auto& b = fixture::bump_model();
    double prev = INFINITY;
    for (int k = 0; k <= 12; ++k) {
        const auto r = b.op.spectral_radius(0.02 + 0.002 * k);
        EXPECT_LT(r.radius, prev);
        prev = r.radius;
        EXPECT_NEAR(*std::max_element(r.eigenvector.begin(), r.eigenvector.end()), 1.0, 0.0);
        EXPECT_GT(*std::min_element(r.eigenvector.begin(), r.eigenvector.end()), 0.0);
    }
}

// ---------------------------------------------------------------------------
// property suite on seeded W-envelope samples, both potentials

class OperatorProperties : public ::testing::TestWithParam<int> {
protected:
    const Model& model() const { return GetParam() == 0 ? fixture::constant_model() : fixture::bump_model(); }
};

TEST_P(OperatorProperties, EnvelopePreserved) {
    const auto& mm = model();
    EnvelopeSampler s(mm.envelope, mm.grid, 42);
    const double t_lo = 0.5 * mm.envelope.lower().tau(), t_hi = mm.envelope.upper().tau() * 0.999;
    std::size_t violations = 0;
    for (int k = 0; k < 120; ++k) {
        const double t = s.uniform(t_lo, t_hi);
        const auto out = mm.op.apply(GapField{t, s.field(t)});
        const double lo = mm.envelope.delta1(t), hi = mm.envelope.delta2(t);
        for (double v : out.values) violations += (v < lo - 1e-9 || v > hi + 1e-9);
    }
    EXPECT_EQ(violations, 0u);
}

TEST_P(OperatorProperties, MonotoneInField) {
    const auto& mm = model();
    EnvelopeSampler s(mm.envelope, mm.grid, 43);
    std::size_t violations = 0;
    for (int k = 0; k < 120; ++k) {
        const double t = s.uniform(0.5 * mm.envelope.lower().tau(), mm.envelope.lower().tau());
        const auto th1 = s.profile();
        auto th2 = s.profile();
        for (std::size_t j = 0; j < th2.size(); ++j) th2[j] = std::max(th1[j], th2[j]);
        const auto a = mm.op.apply(GapField{t, s.field(t, th1)});
        const auto b = mm.op.apply(GapField{t, s.field(t, th2)});
        for (std::size_t j = 0; j < a.values.size(); ++j) violations += a.values[j] > b.values[j] + 1e-9;
    }
    EXPECT_EQ(violations, 0u);
}

TEST_P(OperatorProperties, MonotoneInTemperature) {
    const auto& mm = model();
    EnvelopeSampler s(mm.envelope, mm.grid, 44);
    std::size_t violations = 0;
    for (int k = 0; k < 120; ++k) {
        const double t1 = s.uniform(0.2 * mm.envelope.lower().tau(), mm.envelope.upper().tau());
        const double t2 = t1 * (1.0 + s.uniform(1e-3, 0.2));
        const auto u = s.field(t1);
        const auto a = mm.op.apply(GapField{t1, u});
        const auto b = mm.op.apply(GapField{t2, u});
        for (std::size_t j = 0; j < a.values.size(); ++j) violations += b.values[j] > a.values[j] + 1e-9;
    }
    EXPECT_EQ(violations, 0u);
}

TEST_P(OperatorProperties, Positivity) {
    const auto& mm = model();
    EnvelopeSampler s(mm.envelope, mm.grid, 45);
    std::size_t violations = 0;
    for (int k = 0; k < 120; ++k) {
        const double t = s.uniform(0.5 * mm.envelope.lower().tau(), mm.envelope.upper().tau());
        std::vector<double> u(mm.op.size(), 0.0);
        // a single positive spike still gives a positive output everywhere
        u[static_cast<std::size_t>(s.uniform(0.0, 0.999) * u.size())] = s.uniform(1e-4, 0.05);
        const auto out = mm.op.apply(GapField{t, u});
        for (double v : out.values) violations += !(v > 0.0);
    }
    EXPECT_EQ(violations, 0u);
}

INSTANTIATE_TEST_SUITE_P(Potentials, OperatorProperties, ::testing::Values(0, 1),
                         [](const auto& info) { return info.param == 0 ? "Constant" : "GaussianBump"; });
