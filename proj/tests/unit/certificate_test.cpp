#include <gtest/gtest.h>

#include <cmath>

#include "bcsgap/sampling.hpp"
#include "fixtures.hpp"

using namespace bcsgap;

namespace {
const Model& m() { return fixture::constant_model(); }

AlphaOptions fast() {
    AlphaOptions o;
    o.t_samples = 16;
    o.x_samples = 8;
    o.confirm = false;
    return o;
}
}  // namespace

TEST(AlphaIntegrand, FirstTermIsOneAtTheEnvelopeTop) {
    const double u2 = m().params.u_upper();
    const Potential top(ConstantPotential{u2}, m().params);
    for (double t : {0.01, 0.03, 0.04}) {
        const auto a = alpha_terms(t, 0.3, m().envelope.delta2(t), 0.0, top, m().grid);
        EXPECT_NEAR(a.first, 1.0, 1e-12) << t;
        EXPECT_EQ(a.second, 0.0);
    }
}

TEST(AlphaIntegrand, FirstTermScalesWithCoupling) {
    const double u2 = m().params.u_upper();
    const Potential p(ConstantPotential{0.8 * u2}, m().params);
    const double t = 0.03;
    EXPECT_NEAR(alpha_terms(t, 0.1, m().envelope.delta2(t), 0.0, p, m().grid).first, 0.8, 1e-12);
}

TEST(AlphaIntegrand, SecondTermVanishesWithSmallGap) {
    const double eps = m().params.epsilon_cutoff();
    const double t = 0.037;
    double prev = INFINITY;
    for (double r : {1.0, 0.1, 0.01, 0.0}) {
        const double second = alpha_terms(t, 0.1, 0.0, r * eps, m().potential, m().grid).second;
        EXPECT_LT(second, prev);
        prev = second;
    }
    EXPECT_EQ(prev, 0.0);
    // Delta_2(tau)/eps <= 0.1 keeps it below 0.005 U_2 ln(hw/eps)
    const double bound = 0.005 * m().params.u_upper() * m().params.log_span();
    EXPECT_LE(alpha_terms(0.01, 0.1, 0.0, 0.1 * eps, m().potential, m().grid).second, bound);
}

TEST(AlphaIntegrand, DomainChecks) {
    EXPECT_THROW(alpha_integrand(0.02, 0.1, 0.03, m().potential, m().envelope, m().grid), DomainError);
    EXPECT_THROW(alpha_integrand(0.03, 2.0, 0.03, m().potential, m().envelope, m().grid), DomainError);
    EXPECT_GT(alpha_integrand(0.035, 0.1, 0.034, m().potential, m().envelope, m().grid), 1.0);
}

TEST(ComputeAlpha, NonIncreasingInTau) {
    const double tc = fixture::constant_tc();
    const double t1 = m().envelope.lower().tau();
    const auto a = compute_alpha(t1, tc, m().potential, m().envelope, m().grid, fast());
    const auto b = compute_alpha(0.5 * (t1 + tc), tc, m().potential, m().envelope, m().grid, fast());
    EXPECT_GE(a.alpha, b.alpha);
    EXPECT_LT(a.first_term_max, 1.0);
    EXPECT_LT(b.first_term_max, 1.0);
}

TEST(ComputeAlpha, RefinementNeverLowersTheLatticeMax) {
    const double tc = fixture::constant_tc();
    const double tau = 0.036;
    auto coarse = fast();
    coarse.refine_sweeps = 0;
    const auto a = compute_alpha(tau, tc, m().potential, m().envelope, m().grid, coarse);
    auto full = fast();
    full.confirm = true;
    const auto b = compute_alpha(tau, tc, m().potential, m().envelope, m().grid, full);
    EXPECT_GE(b.alpha, a.alpha);
    EXPECT_GE(b.max_t, tau);
    EXPECT_LE(b.max_t, tc);
}

TEST(ComputeAlpha, BoundedBelowByLinearRowSumAtTc) {
    // alpha >= max_x int U tanh(xi/2T_c)/xi >= Perron root at T_c = 1
    const double tc = fixture::constant_tc();
    const double rows = max_row_sum(m().op, tc);
    EXPECT_GE(rows, 1.0 - 1e-9);
    for (double tau : {0.0345, 0.036, 0.0378}) {
        const auto a = compute_alpha(tau, tc, m().potential, m().envelope, m().grid, fast());
        EXPECT_GE(a.alpha, rows * (1.0 - 1e-12)) << tau;
    }
}

TEST(ComputeAlpha, EmptyIntervalRejected) {
    const double tc = fixture::constant_tc();
    EXPECT_THROW(compute_alpha(tc, tc, m().potential, m().envelope, m().grid), InvalidParameter);
    EXPECT_THROW(compute_alpha(1.2 * tc, tc, m().potential, m().envelope, m().grid), InvalidParameter);
    CertificateOptions o;
    o.tau = tc;
    EXPECT_THROW(search_certificate(m().potential, m().params, m().op, m().envelope, tc, o), InvalidParameter);
}

TEST(SearchCertificate, FailureReport) {
    CertificateOptions o;
    o.tau_candidates = 4;
    o.alpha = fast();
    o.margin = 0.03;
    const double tc = fixture::constant_tc();
    const auto c = search_certificate(m().potential, m().params, m().op, m().envelope, tc, o);
    EXPECT_FALSE(c.success);
    EXPECT_GE(c.alpha, 1.0);
    EXPECT_GT(c.delta2_tc_over_epsilon, 1.0);
    EXPECT_GE(c.row_sum_at_tc, 1.0 - 1e-9);
    EXPECT_EQ(c.epsilon, m().params.epsilon_cutoff());
    const auto text = c.report().str();
    for (const char* key : {"tau = ", "epsilon = ", "alpha = ", "max_T = ", "max_x = ", "delta2_at_tau = ",
                            "best_alpha = ", "status = failed"})
        EXPECT_NE(text.find(key), std::string::npos) << key;
}

TEST(SearchCertificate, NearTopCouplingStillFails) {
    auto cfg = fixture::constant_config(0.30);
    cfg.params.u_lower = 0.29;
    cfg.params.u_upper = 0.30 + 1e-6;
    cfg.u_lower_given = cfg.u_upper_given = true;
    const auto mm = build_model(cfg);
    const auto tc = critical_temperature(mm->op, mm->envelope).t_c;
    CertificateOptions o;
    o.tau_candidates = 6;
    o.alpha = fast();
    const auto c = search_certificate(mm->potential, mm->params, mm->op, mm->envelope, tc, o);
    EXPECT_FALSE(c.success);
    EXPECT_GE(c.alpha, c.row_sum_at_tc * (1.0 - 1e-12));
    // Delta_2(T_c) is tiny here, yet the second term at T_c cannot drop below the row-sum deficit
    EXPECT_LT(c.delta2_tc_over_epsilon, 0.1);
}

TEST(Contraction, LipschitzBoundOnEnvelopePairs) {
    const double tc = fixture::constant_tc();
    const double tau = m().envelope.lower().tau();
    const auto a = compute_alpha(tau, tc, m().potential, m().envelope, m().grid, fast());
    EnvelopeSampler s(m().envelope, m().grid, 42);
    double worst = 0.0;
    std::vector<double> au(m().op.size()), av(m().op.size()), scratch;
    for (int k = 0; k < 200; ++k) {
        const double t = s.uniform(tau, tc);
        const auto u = s.field(t), v = s.field(t);
        const double d = sup_distance(u, v);
        if (d == 0.0) continue;
        m().op.apply(u, t, au, scratch);
        m().op.apply(v, t, av, scratch);
        worst = std::max(worst, sup_distance(au, av) / d);
    }
    EXPECT_LE(worst, a.alpha);
}
