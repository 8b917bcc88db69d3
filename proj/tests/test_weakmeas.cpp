#include <gtest/gtest.h>

#include "oqs/weakmeas.hpp"

using namespace oqs;
using namespace oqs::qcore;
using namespace oqs::weakmeas;

namespace {

// Random positive commuting pair with M1^2 + M2^2 = I.
TwoOutcomeMeasurement random_pair(Eigen::Index d, Rng& rng) {
    const cmat u = random_unitary(d, rng);
    rvec a(d), b(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double p = rng.uniform();
        a(i) = std::sqrt(p);
        b(i) = std::sqrt(1.0 - p);
    }
    return {u * a.cast<cplx>().asDiagonal() * u.adjoint(), u * b.cast<cplx>().asDiagonal() * u.adjoint()};
}

double prop_residual(const cmat& a, const cmat& b) {
    // min_c |a - c b| / |a|
    const cplx c = (b.adjoint() * a).trace() / (b.adjoint() * b).trace();
    return (a - c * b).norm() / a.norm();
}

}  // namespace

TEST(Projective, BalancedAtZero) {
    const auto m = diagonal_projective();
    const auto [pp, pm] = projective_step(m.m1, m.m2, 0.0);
    EXPECT_LT((pp - identity(2) / std::sqrt(2.0)).norm(), 1e-15);
    EXPECT_LT((pm - identity(2) / std::sqrt(2.0)).norm(), 1e-15);
}

TEST(Projective, CompletenessAndLimit) {
    const auto m = diagonal_projective();
    for (double e : {0.01, 0.3, 2.0}) {
        const auto [pp, pm] = projective_step(m.m1, m.m2, e);
        EXPECT_LT((pp.adjoint() * pp + pm.adjoint() * pm - identity(2)).norm(), 1e-12);
    }
    EXPECT_LT((projective_op(m.m1, m.m2, 30.0) - m.m2).norm(), 1e-12);
    EXPECT_LT((projective_op(m.m1, m.m2, -30.0) - m.m1).norm(), 1e-12);
    EXPECT_THROW(projective_step(m.m1, m.m1, 0.1), domain_error);
}

TEST(Projective, CompositionLaw) {
    Rng rng(11);
    const cmat u = random_unitary(3, rng);
    const cmat p1 = u * projector(ket(3, 0)) * u.adjoint();
    const cmat p2 = identity(3) - p1;
    for (int k = 0; k < 100; ++k) {
        const double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
        const cmat lhs = projective_op(p1, p2, x) * projective_op(p1, p2, y);
        const cmat rhs = composition_constant(x, y) * projective_op(p1, p2, x + y);
        EXPECT_LT((lhs - rhs).norm(), 1e-12);
    }
}

TEST(WeakStep, CompletenessGrid) {
    Rng rng(12);
    const auto m = random_pair(3, rng);
    for (double eps : {0.01, 0.05, 0.1})
        for (double x = -5.0; x <= 5.0 + 1e-12; x += 0.25) {
            const auto [a, b] = weak_step_operators(m, x, eps);
            EXPECT_LT((a.adjoint() * a + b.adjoint() * b - identity(3)).cwiseAbs().maxCoeff(), 1e-10);
        }
}

TEST(WeakStep, ZeroStepAndNearIdentity) {
    Rng rng(13);
    const auto m = random_pair(2, rng);
    const cmat z = step_operator(m, 0.7, 0.0);
    EXPECT_LT((z.adjoint() * z - identity(2) / 2.0).norm(), 1e-14);
    const auto [a, b] = weak_step_operators(m, 0.4, 1e-3);
    EXPECT_LT((std::sqrt(2.0) * a - identity(2)).norm(), 2e-3);
    EXPECT_LT((std::sqrt(2.0) * b - identity(2)).norm(), 2e-3);
}

TEST(WeakStep, EffectiveOperator) {
    Rng rng(14);
    const auto m = random_pair(3, rng);
    const double x = 0.9;
    const cmat expect = sqrtm_psd((identity(3) + std::tanh(x) * (m.m2 * m.m2 - m.m1 * m.m1)) / 2.0);
    EXPECT_LT((effective_operator(m, x) - expect).norm(), 1e-12);
    EXPECT_LT((step_operator(m, 0.0, x) - expect).norm(), 1e-12);
}

TEST(WeakStep, ChainProportional) {
    Rng rng(15);
    const auto m = random_pair(3, rng);
    const auto rho = random_density(3, rng);
    const cmat chain = step_operator(m, 0.3, 0.4) * step_operator(m, 0.0, 0.3);
    const cmat direct = step_operator(m, 0.0, 0.7);
    EXPECT_LT(prop_residual(chain, direct), 1e-9);
    const cmat s1 = chain * rho.mat() * chain.adjoint();
    const cmat s2 = direct * rho.mat() * direct.adjoint();
    EXPECT_LT((s1 / s1.trace() - s2 / s2.trace()).norm(), 1e-9);
}

TEST(WeakStep, RejectsUnsupported) {
    TwoOutcomeMeasurement nc{pauli_x() / std::sqrt(2.0), pauli_z() / std::sqrt(2.0)};
    EXPECT_THROW(weak_step_operators(nc, 0.0, 0.1), unsupported_error);
    TwoOutcomeMeasurement bad{identity(2), identity(2)};
    EXPECT_THROW(weak_step_operators(bad, 0.0, 0.1), domain_error);
}

TEST(Martingale, DifferenceEquationExact) {
    Rng rng(16);
    for (int k = 0; k < 100; ++k) {
        const double xc = rng.uniform(1.0, 8.0);
        const double x = rng.uniform(-xc, xc);
        const double e = rng.uniform(1e-3, 0.5);
        const double p = absorb_probability(x, xc);
        const double pp = absorb_probability(x + e, xc), pm = absorb_probability(x - e, xc);
        const double rhs = 0.5 * (pp + pm) + std::tanh(e) * std::tanh(x) * 0.5 * (pp - pm);
        EXPECT_NEAR(p, rhs, 1e-12);
    }
}

TEST(Walk, StateTrajectory) {
    Rng rng(17);
    const auto m = random_pair(3, rng);
    const auto rho = random_density(3, rng);
    std::vector<int> steps;
    int k = 0;
    for (int i = 0; i < 200; ++i) {
        const int s = rng.uniform() < 0.5 ? 1 : -1;
        steps.push_back(s);
        k += s;
    }
    const double eps = 0.05, x0 = 0.2;
    const auto out = apply_steps(rho, m, x0, eps, steps);
    // M(x0 + k eps) M(x0)^{-1} rho ... : from x0 != 0 the effective map is M(x0, k eps)
    const cmat me = step_operator(m, x0, k * eps);
    const cmat s = me * rho.mat() * me.adjoint();
    EXPECT_LT((out.mat() - s / s.trace()).norm(), 1e-9);
    const auto out0 = apply_steps(rho, m, 0.0, eps, steps);
    const cmat m0 = effective_operator(m, k * eps);
    const cmat s0 = m0 * rho.mat() * m0;
    EXPECT_LT((out0.mat() - s0 / s0.trace()).norm(), 1e-9);
}

TEST(Walk, EigenstateAlwaysOutcome1) {
    const auto m = diagonal_projective();
    // wrong-boundary exits are a gambler's-ruin tail ~ exp(-2X); X = 6 puts it near 6e-6
    WalkConfig cfg;
    cfg.x_cut = 6.0;
    Walker w(m, cfg);
    Rng rng(18);
    const auto rho = diagonal_state(1.0);
    for (int t = 0; t < 50; ++t) EXPECT_EQ(w.run(rho, rng).outcome_index, 1);
}

TEST(Walk, Reproducible) {
    Rng rng(19);
    const auto m = random_pair(2, rng);
    const auto rho = random_density(2, rng);
    WalkConfig cfg;
    cfg.seed = 99;
    cfg.x_cut = 4.0;
    const auto a = run_walk(rho, m, cfg);
    const auto b = run_walk(rho, m, cfg);
    EXPECT_EQ(a.outcome_index, b.outcome_index);
    EXPECT_EQ(a.steps, b.steps);
    EXPECT_EQ(a.final_x, b.final_x);
    EXPECT_EQ((a.final_state.mat() - b.final_state.mat()).norm(), 0.0);
    EXPECT_GE(std::abs(a.final_x), cfg.x_cut - 1e-9);
}

TEST(Walk, FinalStateMatchesEffectiveOperator) {
    Rng rng(20);
    const auto m = random_pair(2, rng);
    const auto rho = random_density(2, rng);
    WalkConfig cfg;
    cfg.seed = 5;
    cfg.x_cut = 2.0;
    const auto o = run_walk(rho, m, cfg);
    const cmat me = effective_operator(m, o.final_x);
    const cmat s = me * rho.mat() * me;
    EXPECT_LT((o.final_state.mat() - s / s.trace()).norm(), 1e-9);
}

TEST(Walk, MaxStepsReported) {
    const auto m = diagonal_projective();
    WalkConfig cfg;
    cfg.max_steps = 3;
    cfg.x_cut = 5.0;
    EXPECT_THROW(run_walk(diagonal_state(0.5), m, cfg), numeric_error);
    cfg.epsilon = 0.7;
    EXPECT_THROW(run_walk(diagonal_state(0.5), m, cfg), domain_error);
}

TEST(Walk, OutcomeStatisticsSmall) {
    // coarse version of the acceptance run
    const auto m = diagonal_projective();
    WalkConfig cfg;
    cfg.epsilon = 0.1;
    cfg.x_cut = 6.0;
    Walker w(m, cfg);
    const auto rho = diagonal_state(0.7);
    const int n = 2000;
    int c1 = 0;
    for (int t = 0; t < n; ++t) {
        Rng r = split(7, t);
        c1 += w.run(rho, r).outcome_index == 1;
    }
    const double sig = std::sqrt(0.21 / n);
    EXPECT_NEAR(static_cast<double>(c1) / n, 0.7, 3 * sig);
}

TEST(MultiOutcome, VertexUniformAndReduction) {
    Rng rng(21);
    const auto m = random_pair(3, rng);
    std::vector<cmat> l{m.m1, m.m2};
    EXPECT_LT((multi_outcome_effective(l, {{1.0, 0.0}}) - m.m1).norm(), 1e-12);
    EXPECT_LT((multi_outcome_effective(l, {{0.0, 1.0}}) - m.m2).norm(), 1e-12);
    for (double x : {-1.3, 0.2, 2.5}) {
        const double t = std::tanh(x);
        const cmat ms = multi_outcome_effective(l, {{(1 - t) / 2, (1 + t) / 2}});
        EXPECT_LT(prop_residual(ms, effective_operator(m, x)), 1e-12);
    }
    const int n = 4;
    std::vector<cmat> u(n, identity(2) / std::sqrt(double(n)));
    const cmat mu = multi_outcome_effective(u, {{0.25, 0.25, 0.25, 0.25}});
    const double f = 1.0 + n * (n - 1.0) / n;
    EXPECT_LT((mu - std::sqrt(f / n) * identity(2)).norm(), 1e-12);
    EXPECT_THROW(multi_outcome_effective(l, {{0.5, 0.4}}), domain_error);
    EXPECT_THROW(multi_outcome_effective({m.m1, m.m1}, {{0.5, 0.5}}), domain_error);
}

TEST(Walk, InteriorStartSmall) {
    const auto m = diagonal_projective();
    const DensityMatrix mixed(identity(2) / 2.0);
    for (double x0 : {-1.0, 1.0}) {
        WalkConfig cfg;
        cfg.epsilon = 0.1;
        cfg.x_cut = 3.0;
        cfg.x0 = x0;
        Walker w(m, cfg);
        const auto rho = state_at(mixed, m, x0);
        const int n = 2000;
        int up = 0;
        for (int t = 0; t < n; ++t) {
            Rng r = split(8, t);
            up += w.run(rho, r).outcome_index == 2;
        }
        const double p = absorb_probability(x0, cfg.x_cut);
        EXPECT_NEAR(static_cast<double>(up) / n, p, 3 * std::sqrt(p * (1 - p) / n));
    }
}
