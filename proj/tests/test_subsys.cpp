#include <gtest/gtest.h>

#include "oqs/ode.hpp"
#include "oqs/subsys.hpp"

#include <algorithm>

using namespace oqs;
using namespace oqs::subsys;

namespace {

const Decomposition d222{2, 2, 2};

cmat rand_state(const Decomposition& d, qcore::Rng& rng) { return qcore::random_density(d.dim(), rng).mat(); }

// random POVM on C^d with n elements
std::vector<cmat> random_povm(int d, int n, qcore::Rng& rng) {
    std::vector<cmat> w(n);
    cmat s = cmat::Zero(d, d);
    for (auto& x : w) {
        const cmat g = qcore::ginibre(d, 1 + static_cast<int>(rng.uniform() * d), rng);
        x = g * g.adjoint();
        s += x;
    }
    const cmat n2 = inv_sqrt_psd(s);
    for (auto& x : w) x = n2 * x * n2;
    return w;
}

}  // namespace

TEST(Fa, BasicExamples) {
    qcore::Rng rng(71);
    const cmat t = rand_state(d222, rng);
    EXPECT_NEAR(f_a(t, t, d222), 1.0, 1e-9);
    // same reduced operator on A, different gauge states
    const cmat ra = qcore::random_density(2, rng).mat();
    const cmat a = embed_ab(qcore::tensor(ra, qcore::random_density(2, rng).mat()), d222);
    const cmat b = embed_ab(qcore::tensor(ra, qcore::random_density(2, rng).mat()), d222);
    EXPECT_NEAR(f_a(a, b, d222), 1.0, 1e-9);
    EXPECT_LT(qcore::fidelity_op(a, b), 0.999);
    // all weight in K vs all in AB
    const Decomposition d{2, 2, 1};
    cmat k = cmat::Zero(5, 5);
    k(4, 4) = 1.0;
    const cmat ab = embed_ab(qcore::identity(4) / 4.0, d);
    EXPECT_EQ(f_a(k, ab, d), 0.0);
    EXPECT_NEAR(f_a(k, k, d), 1.0, 1e-15);
    EXPECT_THROW(f_a(qcore::identity(4) / 4.0, ab, d), dimension_error);
    EXPECT_THROW(f_a(EncodedState(qcore::DensityMatrix(k), d), EncodedState(qcore::DensityMatrix(cmat(qcore::identity(5) / 5.0)), Decomposition{1, 4, 1})),
                 shape_error);
}

TEST(Fa, MatchesDefinitionForm) {
    // F^A = F(tau*, ups*) with tau* = Tr_B P(tau) (x) |0><0| + w_K |0_K><0_K|
    qcore::Rng rng(72);
    for (int i = 0; i < 50; ++i) {
        const cmat t = rand_state(d222, rng), u = rand_state(d222, rng);
        auto star = [&](const cmat& r) {
            cmat s = embed_ab(qcore::tensor(reduced_a(r, d222), qcore::projector(qcore::ket(2, 0))), d222);
            s(4, 4) = weight_k(r, d222);
            return s;
        };
        EXPECT_NEAR(f_a(t, u, d222), qcore::fidelity_op(star(t), star(u)), 1e-9);
    }
}

TEST(Fa, SymmetryNormalizationTriangle) {
    qcore::Rng rng(73);
    for (int i = 0; i < 500; ++i) {
        const cmat t = rand_state(d222, rng), u = rand_state(d222, rng), p = rand_state(d222, rng);
        const double f = f_a(t, u, d222);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0 + 1e-9);
        EXPECT_NEAR(f, f_a(u, t, d222), 1e-9);
        EXPECT_NEAR(f_a(t, t, d222), 1.0, 1e-9);
        EXPECT_LE(fa_angle(t, u, d222), fa_angle(t, p, d222) + fa_angle(p, u, d222) + 1e-9);
    }
}

TEST(Fa, StrongConcavity) {
    qcore::Rng rng(74);
    for (int i = 0; i < 200; ++i) {
        const cmat t1 = rand_state(d222, rng), t2 = rand_state(d222, rng);
        const cmat u1 = rand_state(d222, rng), u2 = rand_state(d222, rng);
        const double p = rng.uniform(), q = rng.uniform();
        const double lhs = f_a(p * t1 + (1 - p) * t2, q * u1 + (1 - q) * u2, d222);
        const double rhs = std::sqrt(p * q) * f_a(t1, u1, d222) + std::sqrt((1 - p) * (1 - q)) * f_a(t2, u2, d222);
        EXPECT_GE(lhs, rhs - 1e-9);
    }
}

TEST(Fa, LocalMapMonotone) {
    qcore::Rng rng(75);
    for (int i = 0; i < 500; ++i) {
        const cmat t = rand_state(d222, rng), u = rand_state(d222, rng);
        const auto ks = local_channel(d222, random_channel(2, 2, rng), random_channel(2, 3, rng), random_channel(2, 2, rng));
        BlockKraus e{d222, ks};
        EXPECT_LT(e.completeness_error(), 1e-10);
        EXPECT_GE(f_a(e.apply(t), e.apply(u), d222), f_a(t, u, d222) - 1e-9);
    }
}

TEST(Fa, MinimumOverlap) {
    qcore::Rng rng(76);
    const cmat t = rand_state(d222, rng), u = rand_state(d222, rng);
    const double f = f_a(t, u, d222);
    for (int i = 0; i < 200; ++i) EXPECT_GE(fa_overlap(t, u, d222, random_povm(2, 2 + i % 3, rng)), f - 1e-9);
    // optimal measurement: eigenbasis of the Fuchs-Caves operator attains the bound
    const double wt = weight_ab(t, d222), wu = weight_ab(u, d222);
    const cmat ta = reduced_a(t, d222) / wt, ua = reduced_a(u, d222) / wu;
    const cmat st = qcore::sqrtm_psd(ta);
    const cmat m = inv_sqrt_psd(ta) * qcore::sqrtm_psd(st * ua * st) * inv_sqrt_psd(ta);
    const auto e = qcore::eigh(0.5 * (m + m.adjoint()));
    std::vector<cmat> povm;
    for (int k = 0; k < 2; ++k) povm.push_back(qcore::projector(e.vectors.col(k)));
    EXPECT_NEAR(fa_overlap(t, u, d222, povm), f, 1e-8);
}

TEST(BlockKraus, RandomSamplesSatisfyInvariants) {
    qcore::Rng rng(77);
    for (const Decomposition& d : {d222, Decomposition{2, 1, 2}, Decomposition{3, 2, 1}, Decomposition{2, 2, 0}}) {
        for (int i = 0; i < 20; ++i) {
            const auto k = random_block_kraus(d, 1 + i % 3, rng);
            EXPECT_NO_THROW(k.validate());
            cmat sc = cmat::Zero(d.db, d.db);
            cmat cd = cmat::Zero(d.dab(), d.dk);
            for (std::size_t j = 0; j < k.ops.size(); ++j) {
                sc += k.c_block(j).adjoint() * k.c_block(j);
                if (d.dk) cd += qcore::tensor(qcore::identity(d.da), k.c_block(j)).adjoint() * k.d_block(j);
            }
            EXPECT_LT((sc - qcore::identity(d.db)).cwiseAbs().maxCoeff(), 1e-10);
            if (d.dk) EXPECT_LT(cd.cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(BlockKraus, ValidationRejects) {
    qcore::Rng rng(78);
    auto k = random_block_kraus(d222, 2, rng);
    auto leak = k;
    leak.ops[0](4, 0) = 1e-3;
    EXPECT_THROW(leak.validate(), domain_error);
    auto nonfactor = k;
    nonfactor.ops[0](0, 0) += 0.1;
    EXPECT_THROW(nonfactor.validate(), domain_error);
    auto incomplete = k;
    incomplete.ops.pop_back();
    EXPECT_THROW(incomplete.validate(), domain_error);
}

TEST(BlockKraus, InitializationFreePreservesFa) {
    qcore::Rng rng(79);
    for (int i = 0; i < 100; ++i) {
        const auto e = random_block_kraus(d222, 2, rng, false);
        ASSERT_TRUE(e.initialization_free());
        const cmat rho = embed_ab(qcore::random_density(4, rng).mat(), d222);
        const cmat tilde = rand_state(d222, rng);
        EXPECT_LT((reduced_a(e.apply(tilde), d222) - reduced_a(tilde, d222)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(f_a(rho, e.apply(tilde), d222), f_a(rho, tilde, d222), 1e-9);
    }
}

TEST(BlockKraus, MonotoneUnderBlockedNoise) {
    const auto rep = check_fa_monotone_under_blocked_noise(d222, 500, 2024);
    EXPECT_EQ(rep.trials.size(), 500u);
    EXPECT_EQ(rep.violations, 0);
    EXPECT_LE(rep.worst_drop, 1e-9);
}

// transfer from K into AB raises the encoded fidelity
TEST(BlockKraus, EngineeredStrictIncrease) {
    const Decomposition d{2, 1, 1};
    auto kb = [](int i, int j) { return cmat(qcore::ket(3, i) * qcore::ket(3, j).adjoint()); };
    BlockKraus e{d, {kb(0, 0) + kb(1, 1), kb(0, 2)}};
    ASSERT_NO_THROW(e.validate());
    EXPECT_FALSE(e.initialization_free());
    const cmat rho = kb(0, 0);
    const cmat tilde = 0.5 * kb(1, 1) + 0.5 * kb(2, 2);
    EXPECT_NEAR(f_a(rho, tilde, d), 0.0, 1e-15);
    EXPECT_NEAR(f_a(rho, e.apply(tilde), d), std::sqrt(0.5), 1e-12);
}

TEST(Markov, NoiselessSubsystemConstruction) {
    qcore::Rng rng(80);
    const Decomposition d{2, 2, 2};
    auto block = [&](const cmat& ab, const cmat& k) {
        cmat m = cmat::Zero(6, 6);
        m.topLeftCorner(4, 4) = ab;
        m.bottomRightCorner(2, 2) = k;
        return m;
    };
    const cmat c = qcore::ginibre(2, 2, rng), g = qcore::ginibre(2, 2, rng);
    const cmat db = qcore::random_hermitian(2, rng), hk = qcore::random_hermitian(2, rng);
    const cmat l = block(qcore::tensor(qcore::identity(2), c), g);
    const cmat h = block(qcore::tensor(qcore::identity(2), db), hk);
    const auto grid = ode::uniform_grid(0.0, 1.0, 10);
    const auto rep = check_markov_correctable([&](double) { return h; }, {[&](double) { return l; }}, d,
                                              [](double) { return qcore::identity(6); }, grid);
    EXPECT_TRUE(rep.correctable);
    EXPECT_LT(std::max({rep.r1, rep.r2, rep.r3}), 1e-8);
    EXPECT_EQ(rep.points.size(), grid.size());
}

TEST(Markov, NoiseInsideKOnly) {
    const Decomposition d{2, 1, 2};
    cmat l = cmat::Zero(4, 4);
    l.bottomRightCorner(2, 2) = qcore::pauli_x();
    const auto rep = check_markov_correctable([](double) { return cmat(cmat::Zero(4, 4)); }, {[&](double) { return l; }}, d,
                                              [](double) { return qcore::identity(4); }, {0.0, 0.5, 1.0});
    EXPECT_TRUE(rep.correctable);
}

TEST(Markov, ViolationsDetected) {
    const Decomposition d{2, 1, 2};
    cmat l = cmat::Zero(4, 4);
    l.topLeftCorner(2, 2) = qcore::pauli_x();
    const auto zero = [](double) { return cmat(cmat::Zero(4, 4)); };
    const auto id = [](double) { return qcore::identity(4); };
    auto rep = check_markov_correctable(zero, {[&](double) { return l; }}, d, id, {0.0, 1.0});
    EXPECT_FALSE(rep.correctable);
    EXPECT_GT(rep.r1, 0.1);
    // leakage Hamiltonian between AB and K
    cmat h = cmat::Zero(4, 4);
    h(0, 2) = h(2, 0) = 1.0;
    rep = check_markov_correctable([&](double) { return h; }, {}, d, id, {0.0, 1.0});
    EXPECT_FALSE(rep.correctable);
    EXPECT_GT(rep.r3, 0.1);
    // Hamiltonian acting on A
    h.setZero();
    h.topLeftCorner(2, 2) = qcore::pauli_z();
    rep = check_markov_correctable([&](double) { return h; }, {}, d, id, {0.0, 1.0});
    EXPECT_GT(rep.r2, 0.1);
}

// a Hamiltonian on A is undone in the frame U(t) = exp(i t Z_A)
TEST(Markov, RotatingFrameCorrection) {
    const Decomposition d{2, 1, 2};
    cmat h = cmat::Zero(4, 4);
    h.topLeftCorner(2, 2) = 0.7 * qcore::pauli_z();
    const auto u = [&](double t) { return qcore::expm_skew(-h, t); };
    const auto grid = ode::uniform_grid(0.0, 2.0, 20);
    const auto rep = check_markov_correctable([&](double) { return h; }, {}, d, u, grid);
    EXPECT_TRUE(rep.correctable) << rep.r2;
    // a schedule that is too coarse for the derivative is refused
    const auto fast = [&](double t) { return qcore::expm_skew(-200.0 * h, t); };
    EXPECT_THROW(check_markov_correctable([&](double) { return cmat(200.0 * h); }, {}, d, fast, {0.0, 0.5, 1.0}),
                 numeric_error);
}

TEST(Markov, GaugeHamiltonianSatisfiesConditions) {
    qcore::Rng rng(81);
    const Decomposition d{2, 2, 2};
    const cmat ht = qcore::random_hermitian(6, rng);
    std::vector<cmat> ls{qcore::ginibre(6, 6, rng), qcore::ginibre(6, 6, rng)};
    const cmat hp = frame_hamiltonian_gauge(ht, ls, d);
    EXPECT_LT(qcore::herm_dev(hp), 1e-12);
    cmat s = cmat::Zero(6, 6);
    for (const auto& l : ls) s += l.adjoint() * l;
    const cmat k = ht + hp;
    EXPECT_LT((p_ab(d) * k * p_ab(d)).norm(), 1e-12);
    EXPECT_LT((p_ab(d) * (k + 0.5 * I1 * s) * p_k(d)).norm(), 1e-12);
}
