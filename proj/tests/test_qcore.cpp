#include <gtest/gtest.h>

#include "oqs/qcore.hpp"

using namespace oqs;
using namespace oqs::qcore;

namespace {

cvec bell() {
    cvec v = cvec::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return v;
}

}  // namespace

TEST(Tensor, IdentityAndZZ) {
    EXPECT_TRUE(tensor(identity(2), identity(2)).isApprox(identity(4)));
    const cmat zz = tensor(pauli_z(), pauli_z());
    EXPECT_NEAR(std::abs((zz * ket(4, 0))(0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs((zz * ket(4, 1))(1) + 1.0), 0.0, 1e-15);
}

TEST(Tensor, XXFixesBell) {
    const cvec b = bell();
    EXPECT_LT((tensor(pauli_x(), pauli_x()) * b - b).norm(), 1e-15);
}

TEST(Tensor, CapEnforced) {
    const cmat big = identity(128);
    EXPECT_THROW(tensor(big, identity(64)), dimension_error);
}

// Qubit 0 is the leftmost (most significant) factor.
TEST(Tensor, CanonicalOrdering) {
    const cvec v = tensor_vec(ket(2, 1), ket(2, 0));
    EXPECT_EQ(std::abs(v(2)), 1.0);
    const cmat x0 = embed(pauli_x(), {2, 2}, 0);
    EXPECT_EQ(std::abs((x0 * ket(4, 0))(2)), 1.0);
}

TEST(PartialTrace, ProductBellAndPure) {
    Rng rng(1);
    const auto a = random_density(2, rng);
    const auto b = random_density(3, rng);
    const DensityMatrix ab(tensor(a.mat(), b.mat()));
    EXPECT_LT((partial_trace(ab, {2, 3}, {0}).mat() - a.mat()).norm(), 1e-12);
    EXPECT_LT((partial_trace(ab, {2, 3}, {1}).mat() - b.mat()).norm(), 1e-12);
    const auto bl = DensityMatrix::pure(bell());
    EXPECT_LT((partial_trace(bl, {2, 2}, {0}).mat() - identity(2) / 2.0).norm(), 1e-15);
    const auto z = DensityMatrix::pure(ket(8, 0));
    EXPECT_LT((partial_trace(z, {2, 2, 2}, {0}).mat() - projector(ket(2, 0))).norm(), 1e-15);
    EXPECT_THROW(partial_trace(z, {2, 2}, {0}), shape_error);
}

TEST(PartialTrace, PreservesTrace) {
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        const cmat m = random_density(12, rng).mat();
        for (int s = 0; s < 3; ++s)
            EXPECT_NEAR(partial_trace_op(m, {2, 3, 2}, {s}).trace().real(), 1.0, 1e-12);
    }
}

TEST(Sqrtm, Examples) {
    rmat d = rmat::Zero(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 9;
    const cmat r = sqrtm_psd(d.cast<cplx>());
    EXPECT_NEAR(r(0, 0).real(), 2.0, 1e-14);
    EXPECT_NEAR(r(1, 1).real(), 3.0, 1e-14);
    EXPECT_TRUE(sqrtm_psd(identity(3)).isApprox(identity(3)));
    cmat m(2, 2);
    m << 2, 1, 1, 2;
    // oracle: eigenvalues 1, 3 on (1,-1)/sqrt2, (1,1)/sqrt2
    cmat expect(2, 2);
    const double a = (1.0 + std::sqrt(3.0)) / 2, b = (std::sqrt(3.0) - 1.0) / 2;
    expect << a, b, b, a;
    const cmat s = sqrtm_psd(m);
    EXPECT_LT((s - expect).norm(), 1e-12);
    EXPECT_LT((s * s - m).norm(), 1e-12);
}

TEST(Sqrtm, RejectsNegative) {
    cmat m = identity(2);
    m(1, 1) = -1e-3;
    EXPECT_THROW(sqrtm_psd(m), not_psd_error);
    m(1, 1) = -1e-10;
    EXPECT_NO_THROW(sqrtm_psd(m));
}

TEST(Sqrtm, RandomPsd) {
    Rng rng(3);
    for (int k = 0; k < 30; ++k) {
        const cmat g = ginibre(6, 4, rng);
        const cmat m = g * g.adjoint();
        const cmat s = sqrtm_psd(m);
        EXPECT_LT((s * s - m).norm() / m.norm(), 1e-9);
    }
}

TEST(Fidelity, Examples) {
    Rng rng(4);
    const auto r = random_density(3, rng);
    EXPECT_NEAR(fidelity(r, r), 1.0, 1e-9);
    const auto z0 = DensityMatrix::pure(ket(2, 0));
    const auto z1 = DensityMatrix::pure(ket(2, 1));
    EXPECT_NEAR(fidelity(z0, z1), 0.0, 1e-12);
    EXPECT_NEAR(fidelity(z0, DensityMatrix(identity(2) / 2.0)), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Fidelity, SymmetricAndOperational) {
    Rng rng(5);
    for (int k = 0; k < 10; ++k) {
        const auto a = random_density(2, rng);
        const auto b = random_density(2, rng);
        const double f = fidelity(a, b);
        EXPECT_NEAR(f, fidelity(b, a), 1e-10);
        // overlap of outcome distributions over projective measurements bounds F from above
        for (int j = 0; j < 200; ++j) {
            const cmat u = random_unitary(2, rng);
            double ov = 0.0;
            for (int i = 0; i < 2; ++i) {
                const cvec e = u.col(i);
                const double p = (e.adjoint() * a.mat() * e)(0).real();
                const double q = (e.adjoint() * b.mat() * e)(0).real();
                ov += std::sqrt(std::max(0.0, p * q));
            }
            EXPECT_GE(ov, f - 1e-9);
        }
    }
}

TEST(Expm, Examples) {
    const cmat u = expm_skew(pauli_z(), pi / 2);
    EXPECT_LT(std::abs(u(0, 0) - std::exp(-I1 * pi / 2.0)), 1e-14);
    EXPECT_LT(std::abs(u(1, 1) - std::exp(I1 * pi / 2.0)), 1e-14);
    EXPECT_LT((expm_skew(pauli_x(), 0.0) - identity(2)).norm(), 1e-15);
    EXPECT_LT((expm_skew(pauli_x(), pi) + identity(2)).norm(), 1e-14);
    cmat nh = pauli_x();
    nh(0, 1) = 2.0;
    EXPECT_THROW(expm_skew(nh, 1.0), domain_error);
}

TEST(Expm, GroupLawAndUnitarity) {
    Rng rng(6);
    for (int k = 0; k < 20; ++k) {
        const cmat h = random_hermitian(5, rng);
        const double s = rng.uniform(-2, 2), t = rng.uniform(-2, 2);
        const cmat us = expm_skew(h, s);
        EXPECT_LT((us * expm_skew(h, t) - expm_skew(h, s + t)).norm(), 1e-9);
        EXPECT_LT((us.adjoint() * us - identity(5)).norm(), 1e-10);
    }
}

TEST(Eigh, PaulisAndRandom) {
    const auto z = eigh(pauli_z());
    EXPECT_NEAR(z.values(0), -1.0, 1e-15);
    EXPECT_NEAR(std::abs(z.vectors(1, 0)), 1.0, 1e-15);
    const auto x = eigh(pauli_x());
    EXPECT_NEAR(x.values(1), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(x.vectors(0, 1) - x.vectors(1, 1)), 0.0, 1e-15);
    Rng rng(7);
    for (int k = 0; k < 20; ++k) {
        const cmat h = random_hermitian(8, rng);
        const auto e = eigh(h);
        const cmat rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
        EXPECT_LT((rec - h).norm(), 1e-9);
        EXPECT_LT((e.vectors.adjoint() * e.vectors - identity(8)).norm(), 1e-10);
        for (int i = 1; i < 8; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
        // cross-check with Eigen's own solver
        Eigen::SelfAdjointEigenSolver<cmat> ref(h);
        EXPECT_LT((ref.eigenvalues() - e.values).norm(), 1e-10);
    }
    cmat nh = pauli_x();
    nh(0, 1) = 3.0;
    EXPECT_THROW(eigh(nh), domain_error);
}

TEST(EigGeneral, Examples) {
    rmat d = rmat::Zero(3, 3);
    d.diagonal() << 1, 2, 3;
    auto ev = eig_general(d);
    std::vector<double> re;
    for (int i = 0; i < 3; ++i) re.push_back(ev(i).real());
    std::sort(re.begin(), re.end());
    EXPECT_NEAR(re[0], 1, 1e-12);
    EXPECT_NEAR(re[2], 3, 1e-12);
    rmat r(2, 2);
    r << 0, -0.7, 0.7, 0;
    ev = eig_general(r);
    EXPECT_NEAR(std::abs(ev(0).imag()), 0.7, 1e-12);
    EXPECT_NEAR(ev(0).imag() + ev(1).imag(), 0.0, 1e-12);
}

TEST(DensityMatrixType, Validation) {
    cmat m = identity(2);
    EXPECT_THROW(DensityMatrix{m}, domain_error);
    m = identity(2) / 2.0;
    m(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix{m}, domain_error);
    cmat neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    EXPECT_THROW(DensityMatrix{neg}, not_psd_error);
}

TEST(RngTest, Reproducible) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
    Rng c = split(42, 0), d = split(42, 1);
    EXPECT_NE(c.uniform(), d.uniform());
}
