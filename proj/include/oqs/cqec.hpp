// cqec.hpp - continuous error correction: single-qubit models, the Markovian
// bit-flip code, the 13-coefficient non-Markovian generator, weak-measurement
// versions of the correcting map.
#pragma once

#include "ode.hpp"
#include "qcore.hpp"

#include <algorithm>
#include <array>
#include <string_view>
#include <vector>

namespace oqs::cqec {

struct CqecParams {
    double lambda = 0.0;  // Markovian error rate
    double kappa = 0.0;   // correction rate
    double gamma = 0.0;   // system-bath coupling

    void validate() const {
        if (!(lambda >= 0.0) || !(kappa >= 0.0) || !(gamma >= 0.0))
            throw domain_error("CqecParams: rates must be >= 0");
    }
    double r() const {
        if (lambda == 0.0) throw domain_error("CqecParams: r undefined for lambda = 0");
        return kappa / lambda;
    }
    double R() const {
        if (gamma == 0.0) throw domain_error("CqecParams: R undefined for gamma = 0");
        return kappa / gamma;
    }
};

// ---------------------------------------------------------------- single qubit

inline double markov_asymptote(const CqecParams& p) {
    p.validate();
    return (p.kappa + p.lambda) / (p.kappa + 2.0 * p.lambda);
}

inline double markov_single(double alpha0, const CqecParams& p, double t) {
    const double a = markov_asymptote(p);
    return (alpha0 - a) * std::exp(-(p.kappa + 2.0 * p.lambda) * t) + a;
}

inline double nonmarkov_asymptote(const CqecParams& p) {
    p.validate();
    const double g2 = p.gamma * p.gamma, k2 = p.kappa * p.kappa;
    return (2.0 * g2 + k2) / (4.0 * g2 + k2);
}

struct SingleNm {
    double alpha = 1.0;
    double beta = 0.0;  // weight of the hidden -Y (x) X/2 term
};

inline SingleNm nonmarkov_single(const CqecParams& p, double t) {
    p.validate();
    const double g = p.gamma, k = p.kappa;
    const double den = 4.0 * g * g + k * k;
    if (den == 0.0) return {};
    const double s = std::sin(2.0 * g * t), c = std::cos(2.0 * g * t), e = std::exp(-k * t);
    const double a1 = k * g / den, a2 = 2.0 * g * g / den;
    SingleNm out;
    out.alpha = nonmarkov_asymptote(p) + e * (a1 * s + a2 * c);
    const double da = e * (-k * (a1 * s + a2 * c) + 2.0 * g * (a1 * c - a2 * s));
    // beta from the alpha equation
    out.beta = g > 0.0 ? (k * (1.0 - out.alpha) - da) / (2.0 * g) : 0.0;
    return out;
}

// (alpha, beta) from direct integration
inline std::vector<SingleNm> nonmarkov_single_ode(const CqecParams& p, const std::vector<double>& grid,
                                                  double tol = 1e-10) {
    p.validate();
    // affine system lifted to 3 dims: y = (alpha, beta, 1)
    rmat a = rmat::Zero(3, 3);
    a << -p.kappa, -2.0 * p.gamma, p.kappa,
         2.0 * p.gamma, -p.kappa, -p.gamma,
         0, 0, 0;
    rvec y0(3);
    y0 << 1.0, 0.0, 1.0;
    const auto ys = ode::rk4_linear_converged(a, y0, grid, tol);
    std::vector<SingleNm> out;
    for (const auto& y : ys) out.push_back({y(0), y(1)});
    return out;
}

// C for alpha(t) = 1 - C t^2 with the system projector |0><0|; system dimension = H.rows() / rho_b.rows()
inline double zeno_coefficient(const cmat& h, const cmat& rho_b) {
    qcore::require_hermitian(h, "zeno_coefficient");
    const auto db = rho_b.rows();
    if (db == 0 || h.rows() % db) throw dimension_error("zeno_coefficient: bath dimension does not divide H");
    const auto ds = h.rows() / db;
    const cmat p0 = qcore::projector(qcore::ket(ds, 0));
    const cmat r0 = qcore::tensor(p0, rho_b);
    const cmat pi = qcore::tensor(p0, qcore::identity(db));
    return ((h * h * r0).trace() - (h * pi * h * r0).trace()).real();
}

// fidelity with |0> after free evolution of |0><0| (x) rho_b
inline double survival(const cmat& h, const cmat& rho_b, double t) {
    const auto db = rho_b.rows();
    const auto ds = h.rows() / db;
    const cmat p0 = qcore::projector(qcore::ket(ds, 0));
    const cmat u = qcore::expm_skew(h, t);
    const cmat r = u * qcore::tensor(p0, rho_b) * u.adjoint();
    return (qcore::tensor(p0, qcore::identity(db)) * r).trace().real();
}

// ---------------------------------------------------------------- Markovian bit-flip code

struct MarkovBitflipState {
    double a = 1.0, b = 0.0, c = 0.0, d = 0.0;

    void validate() const {
        if (std::abs(a + b + c + d - 1.0) > 1e-9) throw domain_error("MarkovBitflipState: weights must sum to 1");
        for (double w : {a, b, c, d})
            if (w < -1e-9 || w > 1.0 + 1e-9) throw domain_error("MarkovBitflipState: weight outside [0, 1]");
    }
};

inline rmat markov_bitflip_generator(const CqecParams& p) {
    p.validate();
    const double l = p.lambda, k = p.kappa;
    rmat m(4, 4);
    m << -3 * l, l + k, 0, 0,
         3 * l, -(3 * l + k), 2 * l, 0,
         0, 2 * l, -(3 * l + k), 3 * l,
         0, 0, l + k, -3 * l;
    return m;
}

inline std::vector<MarkovBitflipState> markov_bitflip(const CqecParams& p, const MarkovBitflipState& s0,
                                                      const std::vector<double>& grid, double tol = 1e-10) {
    s0.validate();
    rvec y0(4);
    y0 << s0.a, s0.b, s0.c, s0.d;
    const auto ys = ode::rk4_linear_converged(markov_bitflip_generator(p), y0, grid, tol);
    std::vector<MarkovBitflipState> out;
    for (const auto& y : ys) out.push_back({y(0), y(1), y(2), y(3)});
    return out;
}

// b + c for a start inside the code space
inline double markov_outside_weight(const CqecParams& p, double t) {
    const double s = 4.0 * p.lambda + p.kappa;
    return 3.0 * p.lambda / s * (1.0 - std::exp(-s * t));
}

// ---------------------------------------------------------------- non-Markovian bit-flip code

inline constexpr int nm_dim = 13;

// coefficient C_{lmn,pqr}, in generator order
inline constexpr std::array<std::string_view, nm_dim> nm_labels = {
    "000,000", "100,000", "110,000", "100,010", "100,100", "110,001", "111,000",
    "110,100", "110,110", "110,011", "111,100", "111,110", "111,111"};

struct NmCoeffs {
    std::array<double, nm_dim> c{};

    static NmCoeffs codeword() {
        NmCoeffs x;
        x.c[0] = 1.0;
        return x;
    }
};

// gamma * (integer pattern + R on the correction entries)
inline rmat nm_generator(const CqecParams& p) {
    const double R = p.R();
    static const int base[nm_dim][nm_dim] = {
        {0, -6, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {1, 0, -2, -2, -1, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, 2, 0, 0, 0, -1, -1, -2, 0, 0, 0, 0, 0},
        {0, 2, 0, 0, 0, -2, 0, -2, 0, 0, 0, 0, 0},
        {0, 2, 0, 0, 0, 0, 0, -4, 0, 0, 0, 0, 0},
        {0, 0, 1, 2, 0, 0, 0, 0, 0, -2, -1, 0, 0},
        {0, 0, 3, 0, 0, 0, 0, 0, 0, 0, -3, 0, 0},
        {0, 0, 1, 1, 1, 0, 0, 0, -1, -1, -1, 0, 0},
        {0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0, -2, 0},
        {0, 0, 0, 0, 0, 2, 0, 2, 0, 0, 0, -2, 0},
        {0, 0, 0, 0, 0, 1, 1, 2, 0, 0, 0, -2, 0},
        {0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 2, 0, -1},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 6, 0}};
    // coefficients of R
    static const int corr[nm_dim][nm_dim] = {
        {0, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, 0, 0, 0, -3, 0, 0, 0, 0, 0, 0, 0},
        {0, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0},
        {0, 0, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, 0, 0},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, 0},
        {0, 0, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0}};
    rmat m(nm_dim, nm_dim);
    for (int i = 0; i < nm_dim; ++i)
        for (int j = 0; j < nm_dim; ++j) m(i, j) = p.gamma * (base[i][j] + R * corr[i][j]);
    return m;
}

// eigenvalues sorted by modulus
inline std::vector<cplx> nm_eigenvalues(const CqecParams& p) {
    const Eigen::VectorXcd ev = qcore::eig_general(nm_generator(p));
    std::vector<cplx> v(ev.data(), ev.data() + ev.size());
    std::stable_sort(v.begin(), v.end(), [](cplx a, cplx b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        return a.imag() < b.imag();
    });
    return v;
}

inline std::vector<NmCoeffs> nm_bitflip_evolve(const CqecParams& p, const NmCoeffs& c0, const std::vector<double>& grid,
                                               double tol = 1e-8) {
    rvec y0(nm_dim);
    for (int i = 0; i < nm_dim; ++i) y0(i) = c0.c[i];
    const auto ys = ode::rk4_linear_converged(nm_generator(p), y0, grid, tol);
    std::vector<NmCoeffs> out(ys.size());
    for (std::size_t k = 0; k < ys.size(); ++k)
        for (int i = 0; i < nm_dim; ++i) out[k].c[i] = ys[k](i);
    return out;
}

// long-time approximation of C_{000,000}
inline double nm_slow_fidelity(const CqecParams& p, double t) {
    const double R = p.R(), g = p.gamma;
    return 0.5 * (1.0 + std::exp(-144.0 * g * t / (R * R * R)) * std::cos(24.0 * g * t / (R * R)));
}

// ---------------------------------------------------------------- weak correcting maps

inline double epsilon_prime(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw domain_error("weak map: eps must lie in (0, 1)");
    return (1.0 - std::sqrt(1.0 - eps * eps)) / eps;
}

// sqrt((I + s eps X)/2)
inline cmat weak_x_root(double eps, int s) {
    const double p = std::sqrt((1.0 + eps) / 2.0), m = std::sqrt((1.0 - eps) / 2.0);
    return 0.5 * (p + m) * qcore::identity(2) + 0.5 * s * (p - m) * qcore::pauli_x();
}

// (I + s i eps' Y) / sqrt(1 + eps'^2)
inline cmat weak_y_rotation(double ep, int s) {
    return (qcore::identity(2) + double(s) * I1 * ep * qcore::pauli_y()) / std::sqrt(1.0 + ep * ep);
}

inline std::vector<cmat> weak_ec_single_kraus(double eps) {
    const double ep = epsilon_prime(eps);
    return {weak_y_rotation(ep, 1) * weak_x_root(eps, 1), weak_y_rotation(ep, -1) * weak_x_root(eps, -1)};
}

inline cmat apply_kraus(const std::vector<cmat>& ks, const cmat& rho) {
    cmat out = cmat::Zero(rho.rows(), rho.cols());
    for (const auto& k : ks) out += k * rho * k.adjoint();
    return out;
}

inline qcore::DensityMatrix weak_ec_map_single(const qcore::DensityMatrix& rho, double eps) {
    if (rho.dim() != 2) throw dimension_error("weak_ec_map_single: qubit state required");
    return qcore::DensityMatrix::normalized(apply_kraus(weak_ec_single_kraus(eps), rho.mat()));
}

// weak correction on qubit q (0 = most significant) of the three-qubit code
inline std::vector<cmat> weak_ec_bitflip_kraus(double eps, int q) {
    if (q < 0 || q > 2) throw domain_error("weak_ec_bitflip_kraus: qubit index 0..2");
    const double ep = epsilon_prime(eps);
    const std::vector<int> dims{2, 2, 2};
    // projectors on the other two qubits agreeing on 0 / on 1 / disagreeing
    cmat same0 = qcore::identity(1), same1 = qcore::identity(1);
    for (int i = 0; i < 3; ++i) {
        const cmat z0 = i == q ? qcore::identity(2) : qcore::projector(qcore::ket(2, 0));
        const cmat z1 = i == q ? qcore::identity(2) : qcore::projector(qcore::ket(2, 1));
        same0 = qcore::tensor(same0, z0);
        same1 = qcore::tensor(same1, z1);
    }
    const cmat diff = qcore::identity(8) - same0 - same1;
    std::vector<cmat> ks;
    for (int s : {1, -1}) {
        const cmat m = qcore::embed(weak_x_root(eps, s), dims, q) * (same0 + same1) + diff / std::sqrt(2.0);
        const cmat u = qcore::embed(weak_y_rotation(ep, s), dims, q) * same0 +
                       qcore::embed(weak_y_rotation(ep, -s), dims, q) * same1 + diff;
        ks.push_back(u * m);
    }
    return ks;
}

inline cmat weak_ec_bitflip_apply(const cmat& rho, double eps) {
    if (rho.rows() != 8 || rho.cols() != 8) throw dimension_error("weak_ec_map_bitflip: three-qubit state required");
    cmat r = rho;
    for (int q = 0; q < 3; ++q) r = apply_kraus(weak_ec_bitflip_kraus(eps, q), r);
    return r;
}

inline qcore::DensityMatrix weak_ec_map_bitflip(const qcore::DensityMatrix& rho, double eps) {
    if (rho.dim() != 8) throw dimension_error("weak_ec_map_bitflip: three-qubit state required");
    return qcore::DensityMatrix::normalized(weak_ec_bitflip_apply(rho.mat(), eps));
}

// Kraus operators of the three-qubit composite weak map (8 of them)
inline std::vector<cmat> weak_ec_bitflip_composite_kraus(double eps) {
    std::vector<cmat> ks{qcore::identity(8)};
    for (int q = 0; q < 3; ++q) {
        std::vector<cmat> next;
        for (const auto& a : weak_ec_bitflip_kraus(eps, q))
            for (const auto& k : ks) next.push_back(a * k);
        ks = std::move(next);
    }
    return ks;
}

inline std::vector<cmat> strong_bitflip_kraus() {
    auto kb = [](int i, int j) { return cmat(qcore::ket(8, i) * qcore::ket(8, j).adjoint()); };
    return {kb(0, 0) + kb(7, 7), kb(0, 4) + kb(7, 3), kb(0, 2) + kb(7, 5), kb(0, 1) + kb(7, 6)};
}

inline cmat strong_bitflip_map(const cmat& rho) { return apply_kraus(strong_bitflip_kraus(), rho); }

// Choi matrix sum_ij |i><j| (x) E(|i><j|)
inline cmat choi_matrix(const std::vector<cmat>& ks) {
    if (ks.empty()) throw shape_error("choi_matrix: no Kraus operators");
    const auto d = ks.front().cols();
    const auto dout = ks.front().rows();
    cmat c = cmat::Zero(d * dout, d * dout);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            cmat e = cmat::Zero(d, d);
            e(i, j) = 1.0;
            c.block(i * dout, j * dout, dout, dout) = apply_kraus(ks, e);
        }
    return c;
}

inline double trace_preservation_error(const std::vector<cmat>& ks) {
    cmat s = cmat::Zero(ks.front().cols(), ks.front().cols());
    for (const auto& k : ks) s += k.adjoint() * k;
    return (s - qcore::identity(s.rows())).cwiseAbs().maxCoeff();
}

}  // namespace oqs::cqec
