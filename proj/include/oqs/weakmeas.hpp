// weakmeas.hpp - two-outcome measurements as random walks of weak measurements.
//
// Sign convention: the walk coordinate x runs toward outcome 2 as x -> +inf,
// P(x) = sqrt((1 - tanh x)/2) P1 + sqrt((1 + tanh x)/2) P2.

#pragma once

#include "qcore.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace oqs::weakmeas {

using qcore::DensityMatrix;

struct TwoOutcomeMeasurement {
    cmat m1;
    cmat m2;
};

// x0 is the coordinate at which the walk starts; rho0 passed to the walk is the state
// held there, i.e. M(x0) rho M(x0) normalized for a reference state rho at x = 0.
struct WalkConfig {
    double epsilon = 0.05;
    double x_cut = 6.0;
    double x0 = 0.0;
    long max_steps = 10'000'000;
    std::uint64_t seed = 0;
};

struct WalkOutcome {
    int outcome_index = 0;  // 1 or 2
    double final_x = 0.0;
    long steps = 0;
    DensityMatrix final_state;
};

struct SimplexPoint {
    std::vector<double> s;
};

// ------------------------------------------------------------ projective case

inline void check_projector_pair(const cmat& p1, const cmat& p2) {
    qcore::require_hermitian(p1, "projective_step");
    qcore::require_hermitian(p2, "projective_step");
    if (p1.rows() != p2.rows()) throw shape_error("projective_step: projector dimensions differ");
    const auto d = p1.rows();
    const double tol = 1e-10;
    if ((p1 * p1 - p1).cwiseAbs().maxCoeff() > tol || (p2 * p2 - p2).cwiseAbs().maxCoeff() > tol ||
        (p1 + p2 - qcore::identity(d)).cwiseAbs().maxCoeff() > tol)
        throw domain_error("projective_step: P1, P2 are not complementary projectors");
}

inline cmat projective_op(const cmat& p1, const cmat& p2, double x) {
    const double t = std::tanh(x);
    return std::sqrt((1.0 - t) / 2.0) * p1 + std::sqrt((1.0 + t) / 2.0) * p2;
}

// (P(+eps), P(-eps)); the walk operators are the same at every x.
inline std::pair<cmat, cmat> projective_step(const cmat& p1, const cmat& p2, double eps) {
    check_projector_pair(p1, p2);
    return {projective_op(p1, p2, eps), projective_op(p1, p2, -eps)};
}

// P(x) P(y) = c P(x + y)
inline double composition_constant(double x, double y) {
    return std::sqrt(std::cosh(x + y) / (2.0 * std::cosh(x) * std::cosh(y)));
}

// ------------------------------------------------------------ positive commuting case

// Joint eigenbasis of a positive commuting pair: everything is a function of D = M2^2 - M1^2.
struct Spectral {
    rvec d;     // eigenvalues of D, in [-1, 1]
    cmat v;     // eigenvectors
};

inline Spectral check_measurement(const TwoOutcomeMeasurement& m) {
    qcore::require_square(m.m1, "weakmeas");
    if (m.m1.rows() != m.m2.rows() || m.m1.cols() != m.m2.cols())
        throw shape_error("weakmeas: M1 and M2 differ in dimension");
    const auto n = m.m1.rows();
    const double tol = 1e-10;
    if (qcore::herm_dev(m.m1) > tol || qcore::herm_dev(m.m2) > tol)
        throw unsupported_error("weakmeas: non-Hermitian measurement operators need the polar-decomposition extension");
    if (qcore::eigh(m.m1).values(0) < -tol || qcore::eigh(m.m2).values(0) < -tol)
        throw unsupported_error("weakmeas: measurement operators must be positive semidefinite");
    if ((m.m1 * m.m2 - m.m2 * m.m1).norm() > tol)
        throw unsupported_error("weakmeas: non-commuting measurement operators are not supported");
    const cmat comp = m.m1.adjoint() * m.m1 + m.m2.adjoint() * m.m2;
    if ((comp - qcore::identity(n)).cwiseAbs().maxCoeff() > tol)
        throw domain_error("weakmeas: M1^2 + M2^2 != I");
    const cmat dm = m.m2 * m.m2 - m.m1 * m.m1;
    auto e = qcore::eigh(dm);
    for (Eigen::Index k = 0; k < e.values.size(); ++k) e.values(k) = std::clamp(e.values(k), -1.0, 1.0);
    return {e.values, e.vectors};
}

// Eigenvalue of M(x, eps) on the D-eigenvalue dk.
inline double step_factor(double dk, double x, double eps) {
    const double tx = std::tanh(x);
    const double c = 0.5 * (1.0 + std::tanh(eps) * tx);
    const double den = 1.0 + tx * dk;
    const double num = 1.0 + std::tanh(x + eps) * dk;
    if (!(den > 0.0)) throw numeric_error("weakmeas: walk reached a singular point of M(x, eps)");
    return std::sqrt(std::max(0.0, c * num / den));
}

inline cmat from_diag(const Spectral& sp, const rvec& f) {
    return sp.v * f.cast<cplx>().asDiagonal() * sp.v.adjoint();
}

// M(x, eps) for any real eps (eps may be negative or large).
inline cmat step_operator(const TwoOutcomeMeasurement& m, double x, double eps) {
    const auto sp = check_measurement(m);
    rvec f(sp.d.size());
    for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = step_factor(sp.d(k), x, eps);
    return from_diag(sp, f);
}

inline std::pair<cmat, cmat> weak_step_operators(const TwoOutcomeMeasurement& m, double x, double eps) {
    return {step_operator(m, x, eps), step_operator(m, x, -eps)};
}

// M(x) = sqrt((I + tanh(x) (M2^2 - M1^2)) / 2)
inline cmat effective_operator(const TwoOutcomeMeasurement& m, double x) {
    const auto sp = check_measurement(m);
    rvec f(sp.d.size());
    const double t = std::tanh(x);
    for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = std::sqrt(std::max(0.0, 0.5 * (1.0 + t * sp.d(k))));
    return from_diag(sp, f);
}

// State held at coordinate x for reference state rho at x = 0.
inline DensityMatrix state_at(const DensityMatrix& rho, const TwoOutcomeMeasurement& m, double x) {
    const cmat e = effective_operator(m, x);
    return DensityMatrix::normalized(e * rho.mat() * e.adjoint());
}

// Absorption probability at +X from x (outcome 2 in this sign convention).
inline double absorb_probability(double x, double x_cut) {
    return 0.5 * (1.0 + std::tanh(x) / std::tanh(x_cut));
}

// ------------------------------------------------------------ walk

namespace detail {

// Walk state in the D eigenbasis; step operators are diagonal there.
struct WalkState {
    cmat rho;
    void apply(const rvec& f) {
        for (Eigen::Index i = 0; i < rho.rows(); ++i)
            for (Eigen::Index j = 0; j < rho.cols(); ++j) rho(i, j) *= f(i) * f(j);
        rho /= rho.trace().real();
    }
    double prob(const rvec& f) const {
        double p = 0.0;
        for (Eigen::Index i = 0; i < rho.rows(); ++i) p += f(i) * f(i) * rho(i, i).real();
        return p;
    }
};

}  // namespace detail

// Apply a prescribed sequence of +1/-1 steps; returns the normalized state.
inline DensityMatrix apply_steps(const DensityMatrix& rho0, const TwoOutcomeMeasurement& m, double x0, double eps,
                                 const std::vector<int>& steps) {
    const auto sp = check_measurement(m);
    detail::WalkState st{sp.v.adjoint() * rho0.mat() * sp.v};
    long k = 0;
    rvec f(sp.d.size());
    for (int s : steps) {
        const double x = x0 + k * eps;
        for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = step_factor(sp.d(i), x, s > 0 ? eps : -eps);
        st.apply(f);
        k += s > 0 ? 1 : -1;
    }
    return DensityMatrix::normalized(sp.v * st.rho * sp.v.adjoint());
}

inline void check_walk_config(const WalkConfig& cfg) {
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw domain_error("run_walk: epsilon must lie in (0, 0.5)");
    if (!(cfg.x_cut > 0.0)) throw domain_error("run_walk: x_cut must be positive");
    if (!(std::abs(cfg.x0) < cfg.x_cut)) throw domain_error("run_walk: start point must lie inside (-X, X)");
    if (cfg.max_steps < 1) throw domain_error("run_walk: max_steps must be positive");
}

// Walk driver that reuses the per-lattice-site factors across trials.
class Walker {
public:
    Walker(const TwoOutcomeMeasurement& m, const WalkConfig& cfg) : cfg_(cfg), sp_(check_measurement(m)) {
        check_walk_config(cfg);
        // lattice x = x0 + k eps, |x| < X
        kmin_ = static_cast<long>(std::floor((-cfg.x_cut - cfg.x0) / cfg.epsilon)) - 1;
        kmax_ = static_cast<long>(std::ceil((cfg.x_cut - cfg.x0) / cfg.epsilon)) + 1;
        const auto n = kmax_ - kmin_ + 1;
        const auto d = sp_.d.size();
        up_.assign(n, rvec(d));
        down_.assign(n, rvec(d));
        for (long k = kmin_; k <= kmax_; ++k) {
            const double x = cfg.x0 + k * cfg.epsilon;
            if (std::abs(x) >= cfg.x_cut + cfg.epsilon) continue;
            for (Eigen::Index i = 0; i < d; ++i) {
                up_[k - kmin_](i) = step_factor(sp_.d(i), x, cfg.epsilon);
                down_[k - kmin_](i) = step_factor(sp_.d(i), x, -cfg.epsilon);
            }
        }
    }

    WalkOutcome run(const DensityMatrix& rho0, qcore::Rng& rng) const {
        if (rho0.dim() != sp_.d.size()) throw shape_error("run_walk: state and measurement dimensions differ");
        detail::WalkState st{sp_.v.adjoint() * rho0.mat() * sp_.v};
        long k = 0, n = 0;
        const double edge = cfg_.x_cut - 1e-12;
        double x = cfg_.x0;
        while (std::abs(x) < edge) {
            if (n >= cfg_.max_steps)
                throw numeric_error("run_walk: no absorption after " + std::to_string(n) +
                                    " steps (last x = " + std::to_string(x) + ")");
            const rvec& fu = up_[k - kmin_];
            if (rng.uniform() < st.prob(fu)) {
                st.apply(fu);
                ++k;
            } else {
                st.apply(down_[k - kmin_]);
                --k;
            }
            ++n;
            x = cfg_.x0 + k * cfg_.epsilon;
        }
        WalkOutcome out;
        out.outcome_index = x > 0 ? 2 : 1;
        out.final_x = x;
        out.steps = n;
        out.final_state = DensityMatrix::normalized(sp_.v * st.rho * sp_.v.adjoint());
        return out;
    }

private:
    WalkConfig cfg_;
    Spectral sp_;
    long kmin_ = 0, kmax_ = 0;
    std::vector<rvec> up_, down_;
};

inline WalkOutcome run_walk(const DensityMatrix& rho0, const TwoOutcomeMeasurement& m, const WalkConfig& cfg) {
    Walker w(m, cfg);
    qcore::Rng rng(cfg.seed);
    return w.run(rho0, rng);
}

// Diagonal qubit measurement {|0><0|, |1><1|} and the state sqrt(p1)|0> + sqrt(1-p1)|1>.
inline TwoOutcomeMeasurement diagonal_projective() {
    return {qcore::projector(qcore::ket(2, 0)), qcore::projector(qcore::ket(2, 1))};
}

inline DensityMatrix diagonal_state(double p1) {
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw domain_error("diagonal_state: p1 must lie in [0, 1]");
    cvec v(2);
    v << std::sqrt(p1), std::sqrt(1.0 - p1);
    return DensityMatrix::pure(v);
}

// ------------------------------------------------------------ multi-outcome effective operator

inline cmat multi_outcome_effective(const std::vector<cmat>& l, const SimplexPoint& sp) {
    const auto n = l.size();
    if (n < 2 || sp.s.size() != n) throw shape_error("multi_outcome_effective: need n >= 2 operators and n weights");
    double sum = 0.0;
    for (double v : sp.s) {
        if (v < 0.0 || v > 1.0) throw domain_error("multi_outcome_effective: simplex weights must lie in [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw domain_error("multi_outcome_effective: weights must sum to 1");
    const auto d = l[0].rows();
    cmat comp = cmat::Zero(d, d), acc = cmat::Zero(d, d);
    double f = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        qcore::require_hermitian(l[j], "multi_outcome_effective");
        if (l[j].rows() != d) throw shape_error("multi_outcome_effective: operator dimensions differ");
        const cmat sq = l[j] * l[j];
        comp += sq;
        acc += sp.s[j] * sq;
        f += static_cast<double>(n) * sp.s[j] * (1.0 - sp.s[j]);
    }
    if ((comp - qcore::identity(d)).cwiseAbs().maxCoeff() > 1e-10)
        throw domain_error("multi_outcome_effective: sum of L_j^2 differs from I");
    return std::sqrt(f) * qcore::sqrtm_psd(acc);
}

}  // namespace oqs::weakmeas
