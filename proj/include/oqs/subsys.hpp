// subsys.hpp - subsystem codes H = H^A (x) H^B (+) K: the encoded-information
// fidelity F^A, block-form Kraus channels, and the Markovian correctability test.
//
// Basis order: the first dA*dB states span H^A (x) H^B (A the leading factor),
// the remaining dK states span K.
#pragma once

#include "qcore.hpp"

#include <functional>
#include <vector>

namespace oqs::subsys {

struct Decomposition {
    int da = 1, db = 1, dk = 0;

    void validate() const {
        if (da < 1 || db < 1 || dk < 0) throw shape_error("Decomposition: need dA, dB >= 1 and dK >= 0");
    }
    int dab() const { return da * db; }
    int dim() const { return da * db + dk; }
    bool operator==(const Decomposition&) const = default;
};

inline cmat p_ab(const Decomposition& d) {
    cmat p = cmat::Zero(d.dim(), d.dim());
    p.topLeftCorner(d.dab(), d.dab()).setIdentity();
    return p;
}

inline cmat p_k(const Decomposition& d) { return qcore::identity(d.dim()) - p_ab(d); }

inline void require_dim(const cmat& m, const Decomposition& d, const char* who) {
    d.validate();
    if (m.rows() != d.dim() || m.cols() != d.dim()) throw dimension_error(std::string(who) + ": size != dA dB + dK");
}

struct EncodedState {
    qcore::DensityMatrix rho;
    Decomposition decomp;

    EncodedState(qcore::DensityMatrix r, Decomposition d) : rho(std::move(r)), decomp(d) {
        require_dim(rho.mat(), decomp, "EncodedState");
    }
};

// Tr_B of the H^A (x) H^B block, unnormalized
inline cmat reduced_a(const cmat& rho, const Decomposition& d) {
    require_dim(rho, d, "reduced_a");
    return qcore::partial_trace_op(rho.topLeftCorner(d.dab(), d.dab()), {d.da, d.db}, {0});
}

inline double weight_ab(const cmat& rho, const Decomposition& d) {
    return rho.topLeftCorner(d.dab(), d.dab()).trace().real();
}

inline double weight_k(const cmat& rho, const Decomposition& d) {
    return d.dk ? rho.bottomRightCorner(d.dk, d.dk).trace().real() : 0.0;
}

inline double f_a(const cmat& tau, const cmat& ups, const Decomposition& d) {
    require_dim(tau, d, "f_a");
    require_dim(ups, d, "f_a");
    const double wt = std::max(weight_ab(tau, d), 0.0), wu = std::max(weight_ab(ups, d), 0.0);
    double f = 0.0;
    // a vanishing AB weight kills the first term; the normalized reduced operator is never formed
    if (wt > 0.0 && wu > 0.0)
        f = std::sqrt(wt * wu) * qcore::fidelity_op(reduced_a(tau, d) / wt, reduced_a(ups, d) / wu);
    f += std::sqrt(std::max(weight_k(tau, d), 0.0) * std::max(weight_k(ups, d), 0.0));
    return std::clamp(f, 0.0, 1.0);
}

inline double f_a(const EncodedState& tau, const EncodedState& ups) {
    if (!(tau.decomp == ups.decomp)) throw shape_error("f_a: states use different decompositions");
    return f_a(tau.rho.mat(), ups.rho.mat(), tau.decomp);
}

inline double fa_angle(const cmat& tau, const cmat& ups, const Decomposition& d) {
    return std::acos(f_a(tau, ups, d));
}

// overlap sum_i sqrt(p_tau(i) p_ups(i)) for M_0 = P_K, M_i = M_i^A (x) I^B
inline double fa_overlap(const cmat& tau, const cmat& ups, const Decomposition& d, const std::vector<cmat>& povm_a) {
    const cmat ta = reduced_a(tau, d), ua = reduced_a(ups, d);
    double s = std::sqrt(std::max(weight_k(tau, d), 0.0) * std::max(weight_k(ups, d), 0.0));
    for (const auto& m : povm_a) {
        const double pt = (m * ta).trace().real(), pu = (m * ua).trace().real();
        s += std::sqrt(std::max(pt, 0.0) * std::max(pu, 0.0));
    }
    return s;
}

// ---------------------------------------------------------------- block-form Kraus channels

struct BlockKraus {
    Decomposition decomp;
    std::vector<cmat> ops;

    cmat upper_left(std::size_t i) const { return ops[i].topLeftCorner(decomp.dab(), decomp.dab()); }
    cmat c_block(std::size_t i) const {
        return qcore::partial_trace_op(upper_left(i), {decomp.da, decomp.db}, {1}) / double(decomp.da);
    }
    cmat d_block(std::size_t i) const { return ops[i].topRightCorner(decomp.dab(), decomp.dk); }
    cmat g_block(std::size_t i) const { return ops[i].bottomRightCorner(decomp.dk, decomp.dk); }

    double completeness_error() const {
        cmat s = cmat::Zero(decomp.dim(), decomp.dim());
        for (const auto& m : ops) s += m.adjoint() * m;
        return (s - qcore::identity(decomp.dim())).cwiseAbs().maxCoeff();
    }

    // deviation of the upper-left block from I^A (x) C
    double factor_error() const {
        double e = 0.0;
        for (std::size_t i = 0; i < ops.size(); ++i)
            e = std::max(e, (upper_left(i) - qcore::tensor(qcore::identity(decomp.da), c_block(i))).cwiseAbs().maxCoeff());
        return e;
    }

    bool initialization_free() const {
        for (std::size_t i = 0; i < ops.size(); ++i)
            if (decomp.dk && d_block(i).cwiseAbs().maxCoeff() > 1e-12) return false;
        return true;
    }

    void validate(double tol = 1e-10) const {
        if (ops.empty()) throw shape_error("BlockKraus: no operators");
        for (const auto& m : ops) require_dim(m, decomp, "BlockKraus");
        if (decomp.dk)
            for (const auto& m : ops)
                if (m.bottomLeftCorner(decomp.dk, decomp.dab()).cwiseAbs().maxCoeff() != 0.0)
                    throw domain_error("BlockKraus: lower-left block must vanish");
        if (completeness_error() > tol) throw domain_error("BlockKraus: sum M^dag M != I");
        if (factor_error() > tol) throw domain_error("BlockKraus: upper-left block is not I^A (x) C");
    }

    cmat apply(const cmat& rho) const {
        cmat out = cmat::Zero(rho.rows(), rho.cols());
        for (const auto& m : ops) out += m * rho * m.adjoint();
        return out;
    }
};

inline cmat inv_sqrt_psd(const cmat& m) {
    const auto e = qcore::eigh(m);
    if (e.values.minCoeff() <= 1e-12) throw numeric_error("inv_sqrt_psd: singular operator");
    return qcore::hermitian_function(e, [](double x) { return cplx(1.0 / std::sqrt(x), 0.0); });
}

// Random channel of block form. with_d = false gives the initialization-free case D_i = 0.
inline BlockKraus random_block_kraus(const Decomposition& dec, int n_ops, qcore::Rng& rng, bool with_d = true) {
    dec.validate();
    if (n_ops < 1) throw domain_error("random_block_kraus: need at least one operator");
    const int dab = dec.dab(), dk = dec.dk;
    std::vector<cmat> c(n_ops), d(n_ops), g(n_ops);
    cmat sc = cmat::Zero(dec.db, dec.db);
    for (int i = 0; i < n_ops; ++i) {
        c[i] = qcore::ginibre(dec.db, dec.db, rng);
        sc += c[i].adjoint() * c[i];
    }
    const cmat nc = inv_sqrt_psd(sc);
    for (auto& ci : c) ci = ci * nc;  // sum C^dag C = I
    std::vector<cmat> ic(n_ops);
    for (int i = 0; i < n_ops; ++i) ic[i] = qcore::tensor(qcore::identity(dec.da), c[i]);
    if (dk) {
        cmat x = cmat::Zero(dab, dk);
        for (int i = 0; i < n_ops; ++i) {
            d[i] = with_d ? qcore::ginibre(dab, dk, rng) : cmat::Zero(dab, dk);
            x += ic[i].adjoint() * d[i];
        }
        cmat sd = cmat::Zero(dk, dk);
        for (int i = 0; i < n_ops; ++i) {
            d[i] -= ic[i] * x;  // sum (I (x) C)^dag D = 0
            sd += d[i].adjoint() * d[i];
        }
        // keep sum D^dag D strictly inside the unit ball
        const double top = qcore::eigh(sd).values.maxCoeff();
        if (top < 1e-20) {
            // a single C is unitary and leaves no room for D
            for (auto& di : d) di.setZero();
            sd.setZero();
        } else {
            const double s = std::sqrt(rng.uniform(0.05, 0.95) / top);
            for (auto& di : d) di *= s;
            sd *= s * s;
        }
        cmat sg = cmat::Zero(dk, dk);
        for (int i = 0; i < n_ops; ++i) {
            g[i] = qcore::ginibre(dk, dk, rng);
            sg += g[i].adjoint() * g[i];
        }
        const cmat fix = inv_sqrt_psd(sg) * qcore::sqrtm_psd(qcore::identity(dk) - sd);
        for (auto& gi : g) gi = gi * fix;
    }
    BlockKraus k{dec, {}};
    for (int i = 0; i < n_ops; ++i) {
        cmat m = cmat::Zero(dec.dim(), dec.dim());
        m.topLeftCorner(dab, dab) = ic[i];
        if (dk) {
            m.topRightCorner(dab, dk) = d[i];
            m.bottomRightCorner(dk, dk) = g[i];
        }
        k.ops.push_back(std::move(m));
    }
    return k;
}

// random Kraus set for a channel on C^d
inline std::vector<cmat> random_channel(int d, int n_ops, qcore::Rng& rng) {
    std::vector<cmat> ks(n_ops);
    cmat s = cmat::Zero(d, d);
    for (auto& k : ks) {
        k = qcore::ginibre(d, d, rng);
        s += k.adjoint() * k;
    }
    const cmat n = inv_sqrt_psd(s);
    for (auto& k : ks) k = k * n;
    return ks;
}

// Kraus operators of E^A (x) E^B (+) E_K
inline std::vector<cmat> local_channel(const Decomposition& dec, const std::vector<cmat>& ea, const std::vector<cmat>& eb,
                                       const std::vector<cmat>& ek) {
    dec.validate();
    const double nab = double(ea.size() * eb.size()), nk = dec.dk ? double(ek.size()) : 1.0;
    std::vector<cmat> out;
    for (const auto& a : ea)
        for (const auto& b : eb) {
            const cmat ab = qcore::tensor(a, b);
            for (std::size_t k = 0; k < (dec.dk ? ek.size() : 1); ++k) {
                cmat m = cmat::Zero(dec.dim(), dec.dim());
                m.topLeftCorner(dec.dab(), dec.dab()) = ab / std::sqrt(nk);
                if (dec.dk) m.bottomRightCorner(dec.dk, dec.dk) = ek[k] / std::sqrt(nab);
                out.push_back(std::move(m));
            }
        }
    return out;
}

// state supported on H^A (x) H^B
inline cmat embed_ab(const cmat& rho_ab, const Decomposition& d) {
    if (rho_ab.rows() != d.dab()) throw dimension_error("embed_ab: size != dA dB");
    cmat m = cmat::Zero(d.dim(), d.dim());
    m.topLeftCorner(d.dab(), d.dab()) = rho_ab;
    return m;
}

struct MonotoneTrial {
    double before = 0.0, after = 0.0;
    bool pass = true;
};

struct MonotoneReport {
    std::vector<MonotoneTrial> trials;
    int violations = 0;
    double worst_drop = 0.0;  // max(before - after)
};

// F^A(rho, E(rho~)) >= F^A(rho, rho~) for perfectly initialized rho and block-form E
inline MonotoneReport check_fa_monotone_under_blocked_noise(const Decomposition& dec, int trials, std::uint64_t seed,
                                                           double slack = 1e-9) {
    dec.validate();
    MonotoneReport rep;
    for (int t = 0; t < trials; ++t) {
        auto rng = qcore::split(seed, static_cast<std::uint64_t>(t));
        const cmat rho = embed_ab(qcore::random_density(dec.dab(), rng).mat(), dec);
        const cmat tilde = qcore::random_density(dec.dim(), rng).mat();
        BlockKraus e;
        for (;;) {
            e = random_block_kraus(dec, 1 + static_cast<int>(rng.uniform() * 3), rng);
            try {
                e.validate();
                break;
            } catch (const error&) {
                // resample
            }
        }
        MonotoneTrial tr;
        tr.before = f_a(rho, tilde, dec);
        tr.after = f_a(rho, e.apply(tilde), dec);
        tr.pass = tr.after >= tr.before - slack;
        rep.worst_drop = std::max(rep.worst_drop, tr.before - tr.after);
        if (!tr.pass) ++rep.violations;
        rep.trials.push_back(tr);
    }
    return rep;
}

// ---------------------------------------------------------------- Markovian correctability

using OpFn = std::function<cmat(double)>;

struct CorrectabilityPoint {
    double t = 0.0;
    double r1 = 0.0, r2 = 0.0, r3 = 0.0;
};

struct CorrectabilityReport {
    bool correctable = false;
    double r1 = 0.0, r2 = 0.0, r3 = 0.0;  // maxima over the grid
    std::vector<CorrectabilityPoint> points;
};

// Frobenius distance of an AB-block operator from I^A (x) (Tr_A X / dA)
inline double factor_residual(const cmat& x_ab, const Decomposition& d) {
    const cmat c = qcore::partial_trace_op(x_ab, {d.da, d.db}, {1}) / double(d.da);
    return (x_ab - qcore::tensor(qcore::identity(d.da), c)).norm();
}

// H'(t) = i U'(t) U^dag(t) by central differences at steps h and h/2; throws if they disagree
inline cmat frame_hamiltonian(const OpFn& u, double t, double h, double tol = 1e-6) {
    auto central = [&](double s) { return cmat((u(t + s) - u(t - s)) / (2.0 * s)); };
    const cmat d1 = central(h), d2 = central(h / 2.0);
    const cmat rich = (4.0 * d2 - d1) / 3.0;
    if ((rich - d2).cwiseAbs().maxCoeff() > tol)
        throw numeric_error("check_markov_correctable: grid too coarse for dU/dt");
    return I1 * rich * u(t).adjoint();
}

inline CorrectabilityReport check_markov_correctable(const OpFn& h, const std::vector<OpFn>& ls, const Decomposition& dec,
                                                     const OpFn& u, const std::vector<double>& t_grid,
                                                     double tol = 1e-8) {
    dec.validate();
    if (t_grid.empty()) throw domain_error("check_markov_correctable: empty grid");
    double spacing = 1e-3;
    for (std::size_t i = 1; i < t_grid.size(); ++i) spacing = std::min(spacing, std::abs(t_grid[i] - t_grid[i - 1]));
    if (!(spacing > 0.0)) throw domain_error("check_markov_correctable: repeated grid points");
    const cmat pab = p_ab(dec), pk = p_k(dec);
    const int dab = dec.dab();
    CorrectabilityReport rep;
    for (double t : t_grid) {
        const cmat ut = u(t);
        require_dim(ut, dec, "check_markov_correctable");
        const cmat hp = frame_hamiltonian(u, t, spacing / 2.0);
        const cmat ht = ut * h(t) * ut.adjoint();
        cmat sum_ll = cmat::Zero(dec.dim(), dec.dim());
        CorrectabilityPoint pt{t};
        for (const auto& lf : ls) {
            const cmat lt = ut * lf(t) * ut.adjoint();
            sum_ll += lt.adjoint() * lt;
            const cmat lp = lt * pab;
            double r = factor_residual(lp.topLeftCorner(dab, dab), dec);
            if (dec.dk) r = std::hypot(r, lp.bottomLeftCorner(dec.dk, dab).norm());
            pt.r1 = std::max(pt.r1, r);
        }
        const cmat k = ht + hp;
        pt.r2 = factor_residual(k.topLeftCorner(dab, dab), dec);
        pt.r3 = (pab * (k + 0.5 * I1 * sum_ll) * pk).norm();
        rep.r1 = std::max(rep.r1, pt.r1);
        rep.r2 = std::max(rep.r2, pt.r2);
        rep.r3 = std::max(rep.r3, pt.r3);
        rep.points.push_back(pt);
    }
    rep.correctable = rep.r1 < tol && rep.r2 < tol && rep.r3 < tol;
    return rep;
}

// Gauge choice D^B = 0 for the correcting-frame Hamiltonian given frame operators H~, L~_j
inline cmat frame_hamiltonian_gauge(const cmat& h_tilde, const std::vector<cmat>& l_tilde, const Decomposition& dec) {
    const cmat pab = p_ab(dec);
    cmat s = cmat::Zero(dec.dim(), dec.dim());
    for (const auto& l : l_tilde) s += l.adjoint() * l;
    return -h_tilde - 0.5 * I1 * pab * s + 0.5 * I1 * s * pab;
}

}  // namespace oqs::subsys
