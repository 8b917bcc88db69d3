// monotones.hpp - finite-difference probes of the differential monotone conditions,
// three-qubit polynomial invariants and phi_ABC.

#pragma once

#include "qcore.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oqs::monotones {

using qcore::DensityMatrix;

enum class Direction { decreasing, increasing };

struct StateFunction {
    std::string name;
    std::function<double(const cmat&)> eval;  // takes the full (possibly unnormalized) operator
    Direction direction = Direction::decreasing;
};

struct PureState {
    cvec amps;
    std::vector<int> dims;

    PureState(cvec a, std::vector<int> d) : amps(std::move(a)), dims(std::move(d)) {
        long n = 1;
        for (int x : dims) {
            if (x < 1) throw shape_error("PureState: factor dimensions must be positive");
            n *= x;
        }
        if (n != amps.size()) throw shape_error("PureState: dim list does not match amplitude count");
        if (std::abs(amps.norm() - 1.0) > 1e-12) throw domain_error("PureState: state is not normalized");
    }

    cmat rho() const { return amps * amps.adjoint(); }
};

struct LocalHermitian {
    int site = 0;
    cmat op;
};

// ---------------------------------------------------------------- built-in functions

inline StateFunction trace_fn() {
    return {"trace", [](const cmat& r) { return r.trace().real(); }, Direction::decreasing};
}

// Tr rho_A^2, an increasing monotone on pure states
inline StateFunction purity_fn(std::vector<int> dims, int party) {
    return {"purity",
            [dims, party](const cmat& r) {
                const cmat ra = qcore::partial_trace_op(r, dims, {party});
                return (ra * ra).trace().real();
            },
            Direction::increasing};
}

inline StateFunction entropy_fn(std::vector<int> dims, int party) {
    return {"entropy",
            [dims, party](const cmat& r) { return qcore::entropy(qcore::partial_trace_op(r, dims, {party})); },
            Direction::decreasing};
}

inline double phi_abc_rho(const cmat& r) {
    if (r.rows() != 8) throw shape_error("phi_abc: three-qubit state required");
    const std::vector<int> d{2, 2, 2};
    const cmat rab = qcore::partial_trace_op(r, d, {0, 1});
    const cmat ra = qcore::partial_trace_op(r, d, {0});
    const cmat rb = qcore::partial_trace_op(r, d, {1});
    const cmat x = 2.0 * rab + qcore::tensor(ra, qcore::identity(2)) + qcore::tensor(qcore::identity(2), rb);
    return 69.0 - (x * x * x).trace().real() - 3.0 * (rab * rab).trace().real();
}

inline StateFunction phi_abc_fn() { return {"phi_abc", phi_abc_rho, Direction::decreasing}; }

// ---------------------------------------------------------------- probes

inline void check_local(const LocalHermitian& e, const std::vector<int>& dims) {
    if (e.site < 0 || e.site >= static_cast<int>(dims.size())) throw shape_error("probe: site out of range");
    if (e.op.rows() != dims[e.site] || e.op.cols() != dims[e.site])
        throw shape_error("probe: operator does not match the party dimension");
    qcore::require_hermitian(e.op, "probe", 1e-12);
}

inline double apply_sign(const StateFunction& f, double v) {
    return f.direction == Direction::decreasing ? v : -v;
}

// |f(U rho U^dag) - f(rho)| / h with U = exp(i h eps) on one party
inline double check_lu_invariance(const StateFunction& f, const cmat& rho, const LocalHermitian& eps,
                                  const std::vector<int>& dims, double h) {
    if (h < 1e-5 || h > 1e-2) throw domain_error("check_lu_invariance: h must lie in [1e-5, 1e-2]");
    check_local(eps, dims);
    const cmat u = qcore::embed(qcore::expm_skew(eps.op, -h), dims, eps.site);
    return std::abs(f.eval(u * rho * u.adjoint()) - f.eval(rho)) / h;
}

struct LuReport {
    double residual_h = 0.0;
    double residual_h2 = 0.0;
    bool invariant = false;
};

// Exactly invariant functions sit at the rounding floor, where the halving ratio is noise;
// otherwise the residual has to shrink like O(h).
inline constexpr double lu_noise_floor = 1e-9;

inline LuReport lu_richardson(const StateFunction& f, const cmat& rho, const LocalHermitian& eps,
                              const std::vector<int>& dims, double h) {
    LuReport r;
    r.residual_h = check_lu_invariance(f, rho, eps, dims, h);
    r.residual_h2 = check_lu_invariance(f, rho, eps, dims, h / 2);
    if (r.residual_h <= lu_noise_floor && r.residual_h2 <= lu_noise_floor) {
        r.invariant = true;
    } else {
        const double ratio = r.residual_h / r.residual_h2;
        r.invariant = ratio >= 1.5 && ratio <= 2.5;
    }
    return r;
}

// Local two-outcome measurement M1,2 = sqrt((I +- h eps)/2)
inline std::pair<cmat, cmat> local_measurement(const LocalHermitian& eps, const std::vector<int>& dims, double h) {
    check_local(eps, dims);
    const auto e = qcore::eigh(eps.op);
    const double nrm = h * std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
    if (nrm > 0.1 + 1e-12) throw domain_error("check_measurement_monotonicity: probe too large (|h eps| > 0.1)");
    const cmat id = qcore::identity(eps.op.rows());
    return {qcore::embed(qcore::sqrtm_psd((id + h * eps.op) / 2.0), dims, eps.site),
            qcore::embed(qcore::sqrtm_psd((id - h * eps.op) / 2.0), dims, eps.site)};
}

// p1 f(rho1) + p2 f(rho2) - f(rho)
inline double check_measurement_monotonicity(const StateFunction& f, const cmat& rho, const LocalHermitian& eps,
                                             const std::vector<int>& dims, double h) {
    const auto [m1, m2] = local_measurement(eps, dims, h);
    double avg = 0.0;
    for (const cmat* m : {&m1, &m2}) {
        const cmat s = (*m) * rho * m->adjoint();
        const double p = s.trace().real();
        if (p > 0.0) avg += p * f.eval(s / p);
    }
    return avg - f.eval(rho);
}

inline bool measurement_condition_holds(const StateFunction& f, double delta, double tol = 1e-10) {
    return apply_sign(f, delta) <= tol;
}

// f(rho + h sigma) + f(rho - h sigma) - 2 f(rho)
inline double check_convexity(const StateFunction& f, const cmat& rho, const cmat& sigma, double h) {
    qcore::require_hermitian(sigma, "check_convexity");
    if (std::abs(sigma.trace()) > 1e-10) throw domain_error("check_convexity: sigma must be traceless");
    const cmat a = rho + h * sigma, b = rho - h * sigma;
    if (!qcore::is_psd(a, 0.0) || !qcore::is_psd(b, 0.0))
        throw domain_error("check_convexity: probe leaves the state space");
    return f.eval(a) + f.eval(b) - 2.0 * f.eval(rho);
}

// Decreasing monotones on mixed states must be convex, increasing ones concave.
inline bool convexity_condition_holds(const StateFunction& f, double second_diff, double tol = 1e-10) {
    return apply_sign(f, second_diff) >= -tol;
}

// Second-order change of the entanglement entropy of a bipartite pure state under the
// local measurement sqrt((I +- h eps)/2), as given by -Tr|rho_K^{-1/2} X_K|^2 with
// X = Tr(eps rho) rho - {eps, rho}/2 and K the party eps does not act on.
inline double entropy_second_order(const cmat& rho, const LocalHermitian& eps, const std::vector<int>& dims,
                                   double h) {
    if (dims.size() != 2) throw shape_error("entropy_second_order: bipartite state required");
    check_local(eps, dims);
    const cmat e = h * qcore::embed(eps.op, dims, eps.site);
    const cmat x = (e * rho).trace() * rho - 0.5 * (e * rho + rho * e);
    const int k = 1 - eps.site;
    const cmat xk = qcore::partial_trace_op(x, dims, {k});
    const cmat rk = qcore::partial_trace_op(rho, dims, {k});
    const auto ek = qcore::eigh(rk);
    const cmat inv_sqrt = qcore::hermitian_function(ek, [](double v) { return cplx(1.0 / std::sqrt(v), 0.0); });
    const cmat y = inv_sqrt * xk;
    return -(y.adjoint() * y).trace().real();
}

// ---------------------------------------------------------------- three-qubit invariants

struct Invariants {
    double i1 = 0, i2 = 0, i3 = 0, i4 = 0, i5 = 0;
};

inline void require_three_qubits(const PureState& psi) {
    if (psi.dims != std::vector<int>{2, 2, 2}) throw shape_error("three-qubit state required (dims 2,2,2)");
}

// The three equivalent reduced-matrix forms of the Kempe invariant.
inline std::array<double, 3> i4_forms(const PureState& psi) {
    require_three_qubits(psi);
    const cmat r = psi.rho();
    const std::vector<int> d{2, 2, 2};
    cmat single[3];
    for (int s = 0; s < 3; ++s) single[s] = qcore::partial_trace_op(r, d, {s});
    auto cube = [](const cmat& m) { return (m * m * m).trace().real(); };
    auto form = [&](int a, int b) {
        const cmat rab = qcore::partial_trace_op(r, d, {a, b});
        return 3.0 * (rab * qcore::tensor(single[a], single[b])).trace().real() - cube(single[a]) - cube(single[b]);
    };
    return {form(0, 1), form(0, 2), form(1, 2)};
}

// |a_{i1j1k1} a_{i2j2k2} a_{i3j3k3} a_{i4j4k4} e_{i1i2} e_{i3i4} e_{j1j2} e_{j3j4} e_{k1k3} e_{k2k4}|^2
inline double i5_contraction(const cvec& a) {
    auto amp = [&](int i, int j, int k) { return a(4 * i + 2 * j + k); };
    auto eps = [](int x, int y) { return x == y ? 0.0 : (x == 0 ? 1.0 : -1.0); };
    cplx s = 0.0;
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i3 = 0; i3 < 2; ++i3)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j3 = 0; j3 < 2; ++j3)
                    for (int k1 = 0; k1 < 2; ++k1)
                        for (int k2 = 0; k2 < 2; ++k2) {
                            const int i2 = 1 - i1, i4 = 1 - i3, j2 = 1 - j1, j4 = 1 - j3, k3 = 1 - k1, k4 = 1 - k2;
                            const double w = eps(i1, i2) * eps(i3, i4) * eps(j1, j2) * eps(j3, j4) * eps(k1, k3) *
                                             eps(k2, k4);
                            s += w * amp(i1, j1, k1) * amp(i2, j2, k2) * amp(i3, j3, k3) * amp(i4, j4, k4);
                        }
    return std::norm(s);
}

inline Invariants eval_three_qubit_invariants(const PureState& psi) {
    require_three_qubits(psi);
    const cmat r = psi.rho();
    const std::vector<int> d{2, 2, 2};
    auto purity = [&](int s) {
        const cmat m = qcore::partial_trace_op(r, d, {s});
        return (m * m).trace().real();
    };
    Invariants inv;
    inv.i1 = purity(2);
    inv.i2 = purity(1);
    inv.i3 = purity(0);
    inv.i4 = i4_forms(psi)[0];
    inv.i5 = i5_contraction(psi.amps);
    return inv;
}

inline double three_tangle(const PureState& psi) { return 2.0 * std::sqrt(eval_three_qubit_invariants(psi).i5); }

inline double phi_abc(const PureState& psi) {
    require_three_qubits(psi);
    return phi_abc_rho(psi.rho());
}

// 12 I4 + 16 (Tr rho_A^3 + Tr rho_B^3 + Tr rho_C^3) + 3 Tr rho_A^2 + 3 Tr rho_B^2
inline double trace_x_cubed_identity(const PureState& psi) {
    const auto inv = eval_three_qubit_invariants(psi);
    const cmat r = psi.rho();
    const std::vector<int> d{2, 2, 2};
    double cubes = 0.0;
    for (int s = 0; s < 3; ++s) {
        const cmat m = qcore::partial_trace_op(r, d, {s});
        cubes += (m * m * m).trace().real();
    }
    return 12.0 * inv.i4 + 16.0 * cubes + 3.0 * inv.i3 + 3.0 * inv.i2;
}

inline PureState random_pure(const std::vector<int>& dims, qcore::Rng& rng) {
    long n = 1;
    for (int x : dims) n *= x;
    return PureState(qcore::random_state(n, rng), dims);
}

inline PureState random_product(const std::vector<int>& dims, qcore::Rng& rng) {
    cvec v = qcore::random_state(dims[0], rng);
    for (std::size_t k = 1; k < dims.size(); ++k) v = qcore::tensor_vec(v, qcore::random_state(dims[k], rng));
    return PureState(v / v.norm(), dims);
}

inline LocalHermitian random_local(const std::vector<int>& dims, qcore::Rng& rng) {
    const int site = static_cast<int>(rng.uniform() * dims.size()) % static_cast<int>(dims.size());
    return {site, qcore::random_hermitian(dims[site], rng)};
}

// Largest |eigenvalue|
inline double op_norm(const cmat& h) {
    const auto e = qcore::eigh(h);
    return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
}

// ---------------------------------------------------------------- probe suite

struct ProbeRow {
    long trial = 0;
    std::string condition;  // lu | measurement | convexity
    double value = 0.0;     // LU residual at h, measurement delta, or second difference
    bool pass = false;
};

struct NamedFunction {
    StateFunction f;
    std::vector<int> dims;
};

inline NamedFunction builtin(const std::string& name) {
    const std::vector<int> two{2, 2};
    if (name == "trace") return {trace_fn(), two};
    if (name == "purity") return {purity_fn(two, 0), two};
    if (name == "entropy") return {entropy_fn(two, 0), two};
    if (name == "phi_abc") return {phi_abc_fn(), {2, 2, 2}};
    throw domain_error("unknown state function '" + name + "'");
}

// Three differential conditions per trial; trial k draws from split(seed, k).
inline std::vector<ProbeRow> probe_suite(const std::string& name, long trials, std::uint64_t seed) {
    if (trials < 1) throw domain_error("probe_suite: trials must be >= 1");
    const auto nf = builtin(name);
    long d = 1;
    for (int x : nf.dims) d *= x;
    std::vector<ProbeRow> rows;
    rows.reserve(static_cast<std::size_t>(3 * trials));
    for (long k = 0; k < trials; ++k) {
        auto rng = qcore::split(seed, static_cast<std::uint64_t>(k));
        const cmat psi = random_pure(nf.dims, rng).rho();
        const auto lu = lu_richardson(nf.f, psi, random_local(nf.dims, rng), nf.dims, 1e-3);
        rows.push_back({k, "lu", lu.residual_h, lu.invariant});

        auto eps = random_local(nf.dims, rng);
        eps.op /= op_norm(eps.op);
        const double delta = check_measurement_monotonicity(nf.f, psi, eps, nf.dims, 0.1);
        rows.push_back({k, "measurement", delta, measurement_condition_holds(nf.f, delta)});

        // interior mixed state so rho +- h sigma stays valid
        const cmat rho = 0.5 * qcore::random_density(d, rng).mat() + (0.5 / d) * qcore::identity(d);
        cmat sigma = qcore::random_hermitian(d, rng);
        sigma -= (sigma.trace() / static_cast<double>(d)) * qcore::identity(d);
        sigma /= sigma.norm();
        const double sd = check_convexity(nf.f, rho, sigma, 1e-3);
        rows.push_back({k, "convexity", sd, convexity_condition_holds(nf.f, sd)});
    }
    return rows;
}

}  // namespace oqs::monotones
