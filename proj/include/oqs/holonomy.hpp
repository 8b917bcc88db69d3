// holonomy.hpp - adiabatic simulation of holonomic gates on a stabilizer
// element -H(t) (x) G, with G a fixed +-1 operator on the remaining qubits.
#pragma once

#include "qcore.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace oqs::holonomy {

using namespace qcore;

struct degenerate_path_error : numeric_error { using numeric_error::numeric_error; };

enum class Schedule { linear, trig, smooth_bump };
enum class Reparam { none, smooth_bump };
enum class Integrator { magnus4, midpoint };

inline double half_pi_time() { return pi / 2.0; }  // T_d for a unit-strength Hamiltonian

// y(u) = int_0^u exp(-1/sin(pi v)) dv / a, tabulated by per-interval Simpson,
// evaluated with cubic Hermite using the exact derivative.
class SmoothBump {
public:
    static const SmoothBump& get() {
        static const SmoothBump b(10000);
        return b;
    }
    static double weight(double u) {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        return std::exp(-1.0 / std::sin(pi * u));
    }
    double y(double u) const {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        const double x = u * n_;
        const auto i = std::min(static_cast<std::size_t>(x), n_ - 1);
        const double t = x - static_cast<double>(i), h = 1.0 / static_cast<double>(n_);
        const double y0 = c_[i], y1 = c_[i + 1];
        const double d0 = weight(i * h) / a_ * h, d1 = weight((i + 1) * h) / a_ * h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 +
               (t3 - t2) * d1;
    }
    double dy(double u) const { return weight(u) / a_; }
    double norm() const { return a_; }

private:
    explicit SmoothBump(std::size_t n) : n_(n), c_(n + 1, 0.0) {
        const double h = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = i * h;
            c_[i + 1] = c_[i] + h / 6.0 * (weight(u) + 4.0 * weight(u + h / 2) + weight(u + h));
        }
        a_ = c_[n];
        for (auto& v : c_) v /= a_;
    }
    std::size_t n_;
    std::vector<double> c_;
    double a_ = 1.0;
};

struct Shape {
    double f, g, df, dg;  // d/ds
};

inline Shape shape(Schedule sc, double s) {
    switch (sc) {
        case Schedule::linear: return {1.0 - s, s, -1.0, 1.0};
        case Schedule::trig:
            return {std::cos(pi * s / 2), std::sin(pi * s / 2), -pi / 2 * std::sin(pi * s / 2),
                    pi / 2 * std::cos(pi * s / 2)};
        case Schedule::smooth_bump: {
            const auto& b = SmoothBump::get();
            const double y = b.y(s), dy = b.dy(s);
            return {std::cos(pi * y / 2), std::sin(pi * y / 2), -pi / 2 * std::sin(pi * y / 2) * dy,
                    pi / 2 * std::cos(pi * y / 2) * dy};
        }
    }
    throw domain_error("shape: unknown schedule");
}

inline double spectral_radius(const cmat& h) {
    const auto e = eigh(h);
    return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
}

// H(s) = f(s) h_start + g(s) h_end.
struct PathSegment {
    cmat h_start, h_end;
    Schedule schedule = Schedule::trig;
    double T = 1.0;

    void validate() const {
        require_hermitian(h_start, "PathSegment.h_start", 1e-10);
        require_hermitian(h_end, "PathSegment.h_end", 1e-10);
        if (h_start.rows() != h_end.rows()) throw shape_error("PathSegment: endpoint dimensions differ");
        const auto d = h_start.rows();
        if (d % 2 != 0) throw shape_error("PathSegment: odd dimension");
        if (std::abs(h_start.trace()) > 1e-10 || std::abs(h_end.trace()) > 1e-10)
            throw domain_error("PathSegment: endpoints must be traceless");
        const double ra = spectral_radius(h_start), rb = spectral_radius(h_end);
        if (ra <= 0.0 || std::abs(ra - rb) > 1e-9 * ra)
            throw domain_error("PathSegment: endpoints need equal nonzero spectral radius");
        // two-level structure along the whole segment: A^2, B^2 and {A,B} scalar
        auto scalar = [&](const cmat& m) {
            const cplx c = m.trace() / static_cast<double>(d);
            return (m - c * identity(d)).norm() <= 1e-9 * std::max(1.0, m.norm());
        };
        if (!scalar(h_start * h_start) || !scalar(h_end * h_end) ||
            !scalar(h_start * h_end + h_end * h_start))
            throw domain_error("PathSegment: endpoints must square to scalars and anticommute up to a scalar");
        if (!(T > 0.0) || !std::isfinite(T)) throw domain_error("PathSegment: duration must be > 0");
    }
};

struct HolonomyPath {
    std::vector<PathSegment> segments;
    cmat gauge_factor;  // G, Hermitian, G^2 = I, traceless
    Reparam reparam = Reparam::none;

    void validate() const {
        if (segments.empty()) throw domain_error("HolonomyPath: no segments");
        for (const auto& s : segments) s.validate();
        for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
            const auto& a = segments[k].h_end;
            const auto& b = segments[k + 1].h_start;
            if (a.rows() != b.rows() || (a - b).norm() > 1e-12 * std::max(1.0, a.norm()))
                throw domain_error("HolonomyPath: segment " + std::to_string(k) + " does not chain");
        }
        const auto& g = gauge_factor;
        require_hermitian(g, "HolonomyPath.gauge_factor", 1e-10);
        if ((g * g - identity(g.rows())).norm() > 1e-10 || std::abs(g.trace()) > 1e-10)
            throw domain_error("HolonomyPath: gauge factor must be a traceless involution");
    }
    Eigen::Index dim_k() const { return segments.front().h_start.rows(); }
    Eigen::Index dim_g() const { return gauge_factor.rows(); }
    Eigen::Index dim() const { return dim_k() * dim_g(); }
    double duration() const {
        double t = 0.0;
        for (const auto& s : segments) t += s.T;
        return t;
    }

    struct Sample {
        cmat k, kdot;
    };
    // Single-qubit (or control-target) factor K(t) and dK/dt.
    Sample at(double t) const {
        const double total = duration();
        double tp = t, rate = 1.0;
        if (reparam == Reparam::smooth_bump) {
            const auto& b = SmoothBump::get();
            tp = total * b.y(t / total);
            rate = b.dy(t / total);
        }
        std::size_t k = 0;
        double start = 0.0;
        while (k + 1 < segments.size() && tp >= start + segments[k].T) start += segments[k++].T;
        const auto& seg = segments[k];
        const double s = std::clamp((tp - start) / seg.T, 0.0, 1.0);
        const Shape sh = shape(seg.schedule, s);
        return {sh.f * seg.h_start + sh.g * seg.h_end,
                (sh.df * seg.h_start + sh.dg * seg.h_end) * (rate / seg.T)};
    }
    cmat hamiltonian(double t) const { return -tensor(at(t).k, gauge_factor); }
    cmat hamiltonian(const cmat& k) const { return -tensor(k, gauge_factor); }
};

// Smallest |K| along a segment. K^2 = (a f^2 + b g^2 + c f g) I, minimized over
// the quarter circle of directions, times the smallest |(f, g)| of the schedule.
inline double segment_min_level(const PathSegment& s) {
    const auto d = static_cast<double>(s.h_start.rows());
    const double a = (s.h_start * s.h_start).trace().real() / d;
    const double b = (s.h_end * s.h_end).trace().real() / d;
    const double c = (s.h_start * s.h_end + s.h_end * s.h_start).trace().real() / d;
    double q = std::min(a, b);
    const double mid = 0.5 * (a + b), amp = std::hypot(0.5 * (a - b), 0.5 * c);
    if (amp > 0.0) {
        const double phi = std::atan2(-0.5 * c, -0.5 * (a - b));  // 2 theta at the minimum
        if (phi >= 0.0 && phi <= pi) q = std::min(q, mid - amp);
    }
    const double rmin = s.schedule == Schedule::linear ? std::sqrt(0.5) : 1.0;
    return std::sqrt(std::max(q, 0.0)) * rmin;
}

// K = +-E on two equal halves; E^2 = Tr K^2 / d.
inline double level(const cmat& k) { return std::sqrt(std::max((k * k).trace().real() / k.rows(), 0.0)); }

struct AdiabaticResult {
    cmat propagator;
    double ground_fidelity = 0.0;  // worst-case weight kept in the ground space
    double leakage = 0.0;
    cmat geometric_gate;  // on the K factor, from the ground space
    cmat excited_gate;    // same, from the excited space
    double dyn_phase = 0.0;        // int E dt
    double adiabatic_shift = 0.0;  // second-order level shift, int |<e|K'|g>|^2/(2E)^3 dt
    long steps = 0;
};

namespace detail {

struct Span {
    double t0, t1;
    long n;
};

// Step grid aligned with segment corners (the schedules have kinks there).
inline std::vector<Span> grid(const HolonomyPath& p, double t0, double t1, long per_segment) {
    std::vector<Span> out;
    if (p.reparam == Reparam::smooth_bump) {
        const double frac = (t1 - t0) / p.duration();
        out.push_back({t0, t1, std::max<long>(1, std::lround(std::ceil(frac * per_segment * p.segments.size())))});
        return out;
    }
    double a = 0.0;
    for (const auto& s : p.segments) {
        const double b = a + s.T;
        const double lo = std::max(a, t0), hi = std::min(b, t1);
        if (hi > lo)
            out.push_back({lo, hi, std::max<long>(1, std::lround(std::ceil((hi - lo) / s.T * per_segment)))});
        a = b;
    }
    return out;
}

struct Piece {
    cmat u;
    double omega = 0.0, shift = 0.0;
    long steps = 0;
};

inline Piece integrate(const HolonomyPath& p, double t0, double t1, long per_segment, Integrator integ) {
    const auto d = p.dim(), dk = p.dim_k();
    const double r0 = spectral_radius(p.segments.front().h_start);
    Piece out{identity(d)};
    static const double c = std::sqrt(3.0) / 6.0;
    auto sample = [&](double t, double w, double h) {
        auto s = p.at(t);
        const double e = level(s.k);
        if (!(e >= 1e-6 * r0)) throw degenerate_path_error("evolve: gap collapses at t = " + std::to_string(t));
        const cmat pp = 0.5 * (identity(dk) + s.k / e);
        const cmat cross = (identity(dk) - pp) * s.kdot * pp;
        out.omega += w * h * e;
        out.shift += w * h * cross.squaredNorm() / (dk / 2.0) / (8.0 * e * e * e);
        return p.hamiltonian(s.k);
    };
    for (const auto& sp : grid(p, t0, t1, per_segment)) {
        const double h = (sp.t1 - sp.t0) / sp.n;
        for (long i = 0; i < sp.n; ++i) {
            const double t = sp.t0 + i * h;
            cmat heff;
            if (integ == Integrator::magnus4) {
                const cmat h1 = sample(t + (0.5 - c) * h, 0.5, h);
                const cmat h2 = sample(t + (0.5 + c) * h, 0.5, h);
                heff = 0.5 * (h1 + h2) - I1 * (std::sqrt(3.0) * h / 12.0) * (h2 * h1 - h1 * h2);
            } else {
                heff = sample(t + 0.5 * h, 1.0, h);
            }
            heff = 0.5 * (heff + heff.adjoint());
            out.u = expm_skew(heff, h) * out.u;
        }
        out.steps += sp.n;
    }
    return out;
}

inline cmat ground_projector(const HolonomyPath& p, double t) {
    const auto s = p.at(t);
    const auto dk = p.dim_k(), dg = p.dim_g();
    const cmat kp = 0.5 * (identity(dk) + s.k / level(s.k));
    const cmat gp = 0.5 * (identity(dg) + p.gauge_factor);
    return tensor(kp, gp) + tensor(identity(dk) - kp, identity(dg) - gp);
}

// Tr_G over the trailing factor, divided by half its dimension.
inline cmat reduce_k(const cmat& w, Eigen::Index dk, Eigen::Index dg) {
    return partial_trace_op(w, {static_cast<int>(dk), static_cast<int>(dg)}, {0}) / (dg / 2.0);
}

inline cmat basis_of(const cmat& proj) {
    const auto e = eigh(proj);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index k = 0; k < e.values.size(); ++k)
        if (e.values(k) > 0.5) cols.push_back(k);
    cmat b(proj.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = e.vectors.col(cols[k]);
    return b;
}

// Dynamical phases stripped, eigenspaces kept: the adiabatic frame propagator.
inline cmat stripped(const HolonomyPath& p, const Piece& pc, double t0, double t1) {
    const double ph = pc.omega + pc.shift;
    const auto d = p.dim();
    const cmat g0 = ground_projector(p, t0), g1 = ground_projector(p, t1);
    const cmat x0 = identity(d) - g0, x1 = identity(d) - g1;
    return std::exp(-I1 * ph) * g1 * pc.u * g0 + std::exp(I1 * ph) * x1 * pc.u * x0;
}

}  // namespace detail

inline AdiabaticResult evolve(const HolonomyPath& path, long steps_per_segment,
                              Integrator integ = Integrator::magnus4) {
    path.validate();
    if (steps_per_segment < 1) throw domain_error("evolve: steps_per_segment must be >= 1");
    for (std::size_t k = 0; k < path.segments.size(); ++k) {
        const auto& sg = path.segments[k];
        if (segment_min_level(sg) < 1e-6 * spectral_radius(sg.h_start))
            throw degenerate_path_error("evolve: gap collapses on segment " + std::to_string(k));
    }
    const double T = path.duration();
    const auto pc = detail::integrate(path, 0.0, T, steps_per_segment, integ);
    const auto d = path.dim(), dk = path.dim_k(), dg = path.dim_g();
    AdiabaticResult r;
    r.propagator = pc.u;
    r.dyn_phase = pc.omega;
    r.adiabatic_shift = pc.shift;
    r.steps = pc.steps;
    const cmat g0 = detail::ground_projector(path, 0.0), g1 = detail::ground_projector(path, T);
    const cmat x0 = identity(d) - g0, x1 = identity(d) - g1;
    const double ph = pc.omega + pc.shift;
    r.geometric_gate = detail::reduce_k(std::exp(-I1 * ph) * g1 * pc.u * g0, dk, dg);
    r.excited_gate = detail::reduce_k(std::exp(I1 * ph) * x1 * pc.u * x0, dk, dg);
    const cmat b0 = detail::basis_of(g0), b1 = detail::basis_of(g1);
    const cmat m = b1.adjoint() * pc.u * b0;
    r.ground_fidelity = std::clamp(eigh(m.adjoint() * m).values(0), 0.0, 1.0);
    r.leakage = 1.0 - r.ground_fidelity;
    return r;
}

// Doubles the step count until the propagator changes by < tol.
inline AdiabaticResult evolve_converged(const HolonomyPath& path, double tol = 1e-8, long start = 64,
                                        int max_doublings = 12) {
    auto prev = evolve(path, start);
    for (int k = 0; k < max_doublings; ++k) {
        auto next = evolve(path, start << (k + 1));
        if ((next.propagator - prev.propagator).cwiseAbs().maxCoeff() < tol) return next;
        prev = std::move(next);
    }
    throw numeric_error("evolve_converged: step doubling did not converge");
}

inline double unitarity_error(const cmat& u) {
    return (u.adjoint() * u - identity(u.rows())).cwiseAbs().maxCoeff();
}

// |Tr(A^dag B)/d|^2: 1 iff equal up to a global phase.
inline double gate_fidelity(const cmat& target, const cmat& u) {
    if (target.rows() != u.rows()) throw shape_error("gate_fidelity: dimension mismatch");
    return std::norm((target.adjoint() * u).trace() / static_cast<double>(u.rows()));
}

inline double wrap_phase(double a) {
    a = std::fmod(a, 2.0 * pi);
    return a < 0.0 ? a + 2.0 * pi : a;
}

// ---------------------------------------------------------------- gate recipes

// Chain of K-factor waypoints h_0 -> h_1 -> ... with a common schedule.
inline HolonomyPath chain(const std::vector<cmat>& pts, double t_seg, Schedule sc, const cmat& g = pauli_z()) {
    if (pts.size() < 2) throw domain_error("chain: need at least two waypoints");
    HolonomyPath p;
    p.gauge_factor = g;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) p.segments.push_back({pts[k], pts[k + 1], sc, t_seg});
    return p;
}

inline cmat diag_xy() { return (pauli_x() + pauli_y()) / std::sqrt(2.0); }

// Waypoints of the K factor; the stabilizer Hamiltonian is -K (x) G.
inline std::vector<cmat> z_loop_points() { return {pauli_z(), pauli_x(), -pauli_z(), -pauli_y(), pauli_z()}; }
inline std::vector<cmat> x_points() { return {pauli_z(), pauli_y(), -pauli_z()}; }
inline std::vector<cmat> phase_points() { return {pauli_z(), diag_xy(), -pauli_z(), -pauli_y(), pauli_z()}; }
inline std::vector<cmat> hadamard_points() {
    return {pauli_z(), pauli_x(), -pauli_z(), -pauli_y(), pauli_z(), pauli_x()};
}
inline std::vector<cmat> cnot_points() {
    const cmat i2 = identity(2);
    return {tensor(i2, pauli_z()), tensor(i2, pauli_y()), tensor(pauli_z(), pauli_z())};
}

struct GateRun {
    AdiabaticResult result;
    cmat gate;     // logical action on the K factor
    double phase0 = 0.0, phase1 = 0.0;
};

inline GateRun finish(AdiabaticResult r, const cmat& pre) {
    GateRun g{std::move(r), cmat()};
    g.gate = g.result.geometric_gate * pre;
    g.phase0 = wrap_phase(std::arg(g.gate(0, 0)));
    g.phase1 = wrap_phase(std::arg(g.gate(g.gate.rows() - 1, g.gate.rows() - 1)));
    return g;
}

inline long default_steps(double t_seg) { return std::max<long>(200, std::lround(8.0 * t_seg)); }

inline GateRun z_gate_loop(double t_seg, Schedule sc = Schedule::trig, long steps = 0) {
    return finish(evolve(chain(z_loop_points(), t_seg, sc), steps ? steps : default_steps(t_seg)), identity(2));
}
inline GateRun x_gate_sequence(double t_seg, Schedule sc = Schedule::trig, long steps = 0) {
    return finish(evolve(chain(x_points(), t_seg, sc), steps ? steps : default_steps(t_seg)), identity(2));
}
inline GateRun phase_gate(double t_seg, Schedule sc = Schedule::trig, long steps = 0) {
    return finish(evolve(chain(phase_points(), t_seg, sc), steps ? steps : default_steps(t_seg)), identity(2));
}
inline GateRun hadamard_gate(double t_seg, Schedule sc = Schedule::trig, long steps = 0) {
    return finish(evolve(chain(hadamard_points(), t_seg, sc), steps ? steps : default_steps(t_seg)),
                  identity(2));
}

inline cmat cnot_matrix() {
    cmat m = cmat::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
    return m;
}

// S^dag on the control, then the target rotation and the conditional
// interpolation as one continuous path on control (x) target (x) G.
inline GateRun cnot_construction(double t_seg, Schedule sc = Schedule::trig, long steps = 0) {
    cmat sdag = cmat::Identity(2, 2);
    sdag(1, 1) = -I1;
    return finish(evolve(chain(cnot_points(), t_seg, sc), steps ? steps : default_steps(t_seg)),
                  tensor(sdag, identity(2)));
}

// ---------------------------------------------------------------- sweep leakage

// Z -> -Z rotation about X in total time T_h, uniform (reparam none) or with
// the exp(-1/sin) reparameterization over the whole sweep.
inline HolonomyPath sweep_path(double t_h, Reparam rp) {
    auto p = chain(x_points(), t_h / 2.0, Schedule::trig);
    p.reparam = rp;
    return p;
}

inline double sweep_leakage(double t_h, Reparam rp, long steps = 0) {
    return evolve(sweep_path(t_h, rp), steps ? steps : std::max<long>(400, std::lround(20.0 * t_h))).leakage;
}

// Ground-state survival for the uniform sweep, eps = T_d / T_h.
inline double sweep_survival_closed_form(double eps) {
    if (!(eps > 0.0)) throw domain_error("sweep_survival_closed_form: eps must be > 0");
    const double q = 1.0 + eps * eps;
    const double c = std::cos(pi / (2.0 * eps) * std::sqrt(q));
    return 1.0 / q + eps * eps / q * c * c;
}

// ---------------------------------------------------------------- error audit

struct WeightReport {
    std::vector<double> weight;  // Pauli weight of the deviation touching each qubit
    std::vector<int> support;
    cmat deviation;
};

// Qubit weights of an operator on n qubits (qubit 0 leading).
inline std::vector<double> qubit_weights(const cmat& d) {
    const auto dim = d.rows();
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if ((Eigen::Index{1} << n) != dim) throw dimension_error("qubit_weights: not a qubit register");
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    const long total = 1L << (2 * n);
    for (long code = 0; code < total; ++code) {
        cmat p = identity(1);
        std::vector<int> ks(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q) {
            ks[static_cast<std::size_t>(q)] = static_cast<int>((code >> (2 * (n - 1 - q))) & 3);
            p = tensor(p, pauli(ks[static_cast<std::size_t>(q)]));
        }
        const double c = std::norm((p.adjoint() * d).trace() / static_cast<double>(dim));
        for (int q = 0; q < n; ++q)
            if (ks[static_cast<std::size_t>(q)] != 0) w[static_cast<std::size_t>(q)] += c;
    }
    return w;
}

// Inject a Pauli on one qubit at fraction `at` of the path and report the
// support of V(T, t_e) E V(T, t_e)^dag in the dynamical-phase-free frame.
inline WeightReport error_propagation_audit(const HolonomyPath& path, int pauli_index, int qubit, double at,
                                            long steps_per_segment = 0, double tol = 1e-4) {
    path.validate();
    if (pauli_index < 1 || pauli_index > 3) throw domain_error("audit: pauli index must be 1..3");
    if (!(at >= 0.0 && at <= 1.0)) throw domain_error("audit: time fraction outside [0,1]");
    const auto d = path.dim();
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    if ((Eigen::Index{1} << n) != d || qubit < 0 || qubit >= n) throw domain_error("audit: bad qubit index");
    const double T = path.duration(), te = at * T;
    const long steps = steps_per_segment ? steps_per_segment : default_steps(path.segments.front().T);
    const auto pc = detail::integrate(path, te, T, steps, Integrator::magnus4);
    const cmat v = detail::stripped(path, pc, te, T);
    const cmat e = embed(pauli(pauli_index), std::vector<int>(static_cast<std::size_t>(n), 2), qubit);
    WeightReport r;
    r.deviation = v * e * v.adjoint();
    r.weight = qubit_weights(r.deviation);
    for (int q = 0; q < n; ++q)
        if (r.weight[static_cast<std::size_t>(q)] > tol) r.support.push_back(q);
    return r;
}

}  // namespace oqs::holonomy
