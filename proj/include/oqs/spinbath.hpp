// spinbath.hpp - qubit Ising-coupled to N bath spins: exact solution and the
// Born / NZ / TCL / post-Markovian / coarse-grained approximations.
//
// Bloch convention: rho_01 = (vx - i vy)/2 evolves as rho_01(t) = f(t) rho_01(0), so
// vx(t) = vx C + vy S and vy(t) = vy C - vx S with C = Re f, S = Im f.

#pragma once

#include "ode.hpp"
#include "qcore.hpp"

#include <limits>
#include <string>
#include <vector>

namespace oqs::spinbath {

struct BathSpec {
    int n = 0;
    std::vector<double> g;
    std::vector<double> omega;
    double inv_temp = 1.0;
    double alpha = 1.0;

    void validate() const {
        if (n < 0 || static_cast<int>(g.size()) != n || static_cast<int>(omega.size()) != n)
            throw shape_error("BathSpec: g and omega must have n entries");
        for (int i = 0; i < n; ++i)
            if (std::abs(g[i]) > 1.0 || std::abs(omega[i]) > 1.0)
                throw domain_error("BathSpec: couplings and frequencies must lie in [-1, 1]");
        if (!(alpha > 0.0)) throw domain_error("BathSpec: alpha must be positive");
        if (!std::isfinite(inv_temp) || inv_temp < 0.0) throw domain_error("BathSpec: inv_temp must be >= 0");
    }
};

struct BlochXY {
    double vx = 0.0;
    double vy = 0.0;
};

struct CorrelatorSet {
    double q2 = 0.0, q3 = 0.0, q4 = 0.0;
};

inline BathSpec uniform_bath(int n, double g, double omega, double inv_temp, double alpha = 1.0) {
    BathSpec s{n, std::vector<double>(n, g), std::vector<double>(n, omega), inv_temp, alpha};
    s.validate();
    return s;
}

// g_{-m} = -g_m, Omega_{-m} = Omega_m; n must be even
inline BathSpec alternating_bath(int n, double g, double omega, double inv_temp, double alpha = 1.0) {
    if (n % 2) throw domain_error("alternating_bath: n must be even");
    BathSpec s{n, {}, std::vector<double>(n, omega), inv_temp, alpha};
    for (int i = 0; i < n; ++i) s.g.push_back(i % 2 ? -g : g);
    s.validate();
    return s;
}

inline BathSpec random_bath(int n, double inv_temp, qcore::Rng& rng, double alpha = 1.0) {
    BathSpec s{n, {}, {}, inv_temp, alpha};
    for (int i = 0; i < n; ++i) {
        s.g.push_back(rng.uniform(-1.0, 1.0));
        s.omega.push_back(rng.uniform(-1.0, 1.0));
    }
    return s;
}

inline std::vector<double> beta_n(const BathSpec& s) {
    std::vector<double> b(s.n);
    for (int i = 0; i < s.n; ++i) b[i] = std::tanh(-s.omega[i] * s.inv_temp / 2.0);
    return b;
}

inline double theta(const BathSpec& s) {
    const auto b = beta_n(s);
    double t = 0.0;
    for (int i = 0; i < s.n; ++i) t += s.g[i] * b[i];
    return t;
}

// ---------------------------------------------------------------- exact solution

inline cplx exact_f(const BathSpec& s, double t) {
    const auto b = beta_n(s);
    const double a = s.alpha;
    cplx f = std::exp(cplx(0.0, 2.0 * a * theta(s) * t));
    for (int i = 0; i < s.n; ++i) {
        const double w = 2.0 * a * s.g[i] * t;
        f *= cplx(std::cos(w), -b[i] * std::sin(w));
    }
    return f;
}

inline BlochXY rotate(const BlochXY& v, double c, double sn) {
    return {v.vx * c + v.vy * sn, v.vy * c - v.vx * sn};
}

inline BlochXY exact_bloch(const BathSpec& s, const BlochXY& v0, double t) {
    const cplx f = exact_f(s, t);
    return rotate(v0, f.real(), f.imag());
}

// Trace distance between two states sharing v_z.
inline double trace_distance(const BlochXY& a, const BlochXY& b) {
    return 0.5 * std::hypot(a.vx - b.vx, a.vy - b.vy);
}

// ---------------------------------------------------------------- bath correlators

// Q_k = sum_l lambda_l E~_l^k, enumerated over the 2^n bath configurations.
inline CorrelatorSet correlators_enumerated(const BathSpec& s) {
    if (s.n > 20) throw domain_error("correlators_enumerated: n > 20");
    const auto b = beta_n(s);
    const double th = theta(s);
    CorrelatorSet q;
    const unsigned long count = 1ul << s.n;
    for (unsigned long l = 0; l < count; ++l) {
        double w = 1.0, e = -th;
        for (int i = 0; i < s.n; ++i) {
            const double sgn = (l >> i) & 1ul ? -1.0 : 1.0;  // sigma_z eigenvalue
            w *= 0.5 * (1.0 + b[i] * sgn);
            e += s.g[i] * sgn;
        }
        q.q2 += w * e * e;
        q.q3 += w * e * e * e;
        q.q4 += w * e * e * e * e;
    }
    return q;
}

// Independent centered spins: central moments from per-spin cumulants.
inline CorrelatorSet correlators_moments(const BathSpec& s) {
    const auto b = beta_n(s);
    CorrelatorSet q;
    double k4 = 0.0;
    for (int i = 0; i < s.n; ++i) {
        const double v = 1.0 - b[i] * b[i];
        const double g = s.g[i];
        q.q2 += g * g * v;
        q.q3 += g * g * g * (-2.0 * b[i] * v);
        k4 += g * g * g * g * v * (6.0 * b[i] * b[i] - 2.0);
    }
    q.q4 = k4 + 3.0 * q.q2 * q.q2;
    return q;
}

inline CorrelatorSet correlators(const BathSpec& s) {
    return s.n <= 20 ? correlators_enumerated(s) : correlators_moments(s);
}

inline double q2_closed(const BathSpec& s) {
    const auto b = beta_n(s);
    double q = 0.0;
    for (int i = 0; i < s.n; ++i) q += s.g[i] * s.g[i] * (1.0 - b[i] * b[i]);
    return q;
}

// ---------------------------------------------------------------- approximations

inline BlochXY born_nz2(const BathSpec& s, const BlochXY& v0, double t) {
    const double c = std::cos(2.0 * s.alpha * std::sqrt(q2_closed(s)) * t);
    return {v0.vx * c, v0.vy * c};
}

inline BlochXY tcl_solution(const BathSpec& s, int order, const BlochXY& v0, double t) {
    if (order < 2 || order > 4) throw unsupported_error("tcl_solution: order must be 2, 3 or 4");
    const auto q = correlators(s);
    const double at = s.alpha * t;
    double expo = -2.0 * q.q2 * at * at;
    if (order == 4) expo += (2.0 * q.q4 - 6.0 * q.q2 * q.q2) * std::pow(at, 4) / 3.0;
    const double amp = std::exp(expo);
    const double g = order >= 3 ? 4.0 * q.q3 * std::pow(at, 3) / 3.0 : 0.0;
    return rotate({amp * v0.vx, amp * v0.vy}, std::cos(g), std::sin(g));
}

// NZ2..4 as a linear system in z = rho_01 and its nested integrals J1, J2, J3:
//   z' = -4 a^2 Q2 J1 + 8 i a^3 Q3 J2 + 16 a^4 (Q4 - Q2^2) J3,  J1' = z, J2' = J1, J3' = J2.
// Real state (Re z, Im z, Re J1, Im J1, Re J2, Im J2, Re J3, Im J3).
inline rmat nz_generator(const BathSpec& s, int order) {
    if (order < 2 || order > 4) throw unsupported_error("nz_solution: order must be 2, 3 or 4");
    const auto q = correlators(s);
    const double a = s.alpha;
    const double c1 = -4.0 * a * a * q.q2;
    const double c2 = order >= 3 ? 8.0 * a * a * a * q.q3 : 0.0;
    const double c3 = order >= 4 ? 16.0 * std::pow(a, 4) * (q.q4 - q.q2 * q.q2) : 0.0;
    rmat m = rmat::Zero(8, 8);
    m(0, 2) = c1;
    m(1, 3) = c1;
    m(0, 5) = -c2;
    m(1, 4) = c2;
    m(0, 6) = c3;
    m(1, 7) = c3;
    for (int k = 0; k < 6; ++k) m(2 + k, k) = 1.0;
    return m;
}

inline std::vector<BlochXY> nz_solution(const BathSpec& s, int order, const BlochXY& v0,
                                        const std::vector<double>& t_grid, double tol = 1e-6,
                                        ode::Refinement* info = nullptr) {
    if (t_grid.size() < 2) throw domain_error("nz_solution: grid needs at least two points");
    const double h = t_grid[1] - t_grid[0];
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (std::abs(t_grid[i] - t_grid[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw domain_error("nz_solution: time grid must be uniform");
    const rmat a = nz_generator(s, order);
    rvec y0 = rvec::Zero(8);
    y0(0) = v0.vx / 2.0;
    y0(1) = -v0.vy / 2.0;
    // shift to t = 0 if the grid starts later
    std::vector<double> grid = t_grid;
    if (grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
    const auto ys = ode::rk4_linear_converged(a, y0, grid, tol, 1, 14, info);
    std::vector<BlochXY> out;
    for (std::size_t i = grid.size() - t_grid.size(); i < ys.size(); ++i)
        out.push_back({2.0 * ys[i](0), -2.0 * ys[i](1)});
    return out;
}

// ---------------------------------------------------------------- coarse graining

enum class CgForm {
    master_equation,  // solution of the coarse-grained Lindblad equation: exp(-2 g t), angle 2 w t
    printed           // exp(-g t), angle w t
};

struct CgRates {
    double omega = 0.0;
    double gamma = 0.0;
};

inline CgRates cg_rates(const BathSpec& s, double tau) {
    if (!(tau > 0.0)) throw domain_error("coarse_grain: tau must be positive");
    const cplx f = exact_f(s, tau);
    return {f.imag() / (2.0 * tau), (1.0 - f.real()) / (2.0 * tau)};
}

inline BlochXY coarse_grain(const BathSpec& s, double tau, const BlochXY& v0, double t,
                            CgForm form = CgForm::master_equation) {
    const auto r = cg_rates(s, tau);
    const double k = form == CgForm::master_equation ? 2.0 : 1.0;
    const double damp = std::exp(-k * r.gamma * t);
    return rotate(v0, damp * std::cos(k * r.omega * t), damp * std::sin(k * r.omega * t));
}

// Time-averaged trace distance to the exact solution over [0, T] (trapezoid, `samples` intervals).
inline double cg_average_distance(const BathSpec& s, double tau, double horizon, const BlochXY& v0,
                                  CgForm form = CgForm::master_equation, int samples = 2000) {
    if (!(horizon > 0.0)) throw domain_error("cg_average_distance: horizon must be positive");
    double acc = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double t = horizon * i / samples;
        const double d = trace_distance(exact_bloch(s, v0, t), coarse_grain(s, tau, v0, t, form));
        acc += (i == 0 || i == samples) ? 0.5 * d : d;
    }
    return acc / samples;
}

struct OptimalTau {
    double tau = 0.0;
    double distance = 0.0;
};

inline OptimalTau optimal_tau(const BathSpec& s, double horizon, const std::vector<double>& grid,
                              const BlochXY& v0 = {0.70710678118654752, 0.70710678118654752}, CgForm form = CgForm::master_equation) {
    if (grid.empty()) throw domain_error("optimal_tau: empty tau grid");
    OptimalTau best{grid.front(), std::numeric_limits<double>::infinity()};
    for (double tau : grid) {
        const double d = cg_average_distance(s, tau, horizon, v0, form);
        if (d < best.distance) best = {tau, d};
    }
    return best;
}

// First time |f| drops below `level`, scanning in steps of dt up to t_max.
inline double decay_time(const BathSpec& s, double level, double dt, double t_max) {
    for (double t = 0.0; t <= t_max; t += dt)
        if (std::abs(exact_f(s, t)) < level) return t;
    throw numeric_error("decay_time: |f| stays above the level up to t_max");
}

// ---------------------------------------------------------------- post-Markovian

enum class PmKernel { optimal, nz2_match };

inline double pm_xi(const BathSpec& s, PmKernel k, double t) {
    return k == PmKernel::optimal ? exact_f(s, t).real()
                                  : std::cos(2.0 * s.alpha * std::sqrt(q2_closed(s)) * t);
}

inline BlochXY post_markovian(const BathSpec& s, PmKernel k, const BlochXY& v0, double t) {
    const double xi = pm_xi(s, k, t);
    return {xi * v0.vx, xi * v0.vy};
}

// ---------------------------------------------------------------- model dispatch

enum class Model { exact, nz2, nz3, nz4, tcl2, tcl3, tcl4, pm, cg };

inline Model parse_model(const std::string& m) {
    if (m == "exact") return Model::exact;
    if (m == "nz2") return Model::nz2;
    if (m == "nz3") return Model::nz3;
    if (m == "nz4") return Model::nz4;
    if (m == "tcl2") return Model::tcl2;
    if (m == "tcl3") return Model::tcl3;
    if (m == "tcl4") return Model::tcl4;
    if (m == "pm") return Model::pm;
    if (m == "cg") return Model::cg;
    throw domain_error("unknown spin-bath model '" + m + "'");
}

// Trajectory of one model on a uniform grid; cg uses the optimal tau over the decay horizon.
inline std::vector<BlochXY> model_trajectory(const BathSpec& s, Model m, const BlochXY& v0,
                                             const std::vector<double>& grid) {
    std::vector<BlochXY> out;
    out.reserve(grid.size());
    switch (m) {
        case Model::nz2:
        case Model::nz3:
        case Model::nz4: {
            const int order = m == Model::nz2 ? 2 : m == Model::nz3 ? 3 : 4;
            return nz_solution(s, order, v0, grid);
        }
        case Model::cg: {
            const double horizon = std::max(grid.back(), 1e-6);
            std::vector<double> taus;
            for (int i = 1; i <= 400; ++i) taus.push_back(horizon * i / 400.0);
            const auto best = optimal_tau(s, horizon, taus, v0);
            for (double t : grid) out.push_back(coarse_grain(s, best.tau, v0, t));
            return out;
        }
        default:
            break;
    }
    for (double t : grid) {
        switch (m) {
            case Model::exact: out.push_back(exact_bloch(s, v0, t)); break;
            case Model::tcl2: out.push_back(tcl_solution(s, 2, v0, t)); break;
            case Model::tcl3: out.push_back(tcl_solution(s, 3, v0, t)); break;
            case Model::tcl4: out.push_back(tcl_solution(s, 4, v0, t)); break;
            case Model::pm: out.push_back(post_markovian(s, PmKernel::optimal, v0, t)); break;
            default: break;
        }
    }
    return out;
}

}  // namespace oqs::spinbath
