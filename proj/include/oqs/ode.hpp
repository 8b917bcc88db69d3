// ode.hpp - fixed-step RK4 with step-halving acceptance.

#pragma once

#include "qcore.hpp"

#include <string>
#include <vector>

namespace oqs::ode {

// One RK4 step for y' = f(t, y).
template <class Y, class F>
Y rk4_step(const F& f, double t, const Y& y, double h) {
    const Y k1 = f(t, y);
    const Y k2 = f(t + 0.5 * h, Y(y + (0.5 * h) * k1));
    const Y k3 = f(t + 0.5 * h, Y(y + (0.5 * h) * k2));
    const Y k4 = f(t + h, Y(y + h * k3));
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Values at every grid point, `sub` equal RK4 substeps per grid interval.
template <class Y, class F>
std::vector<Y> rk4_grid(const F& f, const Y& y0, const std::vector<double>& grid, int sub) {
    std::vector<Y> out;
    out.reserve(grid.size());
    Y y = y0;
    out.push_back(y);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double h = (grid[i] - grid[i - 1]) / sub;
        double t = grid[i - 1];
        for (int s = 0; s < sub; ++s, t += h) y = rk4_step(f, t, y, h);
        out.push_back(y);
    }
    return out;
}

template <class Y>
double sup_diff(const std::vector<Y>& a, const std::vector<Y>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return m;
}

// pointwise |a - b| / max(1, |b|): absolute near the unit ball, relative once a solution blows up
template <class Y>
double sup_scaled_diff(const std::vector<Y>& a, const std::vector<Y>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff() / std::max(1.0, b[i].cwiseAbs().maxCoeff()));
    return m;
}

struct Refinement {
    int substeps = 0;
    double change = 0.0;  // scaled sup-norm change at the last halving
};

// Halve the step until the whole trajectory moves by less than `tol`.
template <class Y, class F>
std::vector<Y> rk4_grid_converged(const F& f, const Y& y0, const std::vector<double>& grid, double tol,
                                  int sub0 = 1, int max_halvings = 14, Refinement* info = nullptr) {
    if (grid.size() < 2) throw domain_error("rk4: time grid needs at least two points");
    int sub = std::max(1, sub0);
    auto prev = rk4_grid(f, y0, grid, sub);
    for (int k = 0; k < max_halvings; ++k) {
        sub *= 2;
        auto next = rk4_grid(f, y0, grid, sub);
        const double ch = sup_scaled_diff(prev, next);
        const bool finite = next.back().allFinite();
        if (finite && ch < tol) {
            if (info) *info = {sub, ch};
            return next;
        }
        prev = std::move(next);
    }
    throw numeric_error("rk4: step halving did not converge to " + std::to_string(tol));
}

// Linear constant-coefficient system y' = A y: the RK4 step is the matrix polynomial
// P(hA) = I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24, applied repeatedly.
template <class M, class V>
std::vector<V> rk4_linear_grid(const M& a, const V& y0, const std::vector<double>& grid, int sub) {
    std::vector<V> out;
    out.reserve(grid.size());
    out.push_back(y0);
    V y = y0;
    M step;
    double last_h = -1.0;
    const auto n = a.rows();
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double h = (grid[i] - grid[i - 1]) / sub;
        if (h != last_h) {
            const M ha = h * a;
            M term = M::Identity(n, n);
            step = M::Identity(n, n);
            for (int k = 1; k <= 4; ++k) {
                term = (term * ha) / static_cast<double>(k);
                step += term;
            }
            last_h = h;
        }
        for (int s = 0; s < sub; ++s) y = step * y;
        out.push_back(y);
    }
    return out;
}

template <class M, class V>
std::vector<V> rk4_linear_converged(const M& a, const V& y0, const std::vector<double>& grid, double tol,
                                    int sub0 = 1, int max_halvings = 14, Refinement* info = nullptr) {
    if (grid.size() < 2) throw domain_error("rk4: time grid needs at least two points");
    int sub = std::max(1, sub0);
    auto prev = rk4_linear_grid(a, y0, grid, sub);
    for (int k = 0; k < max_halvings; ++k) {
        sub *= 2;
        auto next = rk4_linear_grid(a, y0, grid, sub);
        const bool finite = next.back().allFinite() && prev.back().allFinite();
        const double ch = finite ? sup_scaled_diff(prev, next) : std::numeric_limits<double>::infinity();
        if (ch < tol) {
            if (info) *info = {sub, ch};
            return next;
        }
        prev = std::move(next);
    }
    throw numeric_error("rk4: step halving did not converge to " + std::to_string(tol));
}

inline std::vector<double> uniform_grid(double t0, double t1, int steps) {
    if (steps < 1) throw domain_error("uniform_grid: steps must be positive");
    std::vector<double> g(steps + 1);
    for (int i = 0; i <= steps; ++i) g[i] = t0 + (t1 - t0) * i / steps;
    return g;
}

}  // namespace oqs::ode
