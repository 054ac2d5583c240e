#pragma once

#include <cmath>
#include <functional>

#include "ferroconnect/errors.hpp"
#include "ferroconnect/geometry.hpp"

// The scalar Allen-Cahn structure of the magnetisation in the eigenframe of the
// order tensor: the well potential h, its two minima, and the optimal 1-D
// transition cost between them.
namespace ferroconnect::wall {

using geom::Vec2;

// h(u) = (|u|^2-1)^2/4 - (beta/sqrt(2))(u1^2-u2^2) + (beta^2+sqrt(2)beta)/2.
inline double well_potential(Vec2 u, double beta) {
    const double n2 = u.x * u.x + u.y * u.y;
    return 0.25 * (n2 - 1.0) * (n2 - 1.0) - (beta / std::sqrt(2.0)) * (u.x * u.x - u.y * u.y) +
           0.5 * (beta * beta + std::sqrt(2.0) * beta);
}

// The two wells u_+- = (+-(sqrt(2)beta+1)^(1/2), 0).
inline double well_amplitude(double beta) { return std::sqrt(std::sqrt(2.0) * beta + 1.0); }
inline Vec2 well_plus(double beta) { return {well_amplitude(beta), 0.0}; }
inline Vec2 well_minus(double beta) { return {-well_amplitude(beta), 0.0}; }

// c_beta = (2 sqrt(2)/3) (sqrt(2) beta + 1)^(3/2).
inline double transition_cost_closed_form(double beta) {
    const double a2 = std::sqrt(2.0) * beta + 1.0;
    return (2.0 * std::sqrt(2.0) / 3.0) * a2 * std::sqrt(a2);
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson(f, a, m, fa, f(0.5 * (a + m)), fm, whole / 2.0, tol, 40) +
           detail::adaptive_simpson(f, m, b, fm, f(0.5 * (m + b)), fb, whole / 2.0, tol, 40);
}

struct TransitionCost {
    double closed_form = 0.0;
    double quadrature = 0.0;
};

// Geodesic transition cost between the wells along the first axis, both as the
// closed form and as adaptive quadrature of sqrt(2 h(t, 0)).
inline TransitionCost wall_transition_cost(double beta) {
    if (beta < 0.0) throw usage_error("wall_transition_cost: beta must be nonnegative");
    TransitionCost r;
    r.closed_form = transition_cost_closed_form(beta);
    const double a = well_amplitude(beta);
    r.quadrature = integrate(
        [beta](double t) { return std::sqrt(std::max(0.0, 2.0 * well_potential({t, 0.0}, beta))); },
        -a, a);
    return r;
}

// Optimal scalar profile through the wall: t(s) solving eps t' = sqrt(2 h(t,0)),
// i.e. t(s) = a tanh(a s / (sqrt(2) eps)).
inline double optimal_profile(double s, double beta, double eps) {
    const double a = well_amplitude(beta);
    return a * std::tanh(a * s / (std::sqrt(2.0) * eps));
}

}  // namespace ferroconnect::wall
