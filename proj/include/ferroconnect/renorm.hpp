#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ferroconnect/connection.hpp"
#include "ferroconnect/errors.hpp"
#include "ferroconnect/grid.hpp"
#include "ferroconnect/rng.hpp"
#include "ferroconnect/wall_profile.hpp"

// Canonical harmonic maps with prescribed point singularities, the renormalised
// energy of a vortex configuration, the vortex core energy, and minimisation of
// the wall-corrected renormalised energy over configurations.
namespace ferroconnect::renorm {

using geom::Domain;
using geom::Vec2;
using grid::Grid;
using grid::GridField;

// Boundary tensor datum of prescribed winding along the boundary, plus an
// optional arclength-dependent phase. A director datum n_bd of degree d gives
// q_bd = n_bd^2 of winding 2d.
struct BoundaryDatum {
    int q_winding = 0;
    std::function<double(double)> phase;  // extra tensor angle vs arc length; may be null

    static BoundaryDatum from_director_degree(int d, std::function<double(double)> director_phase = {}) {
        BoundaryDatum b;
        b.q_winding = 2 * d;
        if (director_phase)
            b.phase = [director_phase](double s) { return 2.0 * director_phase(s); };
        return b;
    }

    double q_angle(double arclength, double perimeter) const {
        return q_winding * 2.0 * M_PI * arclength / perimeter +
               (phase ? phase(arclength) : 0.0);
    }
    Vec2 q_value(double arclength, double perimeter) const {
        const double th = q_angle(arclength, perimeter);
        return {std::cos(th), std::sin(th)};
    }
};

struct VortexConfig {
    std::vector<Vec2> points;  // 2|d| distinct interior points
    int degree_sign = 1;       // every q-degree is sign(d)
};

// ---------------------------------------------------------------------------
// Masked Dirichlet Laplace solver (conjugate gradient)

namespace detail {

// Solves -Lap u = 0 with u = bc on the listed cells; other masked cells are
// unknowns. Plain CG on the 5-point operator.
inline std::vector<double> solve_laplace_dirichlet(const GridField& dom,
                                                   const std::vector<double>& bc_values,
                                                   const std::vector<std::uint8_t>& is_bc,
                                                   double tol = 1e-10, int max_iter = 20000) {
    const Grid& g = dom.g;
    const int n = g.size();
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < n; ++c)
        if (dom.in(c) && is_bc[c]) u[c] = bc_values[c];

    std::vector<int> unknowns;
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (int c = 0; c < n; ++c)
        if (dom.in(c) && !is_bc[c]) {
            slot[c] = static_cast<int>(unknowns.size());
            unknowns.push_back(c);
        }
    const int m = static_cast<int>(unknowns.size());
    if (m == 0) return u;

    auto neighbors = [&](int c, int out[4]) {
        const int i = c % g.nx, j = c / g.nx;
        out[0] = g.valid(i + 1, j) ? c + 1 : -1;
        out[1] = g.valid(i - 1, j) ? c - 1 : -1;
        out[2] = g.valid(i, j + 1) ? c + g.nx : -1;
        out[3] = g.valid(i, j - 1) ? c - g.nx : -1;
    };
    // A x = b with A = graph Laplacian restricted to unknowns.
    std::vector<double> b(static_cast<std::size_t>(m), 0.0);
    for (int k = 0; k < m; ++k) {
        int nb[4];
        neighbors(unknowns[static_cast<std::size_t>(k)], nb);
        for (const int c2 : nb)
            if (c2 >= 0 && dom.in(c2) && is_bc[c2]) b[static_cast<std::size_t>(k)] += u[c2];
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (int k = 0; k < m; ++k) {
            const int c = unknowns[static_cast<std::size_t>(k)];
            int nb[4];
            neighbors(c, nb);
            double acc = 0.0;
            int deg = 0;
            for (const int c2 : nb) {
                if (c2 < 0 || !dom.in(c2)) continue;
                ++deg;
                if (slot[c2] >= 0) acc += x[static_cast<std::size_t>(slot[c2])];
            }
            y[static_cast<std::size_t>(k)] = deg * x[static_cast<std::size_t>(k)] - acc;
        }
    };
    std::vector<double> x(static_cast<std::size_t>(m), 0.0), r = b,
                        p = b, ap(static_cast<std::size_t>(m), 0.0);
    double rs = 0.0;
    for (const double v : r) rs += v * v;
    const double rs0 = rs;
    for (int it = 0; it < max_iter && rs > tol * tol * std::max(rs0, 1.0); ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (int k = 0; k < m; ++k)
            pap += p[static_cast<std::size_t>(k)] * ap[static_cast<std::size_t>(k)];
        if (pap <= 0.0) break;
        const double alpha = rs / pap;
        for (int k = 0; k < m; ++k) {
            x[static_cast<std::size_t>(k)] += alpha * p[static_cast<std::size_t>(k)];
            r[static_cast<std::size_t>(k)] -= alpha * ap[static_cast<std::size_t>(k)];
        }
        double rs_new = 0.0;
        for (const double v : r) rs_new += v * v;
        for (int k = 0; k < m; ++k)
            p[static_cast<std::size_t>(k)] =
                r[static_cast<std::size_t>(k)] + (rs_new / rs) * p[static_cast<std::size_t>(k)];
        rs = rs_new;
    }
    for (int k = 0; k < m; ++k) u[unknowns[static_cast<std::size_t>(k)]] = x[static_cast<std::size_t>(k)];
    return u;
}

// Boundary cells ordered by the arc length of their projection onto the domain
// boundary; used to unwrap phases along the Dirichlet ring.
inline std::vector<std::pair<double, int>> ordered_boundary_cells(const GridField& f,
                                                                  const Domain& dom) {
    std::vector<std::pair<double, int>> ring;
    const auto bc = grid::boundary_cells(f);
    for (int c = 0; c < f.g.size(); ++c)
        if (f.in(c) && bc[c]) ring.push_back({dom.boundary_projection(f.g.center(c)).arclength, c});
    std::sort(ring.begin(), ring.end());
    return ring;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Canonical harmonic map

struct CanonicalMap {
    GridField q;                      // unit tensor field, singular at the vortices
    std::vector<double> phase;        // total phase per cell (product factor + harmonic part)
    VortexConfig config;
    double perimeter = 0.0;
};

// Phase of the product of unit vortex factors centred at the configuration.
inline double vortex_product_phase(const VortexConfig& cfg, Vec2 x) {
    double phi = 0.0;
    for (const Vec2& a : cfg.points) phi += std::atan2(x.y - a.y, x.x - a.x);
    return cfg.degree_sign * phi;
}

// q* = (prod_j (z-a_j)/|z-a_j|)^sign e^{iH} with H the discrete harmonic
// function matching the boundary datum's phase relative to the product factor.
inline CanonicalMap canonical_harmonic_map(const Domain& dom, const VortexConfig& cfg,
                                           const BoundaryDatum& datum, int n) {
    if (cfg.points.empty())
        throw usage_error("canonical_harmonic_map: need at least one singular point");
    if (static_cast<int>(cfg.points.size()) * cfg.degree_sign != datum.q_winding)
        throw usage_error("canonical_harmonic_map: winding mismatch between datum and config");

    CanonicalMap out;
    out.config = cfg;
    out.perimeter = dom.perimeter();
    out.q = grid::make_domain_field(dom, n, 2);
    GridField& f = out.q;
    const Grid& g = f.g;

    // Relative phase on the boundary ring, unwrapped; its total increment must
    // vanish because the datum and the product factor carry the same winding.
    const auto ring = detail::ordered_boundary_cells(f, dom);
    if (ring.empty()) throw numeric_error("canonical_harmonic_map: empty boundary ring");
    std::vector<double> psi(static_cast<std::size_t>(g.size()), 0.0);
    std::vector<std::uint8_t> is_bc(static_cast<std::size_t>(g.size()), 0);
    double prev = 0.0;
    bool first = true;
    double first_val = 0.0;
    for (const auto& [s, c] : ring) {
        const Vec2 qbd = datum.q_value(s, out.perimeter);
        const double rel = std::atan2(qbd.y, qbd.x) - 2.0 * vortex_product_phase(cfg, g.center(c));
        double val;
        if (first) {
            val = std::remainder(rel, 2.0 * M_PI);
            first_val = val;
            first = false;
        } else {
            val = prev + std::remainder(rel - prev, 2.0 * M_PI);
        }
        psi[c] = val;
        is_bc[c] = 1;
        prev = val;
    }
    // Closure check across the wrap.
    const double wrap = std::remainder(first_val - prev, 2.0 * M_PI);
    if (std::abs((prev + wrap) - first_val) > 1e-6)
        throw numeric_error("canonical_harmonic_map: boundary phase fails to close up");

    const auto H = detail::solve_laplace_dirichlet(f, psi, is_bc);
    out.phase.assign(static_cast<std::size_t>(g.size()), 0.0);
    for (int c = 0; c < g.size(); ++c) {
        if (!f.in(c)) continue;
        const double phi = 2.0 * vortex_product_phase(cfg, g.center(c)) + H[c];
        out.phase[c] = phi;
        f.set_vec(c, {std::cos(phi), std::sin(phi)});
    }
    return out;
}

// Max norm of the residual of the divergence-free condition
// d_j(Q11 d_j Q12 - Q12 d_j Q11) = 0, away from the cores and the boundary.
inline double canonical_residual_maxnorm(const CanonicalMap& cm, double exclusion_radius = 0.1) {
    const GridField& f = cm.q;
    const Grid& g = f.g;
    auto jx = [&](int i, int j) {
        const int c = g.idx(i, j);
        const Vec2 q = f.vec(c);
        const Vec2 qe = f.vec(g.idx(i + 1, j)), qw = f.vec(g.idx(i - 1, j));
        return 0.5 * (q.x * (qe.y - qw.y) - q.y * (qe.x - qw.x)) / g.h;
    };
    auto jy = [&](int i, int j) {
        const int c = g.idx(i, j);
        const Vec2 q = f.vec(c);
        const Vec2 qn = f.vec(g.idx(i, j + 1)), qs = f.vec(g.idx(i, j - 1));
        return 0.5 * (q.x * (qn.y - qs.y) - q.y * (qn.x - qs.x)) / g.h;
    };
    double best = 0.0;
    for (int j = 2; j < g.ny - 2; ++j)
        for (int i = 2; i < g.nx - 2; ++i) {
            bool ok = true;
            for (int dj = -2; dj <= 2 && ok; ++dj)
                for (int di = -2; di <= 2 && ok; ++di)
                    if (!f.in(i + di, j + dj)) ok = false;
            if (!ok) continue;
            const Vec2 x = g.center(i, j);
            for (const Vec2& a : cm.config.points)
                if (geom::dist(x, a) < exclusion_radius) ok = false;
            if (!ok) continue;
            const double div =
                0.5 * (jx(i + 1, j) - jx(i - 1, j)) / g.h + 0.5 * (jy(i, j + 1) - jy(i, j - 1)) / g.h;
            best = std::max(best, std::abs(div));
        }
    return best;
}

// ---------------------------------------------------------------------------
// Renormalised energy

struct RenormalizedEnergy {
    double value = 0.0;              // extrapolated to sigma -> 0
    double spread = 0.0;             // max - min over the sigma window
    std::vector<double> sigmas;      // evaluation radii
    std::vector<double> window;      // W(sigma) samples
};

// Evaluates (1/2) int_{Omega minus union B_sigma} |grad q*|^2 - 2 pi |d| |log sigma|
// over sigma in {8h, 16h, 32h} and extrapolates linearly in sigma. Cells cut by
// a core circle are weighted with a subsampled coverage fraction.
inline RenormalizedEnergy renormalized_energy(const Domain& dom, const VortexConfig& cfg,
                                              const BoundaryDatum& datum, int n) {
    const CanonicalMap cm = canonical_harmonic_map(dom, cfg, datum, n);
    const GridField& f = cm.q;
    const Grid& g = f.g;
    const double h = g.h;
    const double sigma_max = 32.0 * h;
    double min_sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
        min_sep = std::min(min_sep, dom.boundary_distance(cfg.points[i]));
        for (std::size_t j = i + 1; j < cfg.points.size(); ++j)
            min_sep = std::min(min_sep, 0.5 * geom::dist(cfg.points[i], cfg.points[j]));
    }
    if (min_sep <= sigma_max)
        throw numeric_error("renormalized_energy: points too close for the sigma window");

    auto coverage = [&](Vec2 c) {
        // Fraction of the cell centred at c lying outside every core ball.
        double near = std::numeric_limits<double>::infinity();
        for (const Vec2& a : cfg.points) near = std::min(near, geom::dist(c, a));
        return near;  // distance; refined below per sigma
    };
    std::vector<double> near_dist(static_cast<std::size_t>(g.size()), 0.0);
    for (int c = 0; c < g.size(); ++c)
        if (f.in(c)) near_dist[c] = coverage(g.center(c));

    const double diag = 0.7071067811865476 * h;
    RenormalizedEnergy out;
    out.sigmas = {8.0 * h, 16.0 * h, 32.0 * h};
    for (const double sigma : out.sigmas) {
        double energy = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int c = g.idx(i, j);
                if (!f.in(c)) continue;
                double w = 1.0;
                if (near_dist[c] < sigma - diag)
                    continue;
                else if (near_dist[c] < sigma + diag) {
                    int outside = 0;
                    for (int sj = 0; sj < 4; ++sj)
                        for (int si = 0; si < 4; ++si) {
                            const Vec2 p{g.center(i, j).x + (si - 1.5) * h / 4.0,
                                         g.center(i, j).y + (sj - 1.5) * h / 4.0};
                            bool out_all = true;
                            for (const Vec2& a : cfg.points)
                                if (geom::dist(p, a) < sigma) out_all = false;
                            if (out_all) ++outside;
                        }
                    w = outside / 16.0;
                    if (w == 0.0) continue;
                }
                // Centered-difference energy density where possible.
                double gx2 = 0.0, gy2 = 0.0;
                if (f.in(i + 1, j) && f.in(i - 1, j)) {
                    const Vec2 d = 0.5 * (f.vec(g.idx(i + 1, j)) - f.vec(g.idx(i - 1, j)));
                    gx2 = (d.x * d.x + d.y * d.y) / (h * h);
                } else if (f.in(i + 1, j)) {
                    const Vec2 d = f.vec(g.idx(i + 1, j)) - f.vec(c);
                    gx2 = (d.x * d.x + d.y * d.y) / (h * h);
                } else if (f.in(i - 1, j)) {
                    const Vec2 d = f.vec(c) - f.vec(g.idx(i - 1, j));
                    gx2 = (d.x * d.x + d.y * d.y) / (h * h);
                }
                if (f.in(i, j + 1) && f.in(i, j - 1)) {
                    const Vec2 d = 0.5 * (f.vec(g.idx(i, j + 1)) - f.vec(g.idx(i, j - 1)));
                    gy2 = (d.x * d.x + d.y * d.y) / (h * h);
                } else if (f.in(i, j + 1)) {
                    const Vec2 d = f.vec(g.idx(i, j + 1)) - f.vec(c);
                    gy2 = (d.x * d.x + d.y * d.y) / (h * h);
                } else if (f.in(i, j - 1)) {
                    const Vec2 d = f.vec(c) - f.vec(g.idx(i, j - 1));
                    gy2 = (d.x * d.x + d.y * d.y) / (h * h);
                }
                energy += 0.5 * (gx2 + gy2) * h * h * w;
            }
        const double dmod = 0.5 * static_cast<double>(cfg.points.size());
        out.window.push_back(energy + 2.0 * M_PI * dmod * std::log(sigma));
    }
    // Least-squares linear fit in sigma; report the intercept and the spread.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const int m = static_cast<int>(out.window.size());
    for (int k = 0; k < m; ++k) {
        sx += out.sigmas[static_cast<std::size_t>(k)];
        sy += out.window[static_cast<std::size_t>(k)];
        sxx += out.sigmas[static_cast<std::size_t>(k)] * out.sigmas[static_cast<std::size_t>(k)];
        sxy += out.sigmas[static_cast<std::size_t>(k)] * out.window[static_cast<std::size_t>(k)];
    }
    const double denom = m * sxx - sx * sx;
    out.value = (sy * sxx - sx * sxy) / denom;
    out.spread = *std::max_element(out.window.begin(), out.window.end()) -
                 *std::min_element(out.window.begin(), out.window.end());
    return out;
}

// ---------------------------------------------------------------------------
// Core energy

struct CoreEnergy {
    double gamma = 0.0;               // gamma(eps)
    std::vector<double> profile;      // radial minimiser f(r_k), r_k = k/(M)
};

// Radial reduction of the unit-disk problem with u(x) = x on the boundary:
// minimise int_0^1 ( (f'^2 + f^2/r^2)/2 + (f^2-1)^2/(4 eps^2) ) 2 pi r dr.
inline CoreEnergy core_energy(double eps, int m = 6000) {
    if (eps <= 0.0 || eps >= 0.5) throw usage_error("core_energy: need 0 < eps < 1/2");
    const double dr = 1.0 / m;
    std::vector<double> f(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) {
        const double r = k * dr;
        f[static_cast<std::size_t>(k)] = r / std::sqrt(r * r + 2.0 * eps * eps);
    }
    f[0] = 0.0;
    f[static_cast<std::size_t>(m)] = 1.0;

    // Damped Newton on the radial Euler-Lagrange system with a tridiagonal solve.
    std::vector<double> lower(static_cast<std::size_t>(m) - 1), diag(static_cast<std::size_t>(m) - 1),
        upper(static_cast<std::size_t>(m) - 1), rhs(static_cast<std::size_t>(m) - 1);
    for (int iter = 0; iter < 60; ++iter) {
        double res_norm = 0.0;
        for (int k = 1; k < m; ++k) {
            const double r = k * dr, rp = r + 0.5 * dr, rm = r - 0.5 * dr;
            const double fk = f[static_cast<std::size_t>(k)];
            const double fe = f[static_cast<std::size_t>(k) + 1], fw = f[static_cast<std::size_t>(k) - 1];
            const double lap = (rp * (fe - fk) - rm * (fk - fw)) / (r * dr * dr);
            const double res = -lap + fk / (r * r) + (fk * fk - 1.0) * fk / (eps * eps);
            rhs[static_cast<std::size_t>(k) - 1] = -res;
            res_norm = std::max(res_norm, std::abs(res));
            lower[static_cast<std::size_t>(k) - 1] = -rm / (r * dr * dr);
            upper[static_cast<std::size_t>(k) - 1] = -rp / (r * dr * dr);
            diag[static_cast<std::size_t>(k) - 1] =
                (rp + rm) / (r * dr * dr) + 1.0 / (r * r) + (3.0 * fk * fk - 1.0) / (eps * eps);
        }
        if (res_norm < 1e-11) break;
        // Thomas algorithm.
        for (int k = 1; k < m - 1; ++k) {
            const double w = lower[static_cast<std::size_t>(k)] / diag[static_cast<std::size_t>(k) - 1];
            diag[static_cast<std::size_t>(k)] -= w * upper[static_cast<std::size_t>(k) - 1];
            rhs[static_cast<std::size_t>(k)] -= w * rhs[static_cast<std::size_t>(k) - 1];
        }
        std::vector<double> delta(static_cast<std::size_t>(m) - 1);
        delta[static_cast<std::size_t>(m) - 2] =
            rhs[static_cast<std::size_t>(m) - 2] / diag[static_cast<std::size_t>(m) - 2];
        for (int k = m - 3; k >= 0; --k)
            delta[static_cast<std::size_t>(k)] =
                (rhs[static_cast<std::size_t>(k)] -
                 upper[static_cast<std::size_t>(k)] * delta[static_cast<std::size_t>(k) + 1]) /
                diag[static_cast<std::size_t>(k)];
        double step = 1.0;
        for (int k = 1; k < m; ++k)
            f[static_cast<std::size_t>(k)] += step * delta[static_cast<std::size_t>(k) - 1];
        for (int k = 1; k < m; ++k)
            f[static_cast<std::size_t>(k)] = std::clamp(f[static_cast<std::size_t>(k)], 0.0, 1.0);
    }

    // Midpoint-rule energy.
    double energy = 0.0;
    for (int k = 0; k < m; ++k) {
        const double r = (k + 0.5) * dr;
        const double fp = (f[static_cast<std::size_t>(k) + 1] - f[static_cast<std::size_t>(k)]) / dr;
        const double fm = 0.5 * (f[static_cast<std::size_t>(k) + 1] + f[static_cast<std::size_t>(k)]);
        energy += 2.0 * M_PI * r * dr *
                  (0.5 * (fp * fp + fm * fm / (r * r)) +
                   (fm * fm - 1.0) * (fm * fm - 1.0) / (4.0 * eps * eps));
    }
    CoreEnergy out;
    out.gamma = energy;
    out.profile = std::move(f);
    return out;
}

struct CoreEnergyLimit {
    double gamma_star = 0.0;
    std::vector<double> eps_values;
    std::vector<double> shifted;  // gamma(eps) - pi |log eps|
};

// gamma* = lim (gamma(eps) - pi |log eps|), extrapolated geometrically from
// eps in {0.1, 0.05, 0.025}.
inline CoreEnergyLimit core_energy_limit() {
    CoreEnergyLimit out;
    out.eps_values = {0.1, 0.05, 0.025};
    for (const double e : out.eps_values)
        out.shifted.push_back(core_energy(e).gamma - M_PI * std::abs(std::log(e)));
    const double d1 = out.shifted[1] - out.shifted[0];
    const double d2 = out.shifted[2] - out.shifted[1];
    if (std::abs(d1) > 1e-15 && std::abs(d2) < std::abs(d1)) {
        const double rho = d2 / d1;
        out.gamma_star = out.shifted[2] + d2 * rho / (1.0 - rho);
    } else {
        out.gamma_star = out.shifted[2];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Wall-corrected renormalised energy and its minimisation

struct WBetaValue {
    double w = 0.0;
    double connection_length = 0.0;
    double w_beta = 0.0;
    double spread = 0.0;
};

inline WBetaValue w_beta(const Domain& dom, const VortexConfig& cfg, const BoundaryDatum& datum,
                         double beta, int n) {
    WBetaValue out;
    const RenormalizedEnergy re = renormalized_energy(dom, cfg, datum, n);
    out.w = re.value;
    out.spread = re.spread;
    out.connection_length = conn::solve_min_connection(dom, cfg.points).total_length;
    out.w_beta = out.w + wall::transition_cost_closed_form(beta) * out.connection_length;
    return out;
}

struct WBetaScanRow {
    VortexConfig config;
    double w = 0.0;
    double connection_length = 0.0;
    double w_beta = 0.0;
};

struct MinimizeResult {
    VortexConfig best;
    WBetaValue value;
    std::vector<WBetaScanRow> ledger;
};

namespace detail {

// Nelder-Mead with feasibility projection: points are pushed inside the domain
// and separated before evaluation.
inline VortexConfig project_config(const Domain& dom, VortexConfig cfg, double margin) {
    for (Vec2& p : cfg.points) {
        if (dom.contains(p) != geom::Containment::Inside || dom.boundary_distance(p) < margin) {
            const auto proj = dom.boundary_projection(p);
            const Vec2 inward = proj.inward_normal;
            p = proj.foot + (1.5 * margin) * inward;
        }
    }
    for (std::size_t i = 0; i < cfg.points.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.points.size(); ++j) {
            const double d = geom::dist(cfg.points[i], cfg.points[j]);
            if (d < 2.0 * margin) {
                Vec2 dir = d > 1e-12 ? geom::normalized(cfg.points[j] - cfg.points[i])
                                     : Vec2{1.0, 0.0};
                cfg.points[j] = cfg.points[j] + (2.0 * margin - d) * dir;
            }
        }
    return cfg;
}

}  // namespace detail

// Multi-start simplex descent over the 4|d|-dimensional configuration space.
inline MinimizeResult minimize_w_beta(const Domain& dom, const BoundaryDatum& datum, double beta,
                                      int n, std::uint64_t seed = 1, int extra_starts = 4,
                                      int max_iter = 120) {
    const int d_abs = std::abs(datum.degree);
    if (d_abs < 1) throw usage_error("minimize_w_beta: need |degree| >= 1");
    const int npts = 2 * d_abs;
    const int dim = 2 * npts;
    const double h = std::max(dom.bbox_max().x - dom.bbox_min().x,
                              dom.bbox_max().y - dom.bbox_min().y) / n;
    const double margin = std::max(40.0 * h, 0.02 * dom.diameter());

    auto to_config = [&](const std::vector<double>& x) {
        VortexConfig cfg;
        cfg.degree_sign = datum.degree >= 0 ? 1 : -1;
        for (int k = 0; k < npts; ++k)
            cfg.points.push_back({x[static_cast<std::size_t>(2 * k)],
                                  x[static_cast<std::size_t>(2 * k + 1)]});
        return detail::project_config(dom, cfg, margin);
    };

    MinimizeResult result;
    double best_val = std::numeric_limits<double>::infinity();

    auto evaluate = [&](const std::vector<double>& x) {
        const VortexConfig cfg = to_config(x);
        double val;
        WBetaScanRow row;
        row.config = cfg;
        try {
            const WBetaValue wb = w_beta(dom, cfg, datum, beta, n);
            row.w = wb.w;
            row.connection_length = wb.connection_length;
            row.w_beta = wb.w_beta;
            val = wb.w_beta;
        } catch (const std::exception&) {
            val = 1e9;
            row.w_beta = val;
        }
        result.ledger.push_back(row);
        if (val < best_val) {
            best_val = val;
            result.best = cfg;
        }
        return val;
    };

    // Deterministic symmetric starts plus seeded random ones.
    std::vector<std::vector<double>> starts;
    const Vec2 c0 = 0.5 * (dom.bbox_min() + dom.bbox_max());
    const double r0 = 0.25 * dom.diameter();
    for (const double frac : {0.35, 0.6}) {
        for (const double ang : {0.0, M_PI / 4.0}) {
            std::vector<double> x;
            for (int k = 0; k < npts; ++k) {
                const double th = ang + M_PI * k + 0.3 * k;
                x.push_back(c0.x + frac * r0 * std::cos(th));
                x.push_back(c0.y + frac * r0 * std::sin(th));
            }
            starts.push_back(x);
        }
    }
    auto rng = rng::engine(seed, "w_beta_starts");
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int s = 0; s < extra_starts; ++s) {
        std::vector<double> x;
        for (int k = 0; k < dim; ++k)
            x.push_back((k % 2 == 0 ? c0.x : c0.y) + u(rng) * r0);
        starts.push_back(x);
    }

    for (const auto& x0 : starts) {
        // Standard Nelder-Mead.
        const double step = 0.2 * r0;
        std::vector<std::pair<double, std::vector<double>>> simplex;
        simplex.push_back({evaluate(x0), x0});
        for (int k = 0; k < dim; ++k) {
            std::vector<double> x = x0;
            x[static_cast<std::size_t>(k)] += step;
            simplex.push_back({evaluate(x), x});
        }
        for (int it = 0; it < max_iter; ++it) {
            std::sort(simplex.begin(), simplex.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (simplex.back().first - simplex.front().first < 1e-7) break;
            std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
            for (std::size_t s = 0; s + 1 < simplex.size(); ++s)
                for (int k = 0; k < dim; ++k)
                    centroid[static_cast<std::size_t>(k)] +=
                        simplex[s].second[static_cast<std::size_t>(k)] / dim;
            auto blend = [&](double t) {
                std::vector<double> x(static_cast<std::size_t>(dim));
                for (int k = 0; k < dim; ++k)
                    x[static_cast<std::size_t>(k)] =
                        centroid[static_cast<std::size_t>(k)] +
                        t * (centroid[static_cast<std::size_t>(k)] -
                             simplex.back().second[static_cast<std::size_t>(k)]);
                return x;
            };
            const auto xr = blend(1.0);
            const double fr = evaluate(xr);
            if (fr < simplex.front().first) {
                const auto xe = blend(2.0);
                const double fe = evaluate(xe);
                simplex.back() = fe < fr ? std::make_pair(fe, xe) : std::make_pair(fr, xr);
            } else if (fr < simplex[simplex.size() - 2].first) {
                simplex.back() = {fr, xr};
            } else {
                const auto xc = blend(-0.5);
                const double fc = evaluate(xc);
                if (fc < simplex.back().first) {
                    simplex.back() = {fc, xc};
                } else {
                    for (std::size_t s = 1; s < simplex.size(); ++s) {
                        for (int k = 0; k < dim; ++k)
                            simplex[s].second[static_cast<std::size_t>(k)] =
                                0.5 * (simplex[s].second[static_cast<std::size_t>(k)] +
                                       simplex[0].second[static_cast<std::size_t>(k)]);
                        simplex[s].first = evaluate(simplex[s].second);
                    }
                }
            }
        }
    }
    result.value = w_beta(dom, result.best, datum, beta, n);
    return result;
}

// ---------------------------------------------------------------------------
// Radial amplitude profile for competitor constructions: the disk minimiser of
// the scaled problem on [0, R] with boundary value 1.
inline std::vector<double> radial_profile(double eps, double radius, int m = 2000) {
    const CoreEnergy ce = core_energy(std::min(0.49, eps / radius), m);
    return ce.profile;  // sampled on r = k * radius / m after rescaling by caller
}

}  // namespace ferroconnect::renorm
