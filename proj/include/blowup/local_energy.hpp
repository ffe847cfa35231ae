#ifndef BLOWUP_LOCAL_ENERGY_HPP
#define BLOWUP_LOCAL_ENERGY_HPP

// Energy of a radial state on the shrinking ball |x| < 1 - t for the
// lambda-rescaled equation, and a fitted-constant check of the bound
//
//   Ebar(t) <= C [ Ebar(0) + int_0^t int_{|x|=1-s} |U|^{p+1}
//                  + lambda int_0^t int_{|x|<1-s} |U|^{p+1} + lambda^{2/(p-1)} ].

#include <blowup/error.hpp>
#include <blowup/model.hpp>
#include <blowup/radial_solver.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace blowup
{

/// Area of the unit sphere in R^N (2 for N = 1: the two endpoints).
[[nodiscard]] inline double sphere_area(int N)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

namespace detail
{

// Integral over [a, b] of the piecewise-linear interpolant of e(r) m(r) where
// m is the radial measure; the integrand is sampled at grid nodes.
inline double interval_integral(const RadialGrid &g, const std::vector<double> &e, double a, double b)
{
    auto value_at = [&](double r) {
        const double x = (r - g.r_min) / g.dr;
        auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(g.n_points - 2)));
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * e[i] + w * e[i + 1];
    };
    double acc = 0.0;
    double left = a;
    double fl = value_at(a);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        const double r = g.r(i);
        if (r <= a) continue;
        if (r >= b) break;
        acc += 0.5 * (fl + e[i]) * (r - left);
        left = r;
        fl = e[i];
    }
    acc += 0.5 * (fl + value_at(b)) * (b - left);
    return acc;
}

inline void check_coverage(const RadialGrid &g, int N, double radius)
{
    const double slack = 1e-12;
    if (g.r_max < radius - slack) {
        fail(ErrorCode::DomainCoverage, "grid ends at r_max=" + std::to_string(g.r_max)
                                            + " inside the ball of radius " + std::to_string(radius));
    }
    if (N == 1 && g.r_min > -radius + slack) {
        fail(ErrorCode::DomainCoverage, "grid starts at r_min=" + std::to_string(g.r_min)
                                            + " inside the interval |x| < " + std::to_string(radius));
    }
    if (N >= 2 && g.r_min > 0.1 * radius) {
        fail(ErrorCode::DomainCoverage, "r_min=" + std::to_string(g.r_min)
                                            + " leaves too much of the ball uncovered");
    }
}

// Samples multiplied by the radial measure (omega r^{N-1}; 1 for N = 1).
inline std::vector<double> with_measure(const RadialGrid &g, int N, std::vector<double> e)
{
    if (N >= 2) {
        const double om = sphere_area(N);
        for (std::size_t i = 0; i < e.size(); ++i) e[i] *= om * std::pow(g.r(i), N - 1.0);
    }
    return e;
}

inline double ball_integral(const RadialGrid &g, int N, const std::vector<double> &e, double radius)
{
    check_coverage(g, N, radius);
    const auto em = with_measure(g, N, e);
    return N == 1 ? interval_integral(g, em, -radius, radius)
                  : interval_integral(g, em, std::max(g.r_min, 0.0), radius);
}

inline double point_value(const RadialGrid &g, const std::vector<double> &e, double r)
{
    const double x = (r - g.r_min) / g.dr;
    auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(g.n_points - 2)));
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * e[i] + w * e[i + 1];
}

} // namespace detail

/// Energy density of the state on the grid nodes.
[[nodiscard]] inline std::vector<double> energy_density(const RadialGrid &g, const std::vector<double> &u,
                                                        const std::vector<double> &ut, double lambda,
                                                        const EquationSpec &spec)
{
    const std::size_t n = g.n_points;
    const double p = spec.p();
    const double scale = spec.nonlinearity_scale();
    const double log_up = -2.0 / (p - 1.0) * std::log(lambda);
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ur;
        if (i == 0) ur = (u[1] - u[0]) / g.dr;
        else if (i + 1 == n) ur = (u[n - 1] - u[n - 2]) / g.dr;
        else ur = (u[i + 1] - u[i - 1]) / (2.0 * g.dr);
        const double a = std::abs(u[i]);
        // lambda^{(2p+2)/(p-1)} F(lambda^{-2/(p-1)} U) = scaled_F(U, log lambda^{-2/(p-1)}).
        e[i] = 0.5 * ut[i] * ut[i] + 0.5 * ur * ur - scale * std::pow(a, p + 1.0) / (p + 1.0)
               - spec.scaled_F(u[i], log_up);
    }
    return e;
}

/// Energy on {|x| < 1 - t} of the state (u, ut).
[[nodiscard]] inline double E_bar(const RadialGrid &g, int N, const std::vector<double> &u,
                                  const std::vector<double> &ut, double t, double lambda,
                                  const EquationSpec &spec)
{
    require(t >= 0.0 && t < 1.0, ErrorCode::InvalidParameter, "t must lie in [0,1)");
    require(lambda > 0.0 && lambda <= 1.0, ErrorCode::InvalidParameter, "lambda must lie in (0,1]");
    return detail::ball_integral(g, N, energy_density(g, u, ut, lambda, spec), 1.0 - t);
}

[[nodiscard]] inline double E_bar(const RadialTrajectory &traj, std::size_t index, double lambda,
                                  const EquationSpec &spec)
{
    require(index < traj.size(), ErrorCode::InvalidParameter, "state index out of range");
    return E_bar(traj.grid, traj.N, traj.u[index], traj.ut[index], traj.times[index], lambda, spec);
}

struct LocalEnergyReadout {
    double t = 0.0;
    double E_bar = 0.0;
    double boundary_flux_integral = 0.0; ///< cumulative int_0^t int_{|x|=1-s} |U|^{p+1}
    double interior_integral = 0.0;      ///< cumulative lambda int_0^t int_{|x|<1-s} |U|^{p+1}
    double lambda = 1.0;
};

struct EnergyLemmaReport {
    std::vector<LocalEnergyReadout> readouts;
    double C_fit = 0.0;
    double additive = 0.0; ///< lambda^{2/(p-1)}
    std::vector<double> violations; ///< times where no finite C works (right side <= 0 < left side)
    double max_excess_after_fit = 0.0;
};

/// Evaluates both sides on every stored time t < t_max (< 1) and fits the
/// smallest common constant C. `spec` is the original (unscaled) equation.
[[nodiscard]] inline EnergyLemmaReport verify_energy_lemma(const RadialTrajectory &traj, double lambda,
                                                           const EquationSpec &spec, double t_max = 0.9)
{
    require(lambda > 0.0 && lambda <= 1.0, ErrorCode::InvalidParameter, "lambda must lie in (0,1]");
    require(t_max > 0.0 && t_max < 1.0, ErrorCode::InvalidParameter, "t_max must lie in (0,1)");
    const int N = traj.N;
    const double p = traj.p;
    const auto &g = traj.grid;
    EnergyLemmaReport rep;
    rep.additive = std::pow(lambda, 2.0 / (p - 1.0));
    double B = 0.0, I = 0.0;
    double prev_t = 0.0, prev_b = 0.0, prev_i = 0.0;
    bool first = true;
    for (std::size_t m = 0; m < traj.size(); ++m) {
        const double t = traj.times[m];
        if (t > t_max) break;
        const double radius = 1.0 - t;
        std::vector<double> pw(g.n_points);
        for (std::size_t i = 0; i < g.n_points; ++i) pw[i] = std::pow(std::abs(traj.u[m][i]), p + 1.0);
        double bnd;
        if (N == 1) {
            bnd = detail::point_value(g, pw, -radius) + detail::point_value(g, pw, radius);
        } else {
            bnd = sphere_area(N) * std::pow(radius, N - 1.0) * detail::point_value(g, pw, radius);
        }
        const double inner = lambda * detail::ball_integral(g, N, pw, radius);
        if (!first) {
            B += 0.5 * (bnd + prev_b) * (t - prev_t);
            I += 0.5 * (inner + prev_i) * (t - prev_t);
        }
        first = false;
        prev_t = t;
        prev_b = bnd;
        prev_i = inner;
        LocalEnergyReadout r;
        r.t = t;
        r.E_bar = E_bar(g, N, traj.u[m], traj.ut[m], t, lambda, spec);
        r.boundary_flux_integral = B;
        r.interior_integral = I;
        r.lambda = lambda;
        rep.readouts.push_back(r);
    }
    require(!rep.readouts.empty(), ErrorCode::PreconditionFailed, "no states with t <= t_max");
    const double E0v = rep.readouts.front().E_bar;
    double C = 0.0;
    for (const auto &r : rep.readouts) {
        const double rhs = E0v + r.boundary_flux_integral + r.interior_integral + rep.additive;
        if (rhs > 0.0) {
            C = std::max(C, r.E_bar / rhs);
        } else if (r.E_bar > 0.0) {
            rep.violations.push_back(r.t);
        }
    }
    rep.C_fit = C;
    for (const auto &r : rep.readouts) {
        const double rhs = E0v + r.boundary_flux_integral + r.interior_integral + rep.additive;
        rep.max_excess_after_fit = std::max(rep.max_excess_after_fit, r.E_bar - C * rhs);
    }
    return rep;
}

} // namespace blowup

#endif
