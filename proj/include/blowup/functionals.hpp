#ifndef BLOWUP_FUNCTIONALS_HPP
#define BLOWUP_FUNCTIONALS_HPP

// Energy-type functionals of similarity frames, the Lyapunov functional H and
// its monotonicity check, and the weighted norm used for soliton fitting.

#include <blowup/error.hpp>
#include <blowup/model.hpp>
#include <blowup/similarity.hpp>
#include <blowup/weighted_grid.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace blowup
{

struct FunctionalReadout {
    double s = 0.0;
    double E0 = 0.0;
    double I = 0.0;
    double J = 0.0;
    double E = 0.0;
    double H = 0.0;
    double dissipation = 0.0; ///< int ws^2 rho/(1-y^2)
    double cutoff = default_cutoff;
};

namespace detail
{

template <class Fn>
double integrate_pointwise(const WeightedQuadrature &quad, WeightKind kind, std::size_t n, Fn &&fn)
{
    const auto &w = quad.weights(kind);
    require(w.size() == n, ErrorCode::InvalidParameter, "frame does not match the quadrature grid");
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += w[j] * fn(j);
    return acc;
}

} // namespace detail

[[nodiscard]] inline double E0(const SimilarityFrame &f, const WeightedQuadrature &quad)
{
    const double p = quad.p();
    const double c = (p + 1.0) / ((p - 1.0) * (p - 1.0));
    const std::size_t n = f.size();
    const double bulk = detail::integrate_pointwise(quad, WeightKind::Rho, n, [&](std::size_t j) {
        const double w = f.w[j];
        return 0.5 * f.ws[j] * f.ws[j] + c * w * w - std::pow(std::abs(w), p + 1.0) / (p + 1.0);
    });
    const double grad = detail::integrate_pointwise(
        quad, WeightKind::RhoTimesOneMinusY2, n, [&](std::size_t j) { return 0.5 * f.wy[j] * f.wy[j]; });
    return bulk + grad;
}

[[nodiscard]] inline double E0(const SimilarityFrame &f, double p)
{
    return E0(f, WeightedQuadrature(*f.grid, p));
}

/// -e^{-2(p+1)s/(p-1)} int F(e^{2s/(p-1)} w) rho, evaluated through scaled_F.
[[nodiscard]] inline double I_term(const SimilarityFrame &f, double s, const EquationSpec &spec,
                                   const WeightedQuadrature &quad)
{
    if (spec.f_is_zero()) return 0.0;
    const double log_lam = 2.0 * s / (spec.p() - 1.0);
    return -detail::integrate_pointwise(quad, WeightKind::Rho, f.size(),
                                        [&](std::size_t j) { return spec.scaled_F(f.w[j], log_lam); });
}

[[nodiscard]] inline double I_term(const SimilarityFrame &f, double s, const EquationSpec &spec)
{
    return I_term(f, s, spec, WeightedQuadrature(*f.grid, spec.p()));
}

/// -e^{-gamma s} int w ws rho.
[[nodiscard]] inline double J_term(const SimilarityFrame &f, double s, const EquationSpec &spec,
                                   const WeightedQuadrature &quad)
{
    return -std::exp(-spec.gamma() * s)
           * detail::integrate_pointwise(quad, WeightKind::Rho, f.size(),
                                         [&](std::size_t j) { return f.w[j] * f.ws[j]; });
}

[[nodiscard]] inline double J_term(const SimilarityFrame &f, double s, const EquationSpec &spec)
{
    return J_term(f, s, spec, WeightedQuadrature(*f.grid, spec.p()));
}

/// exp(((p+3)/(2 gamma)) e^{-gamma s}), the multiplier of E inside H.
[[nodiscard]] inline double H_factor(double s, const EquationSpec &spec)
{
    const double g = spec.gamma();
    return std::exp((spec.p() + 3.0) / (2.0 * g) * std::exp(-g * s));
}

[[nodiscard]] inline FunctionalReadout H_total(const SimilarityFrame &f, double s,
                                               const EquationSpec &spec, double mu,
                                               const WeightedQuadrature &quad)
{
    require(mu >= 0.0, ErrorCode::InvalidParameter, "mu must be non-negative");
    FunctionalReadout r;
    r.s = s;
    r.E0 = E0(f, quad);
    r.I = I_term(f, s, spec, quad);
    r.J = J_term(f, s, spec, quad);
    r.E = r.E0 + r.I + r.J;
    r.H = r.E * H_factor(s, spec) + mu * std::exp(-2.0 * spec.gamma() * s);
    r.dissipation = detail::integrate_pointwise(quad, WeightKind::RhoOverOneMinusY2, f.size(),
                                                [&](std::size_t j) { return f.ws[j] * f.ws[j]; });
    r.cutoff = quad.cutoff();
    return r;
}

[[nodiscard]] inline FunctionalReadout H_total(const SimilarityFrame &f, double s,
                                               const EquationSpec &spec, double mu)
{
    return H_total(f, s, spec, mu, WeightedQuadrature(*f.grid, spec.p()));
}

/// Readouts of every frame at its own s.
[[nodiscard]] inline std::vector<FunctionalReadout> readouts(const WTrajectory &traj, double mu)
{
    std::vector<FunctionalReadout> out;
    if (traj.frames.empty()) return out;
    const WeightedQuadrature quad(*traj.grid, traj.spec.p());
    out.reserve(traj.size());
    for (const auto &f : traj.frames) out.push_back(H_total(f, f.s, traj.spec, mu, quad));
    return out;
}

struct MonotonicityReport {
    std::vector<double> s_values;
    std::vector<double> H_values;
    std::vector<std::pair<double, double>> violations; ///< (s, H increase) beyond tolerance
    double max_violation = 0.0;  ///< largest increase of H between consecutive frames (0 if none)
    double tolerance = 0.0;      ///< rel_tol * max|H|
    double C_fit = 0.0;          ///< smallest C making the raw dE/ds inequality hold
    double mu = 0.0;
    bool mu_calibrated = false;
    std::vector<FunctionalReadout> readouts;
};

struct MonotonicityOptions {
    double rel_tol = 1e-3;
    double mu_margin = 1e-6;
};

/// Fitted constant of dE/ds <= ((p+3)/2) e^{-gamma s} E - (3/(p-1)) diss + C e^{-2 gamma s},
/// with dE/ds from consecutive frames and the other terms averaged over each interval.
[[nodiscard]] inline double fit_energy_constant(const std::vector<FunctionalReadout> &r,
                                                const EquationSpec &spec)
{
    const double p = spec.p(), g = spec.gamma();
    double C = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < r.size(); ++k) {
        const double ds = r[k].s - r[k - 1].s;
        const double dE = (r[k].E - r[k - 1].E) / ds;
        const double growth = 0.5 * (std::exp(-g * r[k].s) * r[k].E + std::exp(-g * r[k - 1].s) * r[k - 1].E);
        const double diss = 0.5 * (r[k].dissipation + r[k - 1].dissipation);
        const double decay = 0.5 * (std::exp(-2.0 * g * r[k].s) + std::exp(-2.0 * g * r[k - 1].s));
        C = std::max(C, (dE - 0.5 * (p + 3.0) * growth + 3.0 / (p - 1.0) * diss) / decay);
    }
    return std::isfinite(C) ? C : 0.0;
}

/// mu large enough that the fitted inequality forces H to decrease:
/// mu >= max(C_fit, 0) * max_s exp(((p+3)/(2 gamma)) e^{-gamma s}) / (2 gamma).
[[nodiscard]] inline double calibrate_mu(double C_fit, double s_min, const EquationSpec &spec,
                                         double margin = 1e-6)
{
    return std::max(C_fit, 0.0) * H_factor(s_min, spec) / (2.0 * spec.gamma()) + margin;
}

[[nodiscard]] inline MonotonicityReport monotonicity_report(const WTrajectory &traj,
                                                            std::optional<double> mu = std::nullopt,
                                                            const MonotonicityOptions &opt = {})
{
    MonotonicityReport rep;
    if (traj.frames.empty()) return rep;
    const auto &spec = traj.spec;
    auto base = readouts(traj, 0.0);
    rep.C_fit = fit_energy_constant(base, spec);
    if (mu) {
        rep.mu = *mu;
    } else {
        rep.mu = calibrate_mu(rep.C_fit, base.front().s, spec, opt.mu_margin);
        rep.mu_calibrated = true;
    }
    double hmax = 0.0;
    for (auto &r : base) {
        r.H += rep.mu * std::exp(-2.0 * spec.gamma() * r.s);
        rep.s_values.push_back(r.s);
        rep.H_values.push_back(r.H);
        hmax = std::max(hmax, std::abs(r.H));
    }
    rep.tolerance = opt.rel_tol * hmax;
    for (std::size_t k = 1; k < base.size(); ++k) {
        const double inc = base[k].H - base[k - 1].H;
        rep.max_violation = std::max(rep.max_violation, inc);
        if (inc > rep.tolerance) rep.violations.emplace_back(base[k].s, inc);
    }
    rep.readouts = std::move(base);
    return rep;
}

enum class Criterion { Consistent, ViolatesCriterion };

inline std::string to_string(Criterion c)
{
    return c == Criterion::Consistent ? "Consistent" : "ViolatesCriterion";
}

/// A defined solution must keep H >= 0; a clearly negative H is flagged.
[[nodiscard]] inline Criterion blowup_criterion(const FunctionalReadout &r, double tol = 1e-3)
{
    return r.H < -tol ? Criterion::ViolatesCriterion : Criterion::Consistent;
}

/// Squared weighted norm int (q1^2 + q1'^2 (1-y^2) + q2^2) rho.
[[nodiscard]] inline double hnorm_sq(const std::vector<double> &q1, const std::vector<double> &q1y,
                                     const std::vector<double> &q2, const WeightedQuadrature &quad)
{
    const std::size_t n = q1.size();
    require(q1y.size() == n && q2.size() == n, ErrorCode::InvalidParameter, "size mismatch");
    const double a = detail::integrate_pointwise(quad, WeightKind::Rho, n, [&](std::size_t j) {
        return q1[j] * q1[j] + q2[j] * q2[j];
    });
    const double b = detail::integrate_pointwise(quad, WeightKind::RhoTimesOneMinusY2, n,
                                                 [&](std::size_t j) { return q1y[j] * q1y[j]; });
    return a + b;
}

[[nodiscard]] inline double hnorm(const SimilarityFrame &f, const WeightedQuadrature &quad)
{
    return std::sqrt(hnorm_sq(f.w, f.wy, f.ws, quad));
}

[[nodiscard]] inline double hnorm(const SimilarityFrame &f, double p)
{
    return hnorm(f, WeightedQuadrature(*f.grid, p));
}

struct HardySobolevRatio {
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
    double numerator = 0.0;
    double denominator = 0.0;
};

/// int h^2 rho/(1-y^2) over int h^2 rho + int h'^2 rho (1-y^2).
[[nodiscard]] inline HardySobolevRatio check_hardy_sobolev(const std::vector<double> &h,
                                                           const std::vector<double> &h_prime,
                                                           const WeightedQuadrature &quad)
{
    const std::size_t n = h.size();
    require(h_prime.size() == n, ErrorCode::InvalidParameter, "size mismatch");
    HardySobolevRatio r;
    r.numerator = detail::integrate_pointwise(quad, WeightKind::RhoOverOneMinusY2, n,
                                              [&](std::size_t j) { return h[j] * h[j]; });
    r.denominator = detail::integrate_pointwise(quad, WeightKind::Rho, n,
                                                [&](std::size_t j) { return h[j] * h[j]; })
                    + detail::integrate_pointwise(quad, WeightKind::RhoTimesOneMinusY2, n,
                                                  [&](std::size_t j) { return h_prime[j] * h_prime[j]; });
    if (r.denominator >= 1e-14) {
        r.ratio = r.numerator / r.denominator;
        r.defined = true;
    }
    return r;
}

[[nodiscard]] inline HardySobolevRatio check_hardy_sobolev(const std::vector<double> &h,
                                                           const std::vector<double> &h_prime,
                                                           const YGrid &grid, double p)
{
    return check_hardy_sobolev(h, h_prime, WeightedQuadrature(grid, p));
}

} // namespace blowup

#endif
