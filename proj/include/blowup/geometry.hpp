#ifndef BLOWUP_GEOMETRY_HPP
#define BLOWUP_GEOMETRY_HPP

// Classification of blow-up points, corner-shape fits of the blow-up graph
// near a characteristic point, and blow-up rate checks in the backward cone.

#include <blowup/error.hpp>
#include <blowup/radial_solver.hpp>
#include <blowup/solitons.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace blowup
{

enum class PointType { NonCharacteristic, CharacteristicCandidate, Unknown };

inline std::string to_string(PointType t)
{
    switch (t) {
    case PointType::NonCharacteristic: return "NonCharacteristic";
    case PointType::CharacteristicCandidate: return "CharacteristicCandidate";
    case PointType::Unknown: return "Unknown";
    }
    return "Unknown";
}

struct ClassifyOptions {
    double tail_fraction = 1.0 / 3.0; ///< portion of the series treated as its tail
    std::size_t min_tail = 3;
};

/// Energy-level classification of E0(w_r(s)) along increasing s. A tail that
/// varies by more than `tolerance` is Unknown; otherwise its mean is compared
/// with the two-soliton level 2 E0(kappa0) - tolerance.
[[nodiscard]] inline PointType classify_point(const std::vector<double> &E0_series, double p,
                                              std::optional<double> tolerance = std::nullopt,
                                              const ClassifyOptions &opt = {})
{
    const double level = soliton_energy(p);
    const double tol = tolerance.value_or(0.15 * level);
    const std::size_t n = E0_series.size();
    if (n < opt.min_tail) return PointType::Unknown;
    const auto tail = std::max<std::size_t>(opt.min_tail, static_cast<std::size_t>(std::ceil(opt.tail_fraction * n)));
    const auto first = E0_series.end() - static_cast<std::ptrdiff_t>(std::min(tail, n));
    const auto [lo, hi] = std::minmax_element(first, E0_series.end());
    if (!std::all_of(first, E0_series.end(), [](double e) { return std::isfinite(e); })) {
        return PointType::Unknown;
    }
    if (*hi - *lo > tol) return PointType::Unknown;
    const double mean = std::accumulate(first, E0_series.end(), 0.0) / static_cast<double>(E0_series.end() - first);
    return mean < 2.0 * level - tol ? PointType::NonCharacteristic : PointType::CharacteristicCandidate;
}

namespace detail
{

// Linear interpolation of the finite samples of a graph at r.
inline double graph_value(const BlowupGraph &g, double r)
{
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::isfinite(g.T_estimates[i]) && g.r_samples[i] == r) return g.T_estimates[i];
    }
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double a = g.r_samples[i], b = g.r_samples[i + 1];
        if ((a - r) * (b - r) <= 0.0 && std::isfinite(g.T_estimates[i]) && std::isfinite(g.T_estimates[i + 1])) {
            const double w = (r - a) / (b - a);
            return (1.0 - w) * g.T_estimates[i] + w * g.T_estimates[i + 1];
        }
    }
    fail(ErrorCode::InsufficientRange, "graph has no finite samples around r0");
}

} // namespace detail

struct ConeTestOptions {
    double window = std::numeric_limits<double>::infinity(); ///< only samples with |r - r0| <= window
    double fit_tolerance = 0.0;
    std::optional<double> T_r0; ///< defaults to the interpolated graph value
};

/// True iff T(r) >= T(r0) - delta0 |r - r0| - tolerance on every finite sample of the window.
[[nodiscard]] inline bool cone_test(const BlowupGraph &g, double r0, double delta0,
                                    const ConeTestOptions &opt = {})
{
    require(delta0 > 0.0 && delta0 < 1.0, ErrorCode::InvalidParameter, "delta0 must lie in (0,1)");
    const double T0 = opt.T_r0 ? *opt.T_r0 : detail::graph_value(g, r0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = std::abs(g.r_samples[i] - r0);
        if (x > opt.window || !std::isfinite(g.T_estimates[i])) continue;
        if (g.T_estimates[i] < T0 - delta0 * x - opt.fit_tolerance) return false;
    }
    return true;
}

enum class Side { Left, Right };

inline std::string to_string(Side s) { return s == Side::Left ? "left" : "right"; }

struct CornerFit {
    double r0 = 0.0;
    int k_assumed = 2;
    Side side = Side::Right;
    double amplitude = 0.0;     ///< exp(intercept)
    double exponent_fit = 0.0;  ///< minus the regression slope
    double exponent_theory = 0.0;
    std::pair<double, double> r_window{0.0, 0.0};
    double decades = 0.0;
    std::size_t points = 0;
    double r_squared = 0.0;
    bool degenerate = false; ///< no corner: T(r) - T(r0) + |r-r0| stays close to |r-r0|
};

struct CornerFitOptions {
    double max_distance = 0.5; ///< |r - r0| must stay below this (and below 1)
    double min_decades = 1.0;
    std::size_t min_points = 5;
    std::optional<double> T_r0;
};

[[nodiscard]] inline double corner_exponent_theory(int k, double p)
{
    return (k - 1.0) * (p - 1.0) / 2.0;
}

/// Regression of log[(T(r) - T(r0) + |r-r0|)/|r-r0|] on log|log|r-r0|| over one side.
[[nodiscard]] inline CornerFit corner_fit(const BlowupGraph &g, double r0, double p, int k, Side side,
                                          const CornerFitOptions &opt = {})
{
    require(k >= 1, ErrorCode::InvalidParameter, "k must be positive");
    const double T0 = opt.T_r0 ? *opt.T_r0 : detail::graph_value(g, r0);
    const double xmax = std::min(opt.max_distance, 1.0 - 1e-12);
    std::vector<double> X, Y, dist;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double dr = g.r_samples[i] - r0;
        if ((side == Side::Right && !(dr > 0.0)) || (side == Side::Left && !(dr < 0.0))) continue;
        const double x = std::abs(dr);
        if (x >= xmax || !std::isfinite(g.T_estimates[i])) continue;
        const double num = g.T_estimates[i] - T0 + x;
        if (!(num > 0.0)) continue;
        X.push_back(std::log(std::abs(std::log(x))));
        Y.push_back(std::log(num / x));
        dist.push_back(x);
        min_ratio = std::min(min_ratio, num / x);
    }
    if (X.size() < opt.min_points) {
        fail(ErrorCode::InsufficientRange, "too few usable samples on the " + to_string(side) + " side");
    }
    const auto [dmin, dmax] = std::minmax_element(dist.begin(), dist.end());
    const double decades = std::log10(*dmax / *dmin);
    if (decades < opt.min_decades) {
        fail(ErrorCode::InsufficientRange, "samples span only " + std::to_string(decades) + " decades");
    }
    const double n = static_cast<double>(X.size());
    const double mx = std::accumulate(X.begin(), X.end(), 0.0) / n;
    const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    require(sxx > 0.0, ErrorCode::InsufficientRange, "degenerate regression abscissae");
    const double slope = sxy / sxx;
    CornerFit fit;
    fit.r0 = r0;
    fit.k_assumed = k;
    fit.side = side;
    fit.exponent_fit = -slope;
    fit.exponent_theory = corner_exponent_theory(k, p);
    fit.amplitude = std::exp(my - slope * mx);
    fit.r_window = {*dmin, *dmax};
    fit.decades = decades;
    fit.points = X.size();
    fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.degenerate = std::abs(slope) < 1e-2 && min_ratio > 0.5;
    return fit;
}

/// Largest relative mismatch, over the fit window, between the centred numerical
/// derivative of T(r) + theta (theta = sign(r - r0)) and the derivative of the fitted
/// corner form A |r-r0| / |log|r-r0||^e, i.e. A (|log x|^{-e} + e |log x|^{-e-1}).
[[nodiscard]] inline double corner_slope_consistency(const BlowupGraph &g, double r0, const CornerFit &fit)
{
    const double th = fit.side == Side::Right ? 1.0 : -1.0;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double x = std::abs(g.r_samples[i] - r0);
        if ((g.r_samples[i] - r0) * th <= 0.0) continue;
        if (x < fit.r_window.first || x > fit.r_window.second) continue;
        if ((g.r_samples[i - 1] - r0) * th <= 0.0 || (g.r_samples[i + 1] - r0) * th <= 0.0) continue;
        const double dT = (g.T_estimates[i + 1] - g.T_estimates[i - 1]) / (g.r_samples[i + 1] - g.r_samples[i - 1]);
        if (!std::isfinite(dT)) continue;
        const double L = std::abs(std::log(x));
        const double e = fit.exponent_fit;
        const double model = fit.amplitude * (std::pow(L, -e) + e * std::pow(L, -e - 1.0));
        // T' + theta on the right, -(T' + theta) on the left.
        const double measured = th * (dT + th);
        worst = std::max(worst, std::abs(measured - model) / std::abs(model));
    }
    return worst;
}

struct SpeedCheck {
    std::vector<double> t_values;
    std::vector<double> sup_u;
    std::vector<double> lower_ratio; ///< sup|u| / (|log(T-t)|^{(k-1)/2} (T-t)^{-2/(p-1)})
    std::vector<double> upper_ratio; ///< its reciprocal
    double C4_fit = std::numeric_limits<double>::quiet_NaN();
    double band_width = std::numeric_limits<double>::quiet_NaN(); ///< (max - min)/mean of the ratio on the window
    double limit_ratio = std::numeric_limits<double>::quiet_NaN(); ///< ratio at the last sample
    bool consistent_with_blowup = false;
};

struct SpeedOptions {
    double window = 0.1; ///< use samples with T - t <= window * T
    double min_gap = 0.0; ///< ignore samples with T - t below this
};

namespace detail
{

inline SpeedCheck finish_speed(SpeedCheck sc)
{
    if (sc.lower_ratio.empty()) return sc;
    const auto [lo, hi] = std::minmax_element(sc.lower_ratio.begin(), sc.lower_ratio.end());
    const double mean = std::accumulate(sc.lower_ratio.begin(), sc.lower_ratio.end(), 0.0)
                        / static_cast<double>(sc.lower_ratio.size());
    sc.consistent_with_blowup = *lo > 0.0;
    sc.limit_ratio = sc.lower_ratio.back();
    if (sc.consistent_with_blowup) {
        sc.C4_fit = std::max(*hi, 1.0 / *lo);
        sc.band_width = (*hi - *lo) / mean;
    }
    return sc;
}

inline void speed_push(SpeedCheck &sc, double t, double sup, double gap, double p, int k)
{
    const double form = std::pow(std::abs(std::log(gap)), 0.5 * (k - 1.0)) * std::pow(gap, -2.0 / (p - 1.0));
    const double ratio = sup / form;
    sc.t_values.push_back(t);
    sc.sup_u.push_back(sup);
    sc.lower_ratio.push_back(ratio);
    sc.upper_ratio.push_back(ratio > 0.0 ? 1.0 / ratio : std::numeric_limits<double>::infinity());
}

} // namespace detail

/// sup of |u| over the backward cone |r - r0| < T_r0 - t, against the rate
/// |log(T-t)|^{(k-1)/2} / (T-t)^{2/(p-1)}.
[[nodiscard]] inline SpeedCheck speed_bound_check(const RadialTrajectory &traj, double r0, double T_r0,
                                                  double p, int k, const SpeedOptions &opt = {})
{
    require(k >= 1, ErrorCode::InvalidParameter, "k must be positive");
    SpeedCheck sc;
    const auto &g = traj.grid;
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < g.n_points; ++i) {
        if (std::abs(g.r(i) - r0) < std::abs(g.r(nearest) - r0)) nearest = i;
    }
    for (std::size_t m = 0; m < traj.size(); ++m) {
        const double t = traj.times[m];
        const double gap = T_r0 - t;
        if (!(gap > opt.min_gap) || gap > opt.window * T_r0) continue;
        double sup = std::abs(traj.u[m][nearest]);
        for (std::size_t i = 0; i < g.n_points; ++i) {
            if (std::abs(g.r(i) - r0) < gap) sup = std::max(sup, std::abs(traj.u[m][i]));
        }
        detail::speed_push(sc, t, sup, gap, p, k);
    }
    return detail::finish_speed(std::move(sc));
}

/// Same check on a field given as a function of (r, t), sampled at times t_values
/// on points r_points (synthetic data).
template <class Field>
[[nodiscard]] SpeedCheck speed_bound_check(const Field &u, const std::vector<double> &r_points,
                                           const std::vector<double> &t_values, double r0, double T_r0,
                                           double p, int k)
{
    SpeedCheck sc;
    for (const double t : t_values) {
        const double gap = T_r0 - t;
        if (!(gap > 0.0)) continue;
        double sup = std::abs(u(r0, t));
        for (const double r : r_points) {
            if (std::abs(r - r0) < gap) sup = std::max(sup, std::abs(u(r, t)));
        }
        detail::speed_push(sc, t, sup, gap, p, k);
    }
    return detail::finish_speed(std::move(sc));
}

struct SignHint {
    bool non_characteristic_by_sign = false;
    bool suppressed = false; ///< sign condition held but the run did not blow up
    int sign = 0;            ///< +1 or -1 when the sign was constant
    std::string reason;
};

/// Constant sign of u on [r_lo, r_hi] for all stored t >= t0 implies the interior
/// points are non-characteristic. The hint is withheld for runs that did not blow up.
[[nodiscard]] inline SignHint sign_rule(const RadialTrajectory &traj, double r_lo, double r_hi, double t0,
                                        double tol = 1e-12)
{
    SignHint h;
    bool nonneg = true, nonpos = true;
    for (std::size_t m = 0; m < traj.size(); ++m) {
        if (traj.times[m] < t0) continue;
        for (std::size_t i = 0; i < traj.grid.n_points; ++i) {
            const double r = traj.grid.r(i);
            if (r < r_lo || r > r_hi) continue;
            nonneg = nonneg && traj.u[m][i] >= -tol;
            nonpos = nonpos && traj.u[m][i] <= tol;
        }
    }
    if (!nonneg && !nonpos) {
        h.reason = "u changes sign in the region";
        return h;
    }
    h.sign = nonneg ? 1 : -1;
    if (traj.status != RunStatus::BlowupDetected) {
        h.suppressed = true;
        h.reason = "constant sign but no blow-up was detected";
        return h;
    }
    h.non_characteristic_by_sign = true;
    h.reason = nonneg ? "u >= 0 throughout" : "u <= 0 throughout";
    return h;
}

/// True when a sign hint and an energy classification disagree on the same point.
[[nodiscard]] inline bool classification_conflict(const SignHint &hint, PointType type)
{
    return hint.non_characteristic_by_sign && type == PointType::CharacteristicCandidate;
}

} // namespace blowup

#endif
