#ifndef BLOWUP_SIMILARITY_HPP
#define BLOWUP_SIMILARITY_HPP

// Similarity variables around a point (r0, T0):
//
//   w(y,s) = (T0-t)^{2/(p-1)} u(r,t),   r = r0 + y e^{-s},   s = -log(T0-t),
//
// both as a post-processing transform of radial runs and as a direct
// integrator for the equation satisfied by w.

#include <blowup/error.hpp>
#include <blowup/model.hpp>
#include <blowup/radial_solver.hpp>
#include <blowup/weighted_grid.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace blowup
{

struct SimilarityFrame {
    double r0 = 0.0;
    double T0 = 0.0;
    double s = 0.0;
    std::shared_ptr<const YGrid> grid;
    std::vector<double> w;
    std::vector<double> ws;
    std::vector<double> wy;

    [[nodiscard]] const std::vector<double> &y() const { return grid->y; }
    [[nodiscard]] std::size_t size() const noexcept { return w.size(); }
};

struct WTrajectory {
    EquationSpec spec;
    double r0 = 0.0;
    double T0 = 0.0;
    std::shared_ptr<const YGrid> grid;
    std::vector<SimilarityFrame> frames;
    double T0_fit_quality = std::numeric_limits<double>::quiet_NaN(); ///< R^2 when T0 was fitted
    double s_window_start = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] std::size_t size() const noexcept { return frames.size(); }
};

/// Frame built directly from samples (synthetic data, tests).
[[nodiscard]] inline SimilarityFrame make_frame(std::shared_ptr<const YGrid> grid,
                                                std::vector<double> w, std::vector<double> ws,
                                                double s = 0.0)
{
    require(grid != nullptr, ErrorCode::InvalidGrid, "frame needs a grid");
    require(w.size() == grid->size() && ws.size() == grid->size(), ErrorCode::InvalidParameter,
            "frame samples do not match the grid");
    SimilarityFrame f;
    f.grid = std::move(grid);
    f.s = s;
    f.wy = derivative(w, f.grid->y);
    f.w = std::move(w);
    f.ws = std::move(ws);
    return f;
}

namespace detail
{

// Four-point Lagrange weights (value and derivative) at x for nodes xs.
inline void lagrange4(const std::array<double, 4> &xs, double x, std::array<double, 4> &val,
                      std::array<double, 4> &der)
{
    for (int i = 0; i < 4; ++i) {
        double denom = 1.0, num = 1.0, dnum = 0.0;
        for (int j = 0; j < 4; ++j) {
            if (j == i) continue;
            denom *= xs[i] - xs[j];
            num *= x - xs[j];
        }
        for (int m = 0; m < 4; ++m) {
            if (m == i) continue;
            double prod = 1.0;
            for (int j = 0; j < 4; ++j) {
                if (j == i || j == m) continue;
                prod *= x - xs[j];
            }
            dnum += prod;
        }
        val[i] = num / denom;
        der[i] = dnum / denom;
    }
}

inline std::size_t stencil_start(std::size_t below, std::size_t count)
{
    if (count < 4) return 0;
    const std::size_t k = below == 0 ? 0 : below - 1;
    return std::min(k, count - 4);
}

struct PointSample {
    double u, ur, ut;
};

// Cubic in r (value and derivative) at each of four time levels, then cubic in t.
inline PointSample sample_trajectory(const RadialTrajectory &traj, double r, double t)
{
    const auto &g = traj.grid;
    const std::size_t n = g.n_points;
    const double xr = (r - g.r_min) / g.dr;
    const auto ir = static_cast<std::size_t>(std::clamp(std::floor(xr), 0.0, static_cast<double>(n - 1)));
    const std::size_t kr = stencil_start(ir, n);
    std::array<double, 4> rx{}, rv{}, rd{};
    for (int i = 0; i < 4; ++i) rx[i] = static_cast<double>(kr + i);
    lagrange4(rx, xr, rv, rd);

    const auto &ts = traj.times;
    const std::size_t m = ts.size();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t below = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    const std::size_t kt = stencil_start(below, m);
    const std::size_t nt = std::min<std::size_t>(4, m);
    std::array<double, 4> tx{}, tv{}, td{};
    if (nt == 4) {
        for (int i = 0; i < 4; ++i) tx[i] = ts[kt + i];
        lagrange4(tx, t, tv, td);
    } else {
        tv = {1.0, 0.0, 0.0, 0.0};
    }

    PointSample out{0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < nt; ++a) {
        const auto &u = traj.u[kt + a];
        const auto &ut = traj.ut[kt + a];
        double uu = 0.0, uur = 0.0, uut = 0.0;
        for (int i = 0; i < 4; ++i) {
            uu += rv[i] * u[kr + i];
            uur += rd[i] * u[kr + i];
            uut += rv[i] * ut[kr + i];
        }
        out.u += tv[a] * uu;
        out.ur += tv[a] * uur / g.dr;
        out.ut += tv[a] * uut;
    }
    return out;
}

} // namespace detail

/// Similarity frames of a radial run at the requested s values.
[[nodiscard]] inline WTrajectory to_similarity(const RadialTrajectory &traj, const EquationSpec &spec,
                                               double r0, double T0,
                                               const std::vector<double> &s_values,
                                               std::shared_ptr<const YGrid> grid)
{
    require(grid != nullptr, ErrorCode::InvalidGrid, "missing y grid");
    require(traj.size() >= 1, ErrorCode::PreconditionFailed, "empty trajectory");
    require(traj.grid.n_points >= 4, ErrorCode::InvalidGrid, "cubic interpolation needs 4 points");
    const double p = traj.p;
    const double beta = 2.0 / (p - 1.0);
    const double t_lo = traj.times.front(), t_hi = traj.times.back();
    const double y_max = std::abs(grid->y.back());

    WTrajectory out;
    out.spec = spec;
    out.r0 = r0;
    out.T0 = T0;
    out.grid = grid;
    double s_prev = -std::numeric_limits<double>::infinity();
    for (const double s : s_values) {
        require(s > s_prev, ErrorCode::InvalidParameter, "s values must be strictly increasing");
        s_prev = s;
        const double lam = std::exp(-s);
        const double t = T0 - lam;
        if (!(t >= t_lo - 1e-14 && t <= t_hi + 1e-14)) {
            fail(ErrorCode::OutOfDomain, "t = T0 - e^{-s} = " + std::to_string(t)
                                             + " lies outside the simulated time range");
        }
        const double r_a = r0 - y_max * lam, r_b = r0 + y_max * lam;
        if (r_a < traj.grid.r_min - 1e-12 || r_b > traj.grid.r_max + 1e-12) {
            fail(ErrorCode::OutOfDomain, "backward cone at s = " + std::to_string(s)
                                             + " leaves the radial grid");
        }
        SimilarityFrame f;
        f.r0 = r0;
        f.T0 = T0;
        f.s = s;
        f.grid = grid;
        const std::size_t n = grid->size();
        f.w.resize(n);
        f.ws.resize(n);
        f.wy.resize(n);
        const double sc = std::pow(lam, beta);
        const double sc_t = sc * lam;
        for (std::size_t j = 0; j < n; ++j) {
            const double y = grid->y[j];
            const auto smp = detail::sample_trajectory(traj, r0 + y * lam, t);
            f.w[j] = sc * smp.u;
            f.wy[j] = lam * sc * smp.ur;
            f.ws[j] = -beta * f.w[j] - y * f.wy[j] + sc_t * smp.ut;
        }
        out.frames.push_back(std::move(f));
    }
    return out;
}

struct SRange {
    double start = 0.0;
    double end = 1.0;
};

struct WControls {
    double cfl = 0.5;          ///< ds = cfl * (smallest dy)
    double frame_ds = 0.05;    ///< spacing of stored frames
    bool check_cutoff = true;
    double cutoff_ratio = 10.0;
    double cutoff_floor = 1e-6; ///< medians below this are replaced by it
    double amplitude_cap = 1e8; ///< max|w| beyond this is treated as breakdown
    double s_window_start = std::numeric_limits<double>::quiet_NaN(); ///< recorded only
};

/// Smallest admissible start of the s range for the given centre.
[[nodiscard]] inline double min_s_start(const EquationSpec &spec, double r0, double T0)
{
    double s = -std::log(T0);
    if (spec.N() >= 2) s = std::max(s, -std::log(r0 / 2.0));
    return s;
}

namespace detail
{

class WRhs
{
  public:
    WRhs(const EquationSpec &spec, double r0, double T0, const YGrid &grid)
        : spec_(spec), r0_(r0), T0_(T0), y_(grid.y), quad_(grid, spec.p()), L_(grid, quad_)
    {
        const double p = spec.p();
        beta_ = 2.0 / (p - 1.0);
        c_mass_ = 2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0));
        c_damp_ = (p + 3.0) / (p - 1.0);
    }

    void operator()(const std::vector<double> &w, const std::vector<double> &v, double s,
                    std::vector<double> &dw, std::vector<double> &dv)
    {
        const std::size_t n = y_.size();
        const double p = spec_.p();
        const double scale = spec_.nonlinearity_scale();
        L_.apply(w, lw_);
        wy_ = derivative(w, y_);
        vy_ = derivative(v, y_);
        const double lam = std::exp(-s);
        const bool radial = spec_.N() >= 2;
        const bool has_f = !spec_.f_is_zero();
        const bool has_g = !spec_.g_is_zero();
        const double log_scale = beta_ * s;
        const double g_pref = std::exp(-p * beta_ * s);
        const double g_up = std::exp((beta_ + 1.0) * s);
        const double t = T0_ - lam;
        for (std::size_t j = 0; j < n; ++j) {
            const double y = y_[j];
            double acc = lw_[j] - c_mass_ * w[j] + scale * EquationSpec::signed_pow(w[j], p)
                         - c_damp_ * v[j] - 2.0 * y * vy_[j];
            if (radial) acc += lam * (spec_.N() - 1.0) / (r0_ + y * lam) * wy_[j];
            if (has_f) acc += spec_.scaled_f(w[j], log_scale);
            if (has_g) {
                const double x = std::abs(r0_ + y * lam);
                acc += g_pref
                       * spec_.g(x, t, g_up * wy_[j], g_up * (v[j] + y * wy_[j] + beta_ * w[j]));
            }
            dw[j] = v[j];
            dv[j] = acc;
        }
    }

    [[nodiscard]] const WeightedQuadrature &quadrature() const noexcept { return quad_; }

  private:
    const EquationSpec &spec_;
    double r0_, T0_;
    std::vector<double> y_;
    WeightedQuadrature quad_;
    FluxOperator L_;
    double beta_ = 1.0, c_mass_ = 0.0, c_damp_ = 0.0;
    std::vector<double> lw_, wy_, vy_;
};

inline void check_cutoff(const std::vector<double> &w, const YGrid &grid, const WControls &c,
                         double s)
{
    std::vector<double> inner;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (std::abs(grid.y[j]) <= 0.5) inner.push_back(std::abs(w[j]));
    }
    if (inner.empty()) return;
    auto mid = inner.begin() + static_cast<std::ptrdiff_t>(inner.size() / 2);
    std::nth_element(inner.begin(), mid, inner.end());
    const double med = std::max(*mid, c.cutoff_floor);
    const double edge = std::max(std::abs(w.front()), std::abs(w.back()));
    if (edge > c.cutoff_ratio * med) {
        fail(ErrorCode::CutoffViolation, "edge amplitude " + std::to_string(edge) + " exceeds "
                                             + std::to_string(c.cutoff_ratio)
                                             + "x the interior median at s=" + std::to_string(s));
    }
}

} // namespace detail

/// Integrates the similarity-variable equation for (w, ws) with RK4 on `grid`,
/// storing frames every controls.frame_ds (plus the initial and final states).
[[nodiscard]] inline WTrajectory evolve_w(const EquationSpec &spec, double r0, double T0,
                                          const std::vector<double> &w_init,
                                          const std::vector<double> &ws_init, SRange range,
                                          std::shared_ptr<const YGrid> grid,
                                          const WControls &controls = {})
{
    require(grid != nullptr, ErrorCode::InvalidGrid, "missing y grid");
    const std::size_t n = grid->size();
    require(w_init.size() == n && ws_init.size() == n, ErrorCode::InvalidParameter,
            "initial data do not match the grid");
    require(T0 > 0.0, ErrorCode::InvalidParameter, "T0 must be positive");
    require(spec.N() < 2 || r0 > 0.0, ErrorCode::InvalidParameter, "r0 must be positive for N >= 2");
    require(range.end > range.start, ErrorCode::InvalidParameter, "empty s range");
    const double s_min = min_s_start(spec, r0, T0);
    require(range.start >= s_min - 1e-12, ErrorCode::InvalidParameter,
            "s range must start at or after " + std::to_string(s_min));
    require(controls.cfl > 0.0 && controls.frame_ds > 0.0, ErrorCode::InvalidParameter,
            "cfl and frame spacing must be positive");

    detail::WRhs rhs(spec, r0, T0, *grid);
    WTrajectory out;
    out.spec = spec;
    out.r0 = r0;
    out.T0 = T0;
    out.grid = grid;
    out.s_window_start = std::isnan(controls.s_window_start) ? range.start : controls.s_window_start;

    std::vector<double> w = w_init, v = ws_init;
    std::vector<double> k1w(n), k1v(n), k2w(n), k2v(n), k3w(n), k3v(n), k4w(n), k4v(n), tw(n), tv(n);
    const double ds_max = controls.cfl * grid->min_spacing();

    auto store = [&](double s) {
        SimilarityFrame f;
        f.r0 = r0;
        f.T0 = T0;
        f.s = s;
        f.grid = grid;
        f.w = w;
        f.ws = v;
        f.wy = derivative(w, grid->y);
        out.frames.push_back(std::move(f));
    };
    auto finite_check = [&](double s) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(w[j]) || !std::isfinite(v[j]) || std::abs(w[j]) > controls.amplitude_cap) {
                fail(ErrorCode::NonFinite, "w became non-finite or unbounded at s=" + std::to_string(s));
            }
        }
    };

    double s = range.start;
    store(s);
    if (controls.check_cutoff) detail::check_cutoff(w, *grid, controls, s);
    const auto total_frames =
        static_cast<std::size_t>(std::ceil((range.end - range.start) / controls.frame_ds - 1e-9));
    for (std::size_t fr = 1; fr <= total_frames; ++fr) {
        const double s_next = std::min(range.end, range.start + static_cast<double>(fr) * controls.frame_ds);
        const double span = s_next - s;
        const auto sub = static_cast<std::size_t>(std::ceil(span / ds_max - 1e-9));
        const double h = span / static_cast<double>(std::max<std::size_t>(sub, 1));
        for (std::size_t k = 0; k < std::max<std::size_t>(sub, 1); ++k) {
            rhs(w, v, s, k1w, k1v);
            for (std::size_t j = 0; j < n; ++j) {
                tw[j] = w[j] + 0.5 * h * k1w[j];
                tv[j] = v[j] + 0.5 * h * k1v[j];
            }
            rhs(tw, tv, s + 0.5 * h, k2w, k2v);
            for (std::size_t j = 0; j < n; ++j) {
                tw[j] = w[j] + 0.5 * h * k2w[j];
                tv[j] = v[j] + 0.5 * h * k2v[j];
            }
            rhs(tw, tv, s + 0.5 * h, k3w, k3v);
            for (std::size_t j = 0; j < n; ++j) {
                tw[j] = w[j] + h * k3w[j];
                tv[j] = v[j] + h * k3v[j];
            }
            rhs(tw, tv, s + h, k4w, k4v);
            for (std::size_t j = 0; j < n; ++j) {
                w[j] += h / 6.0 * (k1w[j] + 2.0 * k2w[j] + 2.0 * k3w[j] + k4w[j]);
                v[j] += h / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
            }
            s += h;
        }
        s = s_next;
        finite_check(s);
        if (controls.check_cutoff) detail::check_cutoff(w, *grid, controls, s);
        store(s);
    }
    return out;
}

} // namespace blowup

#endif
