#ifndef BLOWUP_RADIAL_SOLVER_HPP
#define BLOWUP_RADIAL_SOLVER_HPP

// Method-of-lines integrator for
//
//   u_tt = u_rr + (N-1)/r u_r + |u|^{p-1}u + f(u) + g(r, t, u_r, u_t)
//
// with u_r = 0 imposed through ghost points at both grid ends. For N >= 2 the
// grid starts at r_min > 0 (the origin is avoided); for N = 1 the grid is an
// oversized box and a boundary monitor aborts the run once a disturbance
// reaches its ends.

#include <blowup/error.hpp>
#include <blowup/model.hpp>
#include <blowup/rng.hpp>

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace blowup
{

struct RadialGrid {
    double r_min = 0.0;
    double r_max = 1.0;
    std::size_t n_points = 2;
    double dr = 1.0;

    /// Validated uniform grid; r_min > 0 is required when N >= 2.
    static RadialGrid make(double r_min, double r_max, std::size_t n_points, int N)
    {
        require(n_points >= 3, ErrorCode::InvalidGrid, "grid needs at least 3 points");
        require(r_max > r_min, ErrorCode::InvalidGrid, "r_max must exceed r_min");
        require(N < 2 || r_min > 0.0, ErrorCode::InvalidGrid,
                "r_min must be positive when N >= 2 (the origin is excluded)");
        RadialGrid g;
        g.r_min = r_min;
        g.r_max = r_max;
        g.n_points = n_points;
        g.dr = (r_max - r_min) / static_cast<double>(n_points - 1);
        return g;
    }

    [[nodiscard]] double r(std::size_t i) const noexcept
    {
        return r_min + dr * static_cast<double>(i);
    }
};

struct InitialData {
    std::vector<double> u0;
    std::vector<double> u1;
};

namespace initial_data
{

inline InitialData from_functions(const RadialGrid &grid, const std::function<double(double)> &u0,
                                  const std::function<double(double)> &u1)
{
    InitialData d;
    d.u0.resize(grid.n_points);
    d.u1.resize(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        d.u0[i] = u0(grid.r(i));
        d.u1[i] = u1 ? u1(grid.r(i)) : 0.0;
    }
    return d;
}

inline InitialData constant(const RadialGrid &grid, double A, double B = 0.0)
{
    return {std::vector<double>(grid.n_points, A), std::vector<double>(grid.n_points, B)};
}

inline InitialData gaussian(const RadialGrid &grid, double amplitude, double center, double width)
{
    return from_functions(
        grid,
        [=](double r) {
            const double x = (r - center) / width;
            return amplitude * std::exp(-x * x);
        },
        {});
}

/// A + bump * cos-shaped perturbation centred at `center` with half-width `width`.
inline InitialData bumped_plateau(const RadialGrid &grid, double A, double bump, double center,
                                  double width)
{
    return from_functions(
        grid,
        [=](double r) {
            const double x = (r - center) / width;
            return A + (std::abs(x) < 1.0 ? bump * 0.5 * (1.0 + std::cos(std::numbers::pi * x)) : 0.0);
        },
        {});
}

/// Plateaus +A for r > center and -A for r < center joined by a tanh of given width.
inline InitialData signed_plateaus(const RadialGrid &grid, double A, double center, double width)
{
    return from_functions(grid, [=](double r) { return A * std::tanh((r - center) / width); }, {});
}

} // namespace initial_data

struct EvolveControls {
    double cfl = 0.5;               ///< dt = cfl * dr at the start, in (0,1]
    double blowup_threshold = 1e8;  ///< stop once max|u| reaches this
    std::size_t max_steps = 2'000'000;
    double t_end = std::numeric_limits<double>::infinity();
    bool adaptive_dt = true;        ///< halve dt whenever max|u| doubles since the last halving
    double dt_halving_floor = 1.0;  ///< amplitudes below this never trigger halving
    std::size_t save_every = 1;     ///< store every n-th step (the final state is always kept)
    bool monitor_boundary = true;
    std::size_t monitor_points = 5;
    double monitor_tol = 1e-6;
};

enum class RunStatus { Completed, BlowupDetected, Unstable };

inline std::string to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::BlowupDetected: return "BlowupDetected";
    case RunStatus::Unstable: return "Unstable";
    }
    return "Unknown";
}

struct RadialTrajectory {
    RadialGrid grid;
    double p = 3.0;
    int N = 1;
    std::vector<double> times;
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> ut;
    std::vector<double> amplitude_history; ///< max|u| at each stored time
    RunStatus status = RunStatus::Completed;
    std::size_t steps = 0;
    std::string stop_reason;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }

    void push(double t, std::vector<double> uu, std::vector<double> vv)
    {
        double amp = 0.0;
        for (const double x : uu) amp = std::max(amp, std::abs(x));
        times.push_back(t);
        u.push_back(std::move(uu));
        ut.push_back(std::move(vv));
        amplitude_history.push_back(amp);
    }
};

namespace detail
{

class RadialRhs
{
  public:
    RadialRhs(const EquationSpec &spec, const RadialGrid &grid) : spec_(spec), grid_(grid) {}

    void operator()(const std::vector<double> &u, const std::vector<double> &v, double t,
                    std::vector<double> &du, std::vector<double> &dv) const
    {
        const std::size_t n = grid_.n_points;
        const double dr = grid_.dr;
        const double inv_dr2 = 1.0 / (dr * dr);
        const double inv_2dr = 0.5 / dr;
        const double p = spec_.p();
        const double scale = spec_.nonlinearity_scale();
        const int N = spec_.N();
        for (std::size_t i = 0; i < n; ++i) {
            // Neumann ghosts: u_{-1} = u_1, u_n = u_{n-2}.
            const double left = i == 0 ? u[1] : u[i - 1];
            const double right = i + 1 == n ? u[n - 2] : u[i + 1];
            const double urr = (right - 2.0 * u[i] + left) * inv_dr2;
            const double ur = (right - left) * inv_2dr;
            const double r = grid_.r(i);
            double acc = urr + scale * EquationSpec::signed_pow(u[i], p) + spec_.f(u[i]);
            if (N >= 2) acc += (N - 1.0) / r * ur;
            if (!spec_.g_is_zero()) acc += spec_.g(std::abs(r), t, ur, v[i]);
            du[i] = v[i];
            dv[i] = acc;
        }
    }

  private:
    const EquationSpec &spec_;
    const RadialGrid &grid_;
};

inline double max_abs(const std::vector<double> &x)
{
    double m = 0.0;
    for (const double a : x) m = std::max(m, std::abs(a));
    return m;
}

inline bool all_finite(const std::vector<double> &x)
{
    return std::all_of(x.begin(), x.end(), [](double a) { return std::isfinite(a); });
}

inline double band_variation(const std::vector<double> &u, std::size_t lo, std::size_t hi)
{
    double mn = u[lo], mx = u[lo];
    for (std::size_t i = lo; i < hi; ++i) {
        mn = std::min(mn, u[i]);
        mx = std::max(mx, u[i]);
    }
    return mx - mn;
}

} // namespace detail

/// Integrates the radial equation from (u0, u1) with classical RK4 until the
/// blow-up threshold, t_end, max_steps or a non-finite value is reached.
/// Throws DomainTooSmall when the boundary monitor fires.
[[nodiscard]] inline RadialTrajectory evolve(const EquationSpec &spec, const InitialData &data,
                                             const RadialGrid &grid,
                                             const EvolveControls &controls = {})
{
    require(grid.n_points >= 3, ErrorCode::InvalidGrid, "grid needs at least 3 points");
    require(spec.N() < 2 || grid.r_min > 0.0, ErrorCode::InvalidGrid,
            "r_min must be positive when N >= 2");
    require(data.u0.size() == grid.n_points && data.u1.size() == grid.n_points,
            ErrorCode::InvalidParameter, "initial data must be sampled on the grid");
    require(controls.cfl > 0.0 && controls.cfl <= 1.0, ErrorCode::InvalidParameter,
            "CFL fraction must lie in (0,1]");
    require(controls.save_every >= 1, ErrorCode::InvalidParameter, "save_every must be >= 1");

    const std::size_t n = grid.n_points;
    RadialTrajectory traj;
    traj.grid = grid;
    traj.p = spec.p();
    traj.N = spec.N();

    std::vector<double> u = data.u0, v = data.u1;
    std::vector<double> k1u(n), k1v(n), k2u(n), k2v(n), k3u(n), k3v(n), k4u(n), k4v(n);
    std::vector<double> tu(n), tv(n);
    const detail::RadialRhs rhs(spec, grid);

    const std::size_t band = std::min(controls.monitor_points, n / 4);
    const bool watch_left = spec.N() == 1;
    const double var_left0 = detail::band_variation(u, 0, band);
    const double var_right0 = detail::band_variation(u, n - band, n);

    double t = 0.0;
    double dt = controls.cfl * grid.dr;
    double amp = detail::max_abs(u);
    double amp_ref = std::max(amp, controls.dt_halving_floor);
    traj.push(t, u, v);

    std::size_t step = 0;
    bool stored_last = true;
    for (;;) {
        if (amp >= controls.blowup_threshold) {
            traj.status = RunStatus::BlowupDetected;
            traj.stop_reason = "threshold";
            break;
        }
        if (t >= controls.t_end) {
            traj.stop_reason = "t_end";
            break;
        }
        if (step >= controls.max_steps) {
            traj.stop_reason = "max_steps";
            break;
        }
        if (controls.adaptive_dt && amp >= 2.0 * amp_ref) {
            dt *= 0.5;
            amp_ref = amp;
        }
        const double h = std::min(dt, controls.t_end - t);

        rhs(u, v, t, k1u, k1v);
        for (std::size_t i = 0; i < n; ++i) {
            tu[i] = u[i] + 0.5 * h * k1u[i];
            tv[i] = v[i] + 0.5 * h * k1v[i];
        }
        rhs(tu, tv, t + 0.5 * h, k2u, k2v);
        for (std::size_t i = 0; i < n; ++i) {
            tu[i] = u[i] + 0.5 * h * k2u[i];
            tv[i] = v[i] + 0.5 * h * k2v[i];
        }
        rhs(tu, tv, t + 0.5 * h, k3u, k3v);
        for (std::size_t i = 0; i < n; ++i) {
            tu[i] = u[i] + h * k3u[i];
            tv[i] = v[i] + h * k3v[i];
        }
        rhs(tu, tv, t + h, k4u, k4v);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] += h / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        t = (h == controls.t_end - t) ? controls.t_end : t + h;
        ++step;

        if (!detail::all_finite(u) || !detail::all_finite(v)) {
            traj.status = RunStatus::Unstable;
            traj.stop_reason = "non-finite values at t=" + std::to_string(t);
            stored_last = true;
            break;
        }
        amp = detail::max_abs(u);

        if (controls.monitor_boundary && band > 0 && amp < controls.blowup_threshold) {
            auto band_amp = [&](std::size_t lo, std::size_t hi) {
                double m = 0.0;
                for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(u[i]));
                return m;
            };
            const double vr = detail::band_variation(u, n - band, n) - var_right0;
            const bool hit_right = vr > controls.monitor_tol * (1.0 + band_amp(n - band, n));
            bool hit_left = false;
            if (watch_left) {
                const double vl = detail::band_variation(u, 0, band) - var_left0;
                hit_left = vl > controls.monitor_tol * (1.0 + band_amp(0, band));
            }
            if (hit_right || hit_left) {
                fail(ErrorCode::DomainTooSmall,
                     "disturbance reached the " + std::string(hit_right ? "r_max" : "r_min")
                         + " boundary at t=" + std::to_string(t) + " before the blow-up threshold");
            }
        }

        stored_last = false;
        if (step % controls.save_every == 0) {
            traj.push(t, u, v);
            stored_last = true;
        }
    }
    if (!stored_last || traj.status == RunStatus::Unstable) {
        if (traj.times.back() != t) traj.push(t, u, v);
    }
    traj.steps = step;
    return traj;
}

struct ScalarTrajectory {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> ut;
    bool blew_up = false;
    double T_est = std::numeric_limits<double>::quiet_NaN();
};

struct OdeControls {
    double blowup_threshold = 1e8;
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    double initial_dt = 1e-4;
    int g_samples = 200;
};

/// Reference solution of U'' = |U|^{p-1}U + f(U) + g(0, t, 0, U') for spatially
/// constant data (adaptive Dormand-Prince). Rejects g that depends on |x|.
[[nodiscard]] inline ScalarTrajectory ode_reference(const EquationSpec &spec, double u0, double u1,
                                                    double t_end, const OdeControls &controls = {})
{
    if (!spec.g_is_zero()) {
        CounterRng rng(0x0de);
        for (int i = 0; i < controls.g_samples; ++i) {
            const double x1 = rng.uniform(0.0, 100.0), x2 = rng.uniform(0.0, 100.0);
            const double t = rng.uniform(-10.0, 10.0), v = rng.uniform(-10.0, 10.0),
                         z = rng.uniform(-10.0, 10.0);
            const double a = spec.g(x1, t, v, z), b = spec.g(x2, t, v, z);
            require(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)), ErrorCode::PreconditionFailed,
                    "g depends on |x|; the ODE reduction does not apply");
        }
    }
    using State = std::array<double, 2>;
    const double p = spec.p();
    const double scale = spec.nonlinearity_scale();
    auto system = [&](const State &x, State &dxdt, double t) {
        dxdt[0] = x[1];
        dxdt[1] = scale * EquationSpec::signed_pow(x[0], p) + spec.f(x[0]) + spec.g(0.0, t, 0.0, x[1]);
    };
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(controls.abs_tol, controls.rel_tol,
                                           odeint::runge_kutta_dopri5<State>());
    ScalarTrajectory out;
    State x{u0, u1};
    double t = 0.0;
    double dt = controls.initial_dt;
    out.t.push_back(t);
    out.u.push_back(x[0]);
    out.ut.push_back(x[1]);
    while (t < t_end) {
        if (std::abs(x[0]) >= controls.blowup_threshold) {
            out.blew_up = true;
            break;
        }
        dt = std::min(dt, t_end - t);
        if (stepper.try_step(system, x, t, dt) == odeint::fail) {
            require(dt > 1e-300, ErrorCode::StepFailure, "ODE step size underflow");
            continue;
        }
        require(std::isfinite(x[0]) && std::isfinite(x[1]), ErrorCode::NonFinite,
                "ODE solution became non-finite");
        out.t.push_back(t);
        out.u.push_back(x[0]);
        out.ut.push_back(x[1]);
    }
    if (out.blew_up) {
        // z = |U|^{-(p-1)/2} is asymptotically linear in T - t.
        const double a = std::abs(x[0]);
        const double z = std::pow(a, -(p - 1.0) / 2.0);
        const double zdot = -(p - 1.0) / 2.0 * std::pow(a, -(p + 1.0) / 2.0) * std::copysign(1.0, x[0]) * x[1];
        out.T_est = t - z / zdot;
    }
    return out;
}

struct BlowupTimeEstimate {
    double T = std::numeric_limits<double>::quiet_NaN();
    double fit_quality = 0.0; ///< R^2 of the linear fit of |u|^{-(p-1)/2} against t
    std::size_t points = 0;
};

struct BlowupFitOptions {
    double floor = 1e-6;        ///< |u| must exceed this for a sample to be used
    double window_ratio = 1e-2; ///< keep tail samples with |u| >= window_ratio * final |u|
    std::size_t min_points = 4;
};

/// Linear extrapolation of z(t) = |u(r,t)|^{-(p-1)/2} to zero over the final
/// monotone-growth window at grid index r_index.
[[nodiscard]] inline BlowupTimeEstimate
estimate_blowup_time(const RadialTrajectory &traj, std::size_t r_index,
                     const BlowupFitOptions &options = {})
{
    require(r_index < traj.grid.n_points, ErrorCode::InvalidParameter, "r_index out of range");
    const std::size_t m = traj.size();
    require(m >= 2, ErrorCode::InsufficientGrowth, "trajectory too short");
    auto amp = [&](std::size_t k) { return std::abs(traj.u[k][r_index]); };
    const double a_last = amp(m - 1);
    if (!(a_last > options.floor)) {
        fail(ErrorCode::InsufficientGrowth, "|u| never exceeds the fitting floor at this point");
    }
    std::size_t first = m - 1;
    const double keep = std::max(options.floor, options.window_ratio * a_last);
    while (first > 0 && amp(first - 1) < amp(first) && amp(first - 1) >= keep) {
        --first;
    }
    const std::size_t count = m - first;
    if (count < options.min_points) {
        fail(ErrorCode::InsufficientGrowth, "monotone growth window too short");
    }
    const double expo = -(traj.p - 1.0) / 2.0;
    const double t_ref = traj.times[m - 1];
    double st = 0, sz = 0, stt = 0, stz = 0;
    for (std::size_t k = first; k < m; ++k) {
        const double tt = traj.times[k] - t_ref;
        const double z = std::pow(amp(k), expo);
        st += tt;
        sz += z;
        stt += tt * tt;
        stz += tt * z;
    }
    const double cnt = static_cast<double>(count);
    const double tm = st / cnt, zm = sz / cnt;
    const double sxx = stt - cnt * tm * tm;
    const double sxy = stz - cnt * tm * zm;
    require(sxx > 0.0, ErrorCode::InsufficientGrowth, "degenerate time window");
    const double slope = sxy / sxx;
    const double icpt = zm - slope * tm;
    if (!(slope < 0.0)) {
        fail(ErrorCode::InsufficientGrowth, "|u| is not growing at the blow-up rate");
    }
    double ss_res = 0, ss_tot = 0;
    for (std::size_t k = first; k < m; ++k) {
        const double tt = traj.times[k] - t_ref;
        const double z = std::pow(amp(k), expo);
        ss_res += (z - icpt - slope * tt) * (z - icpt - slope * tt);
        ss_tot += (z - zm) * (z - zm);
    }
    BlowupTimeEstimate est;
    est.T = t_ref - icpt / slope;
    est.fit_quality = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    est.points = count;
    return est;
}

enum class PointClass { NonCharacteristic, Characteristic, Unknown };

inline std::string to_string(PointClass c)
{
    switch (c) {
    case PointClass::NonCharacteristic: return "NonCharacteristic";
    case PointClass::Characteristic: return "Characteristic";
    case PointClass::Unknown: return "Unknown";
    }
    return "Unknown";
}

struct BlowupGraph {
    std::vector<double> r_samples;
    std::vector<double> T_estimates; ///< NaN where no estimate was possible
    std::vector<double> fit_quality;
    std::vector<PointClass> classification;

    [[nodiscard]] std::size_t size() const noexcept { return r_samples.size(); }
};

/// estimate_blowup_time at every grid point; classification starts as Unknown.
[[nodiscard]] inline BlowupGraph blowup_graph(const RadialTrajectory &traj,
                                              const BlowupFitOptions &options = {})
{
    require(traj.status == RunStatus::BlowupDetected, ErrorCode::PreconditionFailed,
            "blow-up graph needs a BlowupDetected trajectory");
    BlowupGraph g;
    const std::size_t n = traj.grid.n_points;
    g.r_samples.resize(n);
    g.T_estimates.assign(n, std::numeric_limits<double>::quiet_NaN());
    g.fit_quality.assign(n, 0.0);
    g.classification.assign(n, PointClass::Unknown);
    for (std::size_t i = 0; i < n; ++i) {
        g.r_samples[i] = traj.grid.r(i);
        try {
            const auto est = estimate_blowup_time(traj, i, options);
            g.T_estimates[i] = est.T;
            g.fit_quality[i] = est.fit_quality;
        } catch (const Error &) {
        }
    }
    return g;
}

} // namespace blowup

#endif
