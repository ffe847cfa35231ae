#ifndef BLOWUP_SOLITON_ODE_HPP
#define BLOWUP_SOLITON_ODE_HPP

// Interaction system for k soliton centres,
//
//   (1/c1) zeta_i' = e^{-(2/(p-1))(zeta_i - zeta_{i-1})} - e^{-(2/(p-1))(zeta_{i+1} - zeta_i)} + forcing_i(s),
//
// where the terms involving the missing neighbours zeta_0 and zeta_{k+1} are
// absent. Without forcing the sum of the right-hand sides telescopes to zero.

#include <blowup/error.hpp>

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace blowup
{

struct CenterSystem {
    double p = 3.0;
    int k = 2;
    double c1 = 1.0;
    std::vector<double> alpha_bar;
};

/// Couplings b_i = (p-1) i (k-i) / (4 c1), i = 1..k-1, of the explicit solution.
[[nodiscard]] inline std::vector<double> center_couplings(double p, int k, double c1)
{
    require(k >= 2, ErrorCode::InvalidParameter, "the centre system needs k >= 2");
    require(c1 > 0.0, ErrorCode::InvalidParameter, "c1 must be positive");
    require(p > 1.0, ErrorCode::InvalidExponent, "p must exceed 1");
    std::vector<double> b(static_cast<std::size_t>(k - 1));
    for (int i = 1; i < k; ++i) b[static_cast<std::size_t>(i - 1)] = (p - 1.0) * i * (k - i) / (4.0 * c1);
    return b;
}

/// Offsets with alpha_{i+1} - alpha_i = -((p-1)/2) ln b_i and zero sum.
[[nodiscard]] inline std::vector<double> alpha_bars(double p, int k, double c1)
{
    const auto b = center_couplings(p, k, c1);
    std::vector<double> a(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) a[i] = a[i - 1] - 0.5 * (p - 1.0) * std::log(b[i - 1]);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(k);
    for (auto &x : a) x -= mean;
    return a;
}

[[nodiscard]] inline CenterSystem make_center_system(double p, int k, double c1 = 1.0)
{
    return CenterSystem{p, k, c1, alpha_bars(p, k, c1)};
}

/// zeta_bar_i(s) = (i - (k+1)/2)((p-1)/2) log s + alpha_bar_i.
[[nodiscard]] inline std::vector<double> zeta_bar(const CenterSystem &sys, double s)
{
    require(s > 0.0, ErrorCode::InvalidParameter, "zeta_bar needs s > 0");
    std::vector<double> z(static_cast<std::size_t>(sys.k));
    const double ls = std::log(s);
    for (int i = 1; i <= sys.k; ++i) {
        z[static_cast<std::size_t>(i - 1)] =
            (i - (sys.k + 1) / 2.0) * 0.5 * (sys.p - 1.0) * ls + sys.alpha_bar[static_cast<std::size_t>(i - 1)];
    }
    return z;
}

/// d zeta_bar_i / ds, analytically.
[[nodiscard]] inline std::vector<double> zeta_bar_rate(const CenterSystem &sys, double s)
{
    std::vector<double> z(static_cast<std::size_t>(sys.k));
    for (int i = 1; i <= sys.k; ++i) {
        z[static_cast<std::size_t>(i - 1)] = (i - (sys.k + 1) / 2.0) * 0.5 * (sys.p - 1.0) / s;
    }
    return z;
}

/// Interaction terms (right-hand side without c1 and forcing).
[[nodiscard]] inline std::vector<double> center_interactions(const CenterSystem &sys,
                                                             const std::vector<double> &z)
{
    const std::size_t k = z.size();
    const double beta = 2.0 / (sys.p - 1.0);
    std::vector<double> gaps(k > 0 ? k - 1 : 0);
    for (std::size_t i = 0; i + 1 < k; ++i) gaps[i] = std::exp(-beta * (z[i + 1] - z[i]));
    std::vector<double> out(k, 0.0);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        out[i] -= gaps[i];
        out[i + 1] += gaps[i];
    }
    return out;
}

/// max_i |(1/c1) zeta_bar_i'(s) - interactions_i(zeta_bar(s))|.
[[nodiscard]] inline double explicit_residual(const CenterSystem &sys, double s)
{
    const auto z = zeta_bar(sys, s);
    const auto rate = zeta_bar_rate(sys, s);
    const auto rhs = center_interactions(sys, z);
    double m = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) m = std::max(m, std::abs(rate[i] / sys.c1 - rhs[i]));
    return m;
}

[[nodiscard]] inline double barycenter(const std::vector<double> &zetas)
{
    if (zetas.empty()) return 0.0;
    return std::accumulate(zetas.begin(), zetas.end(), 0.0) / static_cast<double>(zetas.size());
}

/// forcing(i, s) with i = 0..k-1.
using CenterForcing = std::function<double(std::size_t, double)>;

struct CenterTrajectory {
    std::vector<double> s;
    std::vector<std::vector<double>> zetas;
    std::vector<double> barycenters;
};

struct CenterControls {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    std::size_t outputs = 200; ///< log-spaced output points
    double min_gap = 1e-8;
};

[[nodiscard]] inline CenterTrajectory integrate_system(const CenterSystem &sys,
                                                       const std::vector<double> &zeta_init,
                                                       double s_start, double s_end,
                                                       const CenterForcing &forcing = {},
                                                       const CenterControls &controls = {})
{
    require(static_cast<int>(zeta_init.size()) == sys.k, ErrorCode::InvalidParameter,
            "initial centres must have length k");
    require(s_start > 0.0 && s_end > s_start, ErrorCode::InvalidParameter, "need 0 < s_start < s_end");
    for (std::size_t i = 1; i < zeta_init.size(); ++i) {
        require(zeta_init[i] > zeta_init[i - 1], ErrorCode::InvalidParameter,
                "initial centres must be strictly increasing");
    }
    using State = std::vector<double>;
    const std::size_t k = zeta_init.size();
    auto rhs = [&](const State &z, State &dz, double s) {
        const auto inter = center_interactions(sys, z);
        for (std::size_t i = 0; i < k; ++i) {
            dz[i] = sys.c1 * (inter[i] + (forcing ? forcing(i, s) : 0.0));
        }
    };
    auto check = [&](const State &z, double s) {
        for (std::size_t i = 0; i < k; ++i) {
            require(std::isfinite(z[i]), ErrorCode::StepFailure, "non-finite centre");
        }
        for (std::size_t i = 1; i < k; ++i) {
            if (!(z[i] - z[i - 1] > controls.min_gap)) {
                fail(ErrorCode::StepFailure, "centres collided or lost their order at s=" + std::to_string(s));
            }
        }
    };
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_dense_output(controls.abs_tol, controls.rel_tol,
                                             odeint::runge_kutta_dopri5<State>());
    CenterTrajectory out;
    State z = zeta_init;
    out.s.push_back(s_start);
    out.zetas.push_back(z);
    out.barycenters.push_back(barycenter(z));
    const std::size_t m = std::max<std::size_t>(controls.outputs, 1);
    std::vector<double> obs;
    for (std::size_t j = 1; j <= m; ++j) {
        obs.push_back(j == m ? s_end
                             : s_start * std::pow(s_end / s_start, static_cast<double>(j) / static_cast<double>(m)));
    }
    stepper.initialize(z, s_start, 1e-3 * s_start);
    std::size_t next = 0;
    State tmp(k);
    while (next < obs.size()) {
        while (next < obs.size() && obs[next] <= stepper.current_time()) {
            stepper.calc_state(obs[next], tmp);
            check(tmp, obs[next]);
            out.s.push_back(obs[next]);
            out.zetas.push_back(tmp);
            out.barycenters.push_back(barycenter(tmp));
            ++next;
        }
        if (next >= obs.size()) break;
        stepper.do_step(rhs);
        check(stepper.current_state(), stepper.current_time());
        require(stepper.current_time_step() > 1e-14 * stepper.current_time(), ErrorCode::StepFailure,
                "step size collapsed");
    }
    return out;
}

} // namespace blowup

#endif
