// Acceptance suite. One PASS/FAIL line per criterion, detail lines indented.
// Exit status is nonzero when a criterion outside the known-failure list fails.
//
//   acceptance [config_dir] [work_dir]

#include <blowup/functionals.hpp>
#include <blowup/geometry.hpp>
#include <blowup/harness.hpp>
#include <blowup/local_energy.hpp>
#include <blowup/radial_solver.hpp>
#include <blowup/rng.hpp>
#include <blowup/similarity.hpp>
#include <blowup/soliton_ode.hpp>
#include <blowup/solitons.hpp>

#include "oracles.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#ifndef BLOWUP_CONFIG_DIR
#define BLOWUP_CONFIG_DIR "configs"
#endif

using namespace blowup;
namespace fs = std::filesystem;

namespace
{

struct Outcome {
    bool pass = false;
    std::vector<std::string> details;

    template <class... Args>
    void note(const char *fmt, Args... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        details.emplace_back(buf);
    }
};

struct Check {
    const char *id;
    const char *title;
    bool known_failure;
    std::function<Outcome()> check;
};

fs::path g_config_dir = BLOWUP_CONFIG_DIR;
fs::path g_work_dir = fs::temp_directory_path() / "blowup_acceptance";

// ---------------------------------------------------------------- suite 1 and 2

struct WRun {
    EquationSpec spec;
    bool near_soliton;
    double d;
    double eps;
};

std::vector<WTrajectory> &monotonicity_runs()
{
    static std::vector<WTrajectory> runs;
    if (!runs.empty()) return runs;
    const std::vector<WRun> cases{
        {pure_power(3.0, 1), true, 0.3, 0.05},
        {pure_power(2.0, 1), true, 0.0, 0.05},
        {pure_power(3.0, 1), false, 0.0, 0.1},
        {klein_gordon(3.0, 1), true, -0.3, 0.05},
        {klein_gordon(2.0, 1), false, 0.0, 0.1},
        {klein_gordon(3.0, 1), false, 0.0, 0.1},
    };
    auto grid = std::make_shared<const YGrid>(YGrid::uniform_with_spacing(1.0 / 400.0, 1e-4));
    CounterRng rng(2024);
    for (const auto &c : cases) {
        const double p = c.spec.p();
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        std::vector<double> w0(grid->size()), ws0(grid->size(), 0.0);
        for (std::size_t j = 0; j < grid->size(); ++j) {
            const double y = grid->y[j];
            w0[j] = c.near_soliton
                        ? kappa(p, c.d, y) * (1.0 - c.eps)
                        : kappa0(p) * (1.0 - c.eps * (1.0 + 0.5 * a * std::cos(std::numbers::pi * y) + 0.5 * b * y * y));
        }
        WControls wc;
        wc.frame_ds = 0.05;
        wc.s_window_start = 0.0;
        runs.push_back(evolve_w(c.spec, 0.0, 1.0, w0, ws0, {0.0, 5.0}, grid, wc));
    }
    return runs;
}

const char *run_label(std::size_t i)
{
    static const char *names[] = {"pure power p=3 near soliton d=0.3", "pure power p=2 near soliton d=0",
                                  "pure power p=3 generic",           "Klein-Gordon p=3 near soliton d=-0.3",
                                  "Klein-Gordon p=2 generic",         "Klein-Gordon p=3 generic"};
    return names[i];
}

Outcome ac1()
{
    Outcome o;
    o.pass = true;
    const auto &runs = monotonicity_runs();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto rep = monotonicity_report(runs[i]);
        double hmax = 0.0;
        for (const double h : rep.H_values) hmax = std::max(hmax, std::abs(h));
        const double ds = runs[i].frames.back().s - runs[i].frames.front().s;
        const bool ok = rep.max_violation <= 1e-3 * hmax && ds >= 5.0 - 1e-12;
        o.pass = o.pass && ok;
        o.note("%-38s ds=%.2f  max increase %.3e  (bound %.3e, mu=%.3g)", run_label(i), ds, rep.max_violation,
               1e-3 * hmax, rep.mu);
    }
    o.pass = o.pass && runs.size() >= 5;
    return o;
}

Outcome ac2()
{
    Outcome o;
    o.pass = true;
    const auto &runs = monotonicity_runs();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto rep = monotonicity_report(runs[i]);
        double hmin = std::numeric_limits<double>::infinity();
        std::size_t bad = 0;
        for (const auto &r : rep.readouts) {
            if (r.s < runs[i].s_window_start) continue;
            hmin = std::min(hmin, r.H);
            bad += blowup_criterion(r, 1e-3) == Criterion::ViolatesCriterion;
        }
        o.pass = o.pass && bad == 0;
        o.note("%-38s min H %.6f  frames below -1e-3: %zu", run_label(i), hmin, bad);
    }
    return o;
}

// ---------------------------------------------------------------- suite 3

Outcome ac3()
{
    Outcome o;
    o.pass = true;
    const double p = 3.0;
    auto grid = std::make_shared<const YGrid>(YGrid::uniform_with_spacing(1.0 / 400.0));
    const WeightedQuadrature quad(*grid, p);
    for (const double d : {0.0, 0.3, -0.3, 0.6, -0.6}) {
        std::vector<double> w0(grid->size()), ws0(grid->size(), 0.0);
        for (std::size_t j = 0; j < grid->size(); ++j) w0[j] = oracle::kappa(p, d, grid->y[j]);
        WControls wc;
        wc.frame_ds = 0.25;
        const auto tr = evolve_w(pure_power(p, 1), 0.0, 1.0, w0, ws0, {0.0, 5.0}, grid, wc);
        double worst = 0.0;
        for (const auto &f : tr.frames) {
            std::vector<double> e(f.size());
            for (std::size_t j = 0; j < f.size(); ++j) e[j] = (f.w[j] - w0[j]) * (f.w[j] - w0[j]);
            worst = std::max(worst, std::sqrt(quad.integrate(e, WeightKind::Rho)));
        }
        const bool ok = worst < 1e-2 && tr.frames.back().s >= 5.0 - 1e-12;
        o.pass = o.pass && ok;
        o.note("d=%+.1f  max weighted L2 drift %.3e over s in [0, %.1f]", d, worst, tr.frames.back().s);
    }
    return o;
}

// ---------------------------------------------------------------- suite 4

Outcome ac4()
{
    Outcome o;
    const auto g = RadialGrid::make(-10.0, 10.0, 801, 1);
    const auto spec = pure_power(3.0, 1);
    const auto tr = evolve(spec, initial_data::constant(g, 1.0), g);
    if (tr.status != RunStatus::BlowupDetected) {
        o.note("run did not blow up: %s", tr.stop_reason.c_str());
        return o;
    }
    const std::size_t mid = 400;
    const auto est = estimate_blowup_time(tr, mid);
    const double s0 = -std::log(est.T);
    auto yg = std::make_shared<const YGrid>(YGrid::clustered(401));
    const std::vector<double> s{s0 + 1.0, s0 + 2.0, s0 + 3.0, s0 + 4.0, s0 + 5.0};
    const auto w = to_similarity(tr, spec, g.r(mid), est.T, s, yg);
    const WeightedQuadrature q(*yg, 3.0);
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    SingleFit last;
    for (const auto &f : w.frames) {
        last = fit_single(f, q);
        decreasing = decreasing && last.residual_hnorm < prev;
        o.note("s=%.3f  residual %.3e  d=%+.2e  theta=%+d", f.s, last.residual_hnorm, last.params.d,
               last.params.theta);
        prev = last.residual_hnorm;
    }
    SpeedOptions so;
    so.min_gap = 1e-4;
    const auto sc = speed_bound_check(tr, g.r(mid), est.T, 3.0, 1, so);
    const double k0 = oracle::kappa0(3.0);
    const bool rate = sc.consistent_with_blowup && std::abs(sc.limit_ratio - k0) <= 0.02 * k0;
    o.note("T=%.7f (fit R2 %.8f); sup|u|(T-t) at the last sample %.6f vs sqrt2 %.6f", est.T, est.fit_quality,
           sc.limit_ratio, k0);
    o.pass = decreasing && std::abs(last.params.d) <= 0.02 && rate;
    return o;
}

// ---------------------------------------------------------------- suites 5 and 6

Outcome ac5()
{
    Outcome o;
    o.pass = true;
    for (const double p : {2.0, 3.0}) {
        for (const int k : {2, 3, 4}) {
            const auto sys = make_center_system(p, k, 1.0);
            double res = 0.0, bc = 0.0;
            for (double s = 2.0; s <= 1e6; s *= 1.5) {
                res = std::max(res, explicit_residual(sys, s));
                bc = std::max(bc, std::abs(barycenter(zeta_bar(sys, s))));
            }
            o.pass = o.pass && res < 1e-10 && bc <= 1e-14;
            o.note("p=%.0f k=%d  max residual %.2e  max |barycenter| %.2e", p, k, res, bc);
        }
    }
    return o;
}

Outcome ac6()
{
    Outcome o;
    o.pass = true;
    CounterRng rng(606);
    double worst_bc = 0.0, worst_dev = 0.0, worst_forced = 0.0;
    const CenterForcing forcing = [](std::size_t i, double s) { return (i % 2 == 0 ? 1.0 : -1.0) / std::pow(s, 1.5); };
    auto deviation = [](const CenterSystem &sys, const CenterTrajectory &tr) {
        const auto zb = zeta_bar(sys, tr.s.back());
        std::vector<double> dev(zb.size());
        for (std::size_t i = 0; i < zb.size(); ++i) dev[i] = tr.zetas.back()[i] - zb[i];
        const double z0 = barycenter(dev);
        double m = 0.0;
        for (const double x : dev) m = std::max(m, std::abs(x - z0));
        return m;
    };
    for (int m = 0; m < 20; ++m) {
        const int k = m % 2 == 0 ? 2 : 3;
        const double p = m % 4 < 2 ? 3.0 : 2.0;
        const auto sys = make_center_system(p, k, 1.0);
        auto z = zeta_bar(sys, 10.0);
        std::vector<double> dz(z.size());
        for (auto &x : dz) x = rng.uniform(-0.5, 0.5);
        const double mean = barycenter(dz);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += dz[i] - mean;
        const auto tr = integrate_system(sys, z, 10.0, 1e4);
        for (const double b : tr.barycenters) worst_bc = std::max(worst_bc, std::abs(b - tr.barycenters.front()));
        worst_dev = std::max(worst_dev, deviation(sys, tr));
        const auto tf = integrate_system(sys, z, 10.0, 1e4, forcing);
        worst_forced = std::max(worst_forced, deviation(sys, tf));
    }
    o.pass = worst_bc < 1e-10 && worst_dev < 1e-2 && worst_forced < 5e-2;
    o.note("20 runs, k in {2,3}, p in {2,3}: barycenter drift %.2e, max|zeta - zeta_bar - zeta0| %.2e", worst_bc,
           worst_dev);
    o.note("with forcing +-1/s^1.5: max|zeta - zeta_bar - zeta0| %.2e", worst_forced);
    return o;
}

// ---------------------------------------------------------------- suites 7 and 8

Outcome ac7()
{
    Outcome o;
    const double p = 3.0;
    auto grid = std::make_shared<const YGrid>(YGrid::clustered(801));
    const WeightedQuadrature quad(*grid, p);
    CounterRng rng(707);
    int recovered = 0, energy = 0;
    std::array<int, 5> per_k{}, energy_k{};
    for (int m = 0; m < 50; ++m) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 4);
        const int theta = rng.uniform() < 0.5 ? 1 : -1;
        std::vector<double> z(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 1; i < z.size(); ++i) z[i] = z[i - 1] + rng.uniform(1.5, 2.0);
        const double shift = barycenter(z) - rng.uniform(-0.25, 0.25);
        for (auto &x : z) x -= shift;
        const auto dec = decompose(soliton_frame(grid, p, theta, z), quad, 4);
        bool ok = dec.k == k && dec.theta1 == theta;
        if (ok) {
            for (std::size_t i = 0; i < z.size(); ++i) ok = ok && std::abs(dec.zetas[i] - z[i]) < 1e-2;
        }
        recovered += ok;
        energy += dec.k_energy == k;
        ++per_k[k];
        energy_k[k] += dec.k_energy == k;
    }
    o.pass = recovered == 50 && energy >= 48;
    o.note("recovered k, sign and centers (error < 1e-2): %d/50", recovered);
    o.note("energy-based k agrees: %d/50 (needs 48); by k: 1:%d/%d 2:%d/%d 3:%d/%d 4:%d/%d", energy, energy_k[1],
           per_k[1], energy_k[2], per_k[2], energy_k[3], per_k[3], energy_k[4], per_k[4]);
    return o;
}

Outcome ac8()
{
    Outcome o;
    auto grid = std::make_shared<const YGrid>(YGrid::clustered(2001));
    const WeightedQuadrature quad(*grid, 3.0);
    SimilarityFrame f;
    f.grid = grid;
    f.w.assign(grid->size(), oracle::kappa0(3.0));
    f.ws.assign(grid->size(), 0.0);
    f.wy.assign(grid->size(), 0.0);
    // kappa0^2/(p-1) * int (1-y^2)^{2/(p-1)}.
    const double level = oracle::kappa0(3.0) * oracle::kappa0(3.0) / 2.0 * oracle::weight_mass(1.0);
    const double e = E0(f, quad);
    const bool first = std::abs(e - 4.0 / 3.0) <= 1e-4 && std::abs(level - 4.0 / 3.0) <= 1e-12;
    o.note("E0(kappa0) = %.8f (closed form %.8f)", e, level);
    // Independent value: Gauss-Legendre in x with y = tanh x.
    auto exact = [](const std::vector<double> &z) {
        const double p = 3.0;
        auto dens = [&](double x) {
            const double y = std::tanh(x), jac = 1.0 - y * y;
            double w = 0.0, wy = 0.0, sign = 1.0;
            for (const double zi : z) {
                w += sign * oracle::kappa(p, -std::tanh(zi), y);
                wy += sign * oracle::kappa_y(p, -std::tanh(zi), y);
                sign = -sign;
            }
            const double c = (p + 1.0) / ((p - 1.0) * (p - 1.0));
            return (0.5 * wy * wy * (1.0 - y * y) + c * w * w - std::pow(std::abs(w), p + 1.0) / (p + 1.0))
                   * std::pow(1.0 - y * y, 2.0 / (p - 1.0)) * jac;
        };
        return oracle::gauss(dens, z.front() - 15.0, z.back() + 15.0, 1000);
    };
    bool second = true;
    for (const double gap : {2.0, 2.5, 3.0}) {
        std::ostringstream line;
        for (const int k : {2, 3, 4}) {
            std::vector<double> z(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) z[static_cast<std::size_t>(i)] = gap * (i - 0.5 * (k - 1));
            const double ratio = E0(soliton_frame(grid, 3.0, 1, z), quad) / (k * level);
            second = second && std::abs(ratio - 1.0) <= 0.05;
            char buf[80];
            std::snprintf(buf, sizeof buf, "  k=%d %.4f (direct %.4f)", k, ratio, exact(z) / (k * level));
            line << buf;
        }
        o.note("gap %.1f: E0/(k E0(kappa0))%s", gap, line.str().c_str());
    }
    o.pass = first && second;
    return o;
}

// ---------------------------------------------------------------- suites 9 to 12

Outcome ac9()
{
    Outcome o;
    o.pass = true;
    for (const double p : {2.0, 3.0}) {
        for (const int k : {2, 3}) {
            const double e = (k - 1.0) * (p - 1.0) / 2.0;
            BlowupGraph g;
            const double r0 = 0.2, T0 = 1.5;
            auto add = [&](double r) {
                const double x = std::abs(r - r0);
                g.r_samples.push_back(r);
                g.T_estimates.push_back(x == 0.0 ? T0 : T0 - x + x / std::pow(std::abs(std::log(x)), e));
                g.fit_quality.push_back(1.0);
                g.classification.push_back(PointClass::Unknown);
            };
            const int n = 300;
            for (int i = n - 1; i >= 0; --i) add(r0 - 1e-4 * std::pow(1e3, i / (n - 1.0)));
            add(r0);
            for (int i = 0; i < n; ++i) add(r0 + 1e-4 * std::pow(1e3, i / (n - 1.0)));
            for (const Side s : {Side::Left, Side::Right}) {
                const auto fit = corner_fit(g, r0, p, k, s);
                const bool ok = std::abs(fit.exponent_fit - e) <= 0.05 * e && fit.decades >= 3.0 - 1e-9;
                o.pass = o.pass && ok;
                o.note("p=%.0f k=%d %-5s exponent %.6f (theory %.1f) over %.2f decades", p, k, to_string(s).c_str(),
                       fit.exponent_fit, fit.exponent_theory, fit.decades);
            }
        }
    }
    return o;
}

Outcome ac10()
{
    Outcome o;
    auto max_ratio = [](std::size_t n) {
        const auto g = YGrid::clustered(n);
        const WeightedQuadrature q(g, 3.0);
        CounterRng rng(1010);
        double worst = 0.0;
        for (int k = 0; k < 500; ++k) {
            std::array<double, 8> c{};
            for (auto &x : c) x = rng.normal();
            std::vector<double> h(n, 0.0), hp(n, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                const double y = g.y[j];
                for (std::size_t m = 0; m < c.size(); ++m) {
                    const double a = 0.5 * std::numbers::pi * static_cast<double>(m);
                    h[j] += c[m] * std::cos(a * y);
                    hp[j] -= c[m] * a * std::sin(a * y);
                }
            }
            const auto r = check_hardy_sobolev(h, hp, q);
            if (r.defined) worst = std::max(worst, r.ratio);
        }
        return worst;
    };
    const double a = max_ratio(801), b = max_ratio(1601);
    const double change = std::abs(a - b) / b;
    o.pass = std::isfinite(a) && std::isfinite(b) && change < 0.05;
    o.note("max ratio over 500 functions: n=801 %.6f, n=1601 %.6f, change %.2e", a, b, change);
    return o;
}

Outcome ac11()
{
    Outcome o;
    o.pass = true;
    auto fitted_C = [](const EquationSpec &spec, double lambda, std::size_t n) {
        const auto g = RadialGrid::make(-1.5, 1.5, n, 1);
        EvolveControls c;
        c.t_end = 0.9;
        c.monitor_boundary = false;
        const auto tr = evolve(spec.rescaled(lambda), initial_data::gaussian(g, 0.5, 0.0, 0.3), g, c);
        return verify_energy_lemma(tr, lambda, spec, 0.9);
    };
    const std::vector<std::pair<const char *, std::pair<EquationSpec, double>>> runs{
        {"pure power p=3, lambda=1", {pure_power(3.0, 1), 1.0}},
        {"Klein-Gordon p=3, lambda=0.1", {klein_gordon(3.0, 1), 0.1}},
    };
    for (const auto &[label, sl] : runs) {
        const auto a = fitted_C(sl.first, sl.second, 301);
        const auto b = fitted_C(sl.first, sl.second, 601);
        const double change = std::abs(a.C_fit - b.C_fit) / b.C_fit;
        const bool ok = std::isfinite(b.C_fit) && b.C_fit > 0.0 && change <= 0.10 && a.violations.empty()
                        && b.violations.empty();
        o.pass = o.pass && ok;
        o.note("%-30s C(n=301) %.6f  C(n=601) %.6f  change %.2e", label, a.C_fit, b.C_fit, change);
    }
    return o;
}

Outcome ac12()
{
    Outcome o;
    auto run = [](std::size_t n) {
        const auto g = RadialGrid::make(-10.0, 10.0, n, 1);
        EvolveControls c;
        c.t_end = 2.0;
        c.adaptive_dt = false;
        c.monitor_boundary = false;
        return evolve(klein_gordon(3.0, 1), initial_data::gaussian(g, 1e-3, 0.0, 1.0), g, c);
    };
    const auto ref = run(3201);
    auto error = [&](std::size_t n) {
        const auto tr = run(n);
        const std::size_t stride = (ref.grid.n_points - 1) / (n - 1);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(tr.u.back()[i] - ref.u.back()[i * stride]));
        return e;
    };
    const double e1 = error(201), e2 = error(401), e3 = error(801);
    const double q1 = e1 / e2, q2 = e2 / e3;
    o.pass = q1 >= 3.5 && q1 <= 4.5 && q2 >= 3.5 && q2 <= 4.5;
    o.note("max errors %.3e %.3e %.3e at n=201/401/801; ratios %.3f %.3f", e1, e2, e3, q1, q2);
    return o;
}

// ---------------------------------------------------------------- suite 13

Outcome ac13()
{
    Outcome o;
    o.pass = true;
    for (const auto &[e, name] : experiment_names()) {
        const auto path = g_config_dir / (name + ".json");
        try {
            auto j = read_json(path);
            j["output_dir"] = (g_work_dir / name).string();
            fs::remove_all(g_work_dir / name);
            (void)run_experiment(j);
            const auto rep = replay(g_work_dir / name / "manifest.json");
            o.note("%-10s replay identical, %zu CSV files compared", name.c_str(), rep.files_compared);
            o.pass = o.pass && rep.files_compared > 0;
        } catch (const std::exception &ex) {
            o.pass = false;
            o.note("%-10s %s", name.c_str(), ex.what());
        }
    }
    return o;
}

} // namespace

int main(int argc, char **argv)
{
    if (argc > 1) g_config_dir = argv[1];
    if (argc > 2) g_work_dir = argv[2];

    const std::vector<Check> criteria{
        {"AC1", "Lyapunov monotonicity of H along evolve_w runs", false, ac1},
        {"AC2", "blow-up criterion H >= -1e-3 after the window start", false, ac2},
        {"AC3", "soliton stationarity over ds = 5", false, ac3},
        {"AC4", "constant data converges to kappa0 and blows up at the ODE rate", false, ac4},
        {"AC5", "explicit center solution residual and barycenter", false, ac5},
        {"AC6", "center system barycenter conservation and convergence", false, ac6},
        {"AC7", "k-soliton decomposition identifiability and energy count", true, ac7},
        {"AC8", "soliton energy levels", true, ac8},
        {"AC9", "corner exponent fit on synthetic graphs", false, ac9},
        {"AC10", "Hardy-Sobolev ratio bounded and grid independent", false, ac10},
        {"AC11", "local energy bound constant stable under refinement", false, ac11},
        {"AC12", "second-order convergence of the radial solver", false, ac12},
        {"AC13", "replay determinism for every experiment type", false, ac13},
    };

    int unexpected = 0, passed = 0;
    const auto t_all = std::chrono::steady_clock::now();
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception &e) {
            o.pass = false;
            o.details.emplace_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        passed += o.pass;
        std::string tag;
        if (!o.pass && c.known_failure) tag = "  [known failure, see README]";
        if (o.pass && c.known_failure) tag = "  [known failure now passes]";
        if (!o.pass && !c.known_failure) ++unexpected;
        std::printf("%-4s %s  %s (%.1fs)%s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, secs, tag.c_str());
        for (const auto &d : o.details) std::printf("       %s\n", d.c_str());
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_all).count();
    std::printf("%d/%zu criteria pass, %d unexpected failures, %.1fs total\n", passed, criteria.size(), unexpected,
                total);
    return unexpected == 0 ? 0 : 1;
}
