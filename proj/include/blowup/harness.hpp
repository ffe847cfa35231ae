#ifndef BLOWUP_HARNESS_HPP
#define BLOWUP_HARNESS_HPP

// Canned experiment pipelines driven by a JSON config, with a manifest that
// allows a later byte-for-byte replay.
//
// A config looks like
//
//   { "experiment": "simulate", "seed": 7, "output_dir": "runs/sim",
//     "equation": {"preset": "pure_power", "p": 3, "N": 1},
//     "grid": {"r_min": -10, "r_max": 10, "n": 401},
//     "initial": {"kind": "constant", "A": 1},
//     "controls": {"cfl": 0.5} }
//
// with an experiment-specific block ("similarity", "diagnose", "decompose",
// "centers", "geometry", "energy") for the other pipelines. See configs/.

#include <blowup/error.hpp>
#include <blowup/functionals.hpp>
#include <blowup/geometry.hpp>
#include <blowup/io.hpp>
#include <blowup/local_energy.hpp>
#include <blowup/model.hpp>
#include <blowup/radial_solver.hpp>
#include <blowup/rng.hpp>
#include <blowup/similarity.hpp>
#include <blowup/soliton_ode.hpp>
#include <blowup/solitons.hpp>

#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace blowup
{

inline constexpr const char *lab_version = "0.1.0";
inline constexpr const char *output_root_env = "BLOWUP_LAB_OUT";

enum class Experiment { Simulate, Similarity, Diagnose, Decompose, Centers, Geometry, Energy };

inline const std::vector<std::pair<Experiment, std::string>> &experiment_names()
{
    static const std::vector<std::pair<Experiment, std::string>> names{
        {Experiment::Simulate, "simulate"}, {Experiment::Similarity, "similarity"},
        {Experiment::Diagnose, "diagnose"}, {Experiment::Decompose, "decompose"},
        {Experiment::Centers, "centers"},   {Experiment::Geometry, "geometry"},
        {Experiment::Energy, "energy"}};
    return names;
}

inline std::string to_string(Experiment e)
{
    for (const auto &[k, v] : experiment_names()) {
        if (k == e) return v;
    }
    return "?";
}

inline Experiment experiment_from_string(const std::string &s)
{
    for (const auto &[k, v] : experiment_names()) {
        if (v == s) return k;
    }
    fail(ErrorCode::InvalidParameter, "unknown experiment '" + s + "'");
}

struct ExperimentConfig {
    Experiment experiment = Experiment::Simulate;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    nlohmann::json raw; ///< full config, including the experiment-specific blocks

    [[nodiscard]] const nlohmann::json &block(const std::string &name) const
    {
        static const nlohmann::json empty = nlohmann::json::object();
        const auto it = raw.find(name);
        return it == raw.end() ? empty : *it;
    }
};

/// Command-line style overrides of config keys.
struct ConfigOverrides {
    std::optional<double> p;
    std::optional<int> grid_n;
    std::optional<double> cfl;
    std::optional<double> cutoff;
    std::optional<double> mu;
    std::optional<double> c1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

inline void apply_overrides(nlohmann::json &j, const ConfigOverrides &o)
{
    if (o.p) j["equation"]["p"] = *o.p;
    if (o.grid_n) j["grid"]["n"] = *o.grid_n;
    if (o.cfl) j["controls"]["cfl"] = *o.cfl;
    if (o.cutoff) j["cutoff"] = *o.cutoff;
    if (o.mu) j["mu"] = *o.mu;
    if (o.c1) j["centers"]["c1"] = *o.c1;
    if (o.seed) j["seed"] = *o.seed;
    if (o.out) j["output_dir"] = *o.out;
}

namespace detail
{

inline double positive(const nlohmann::json &b, const char *key, double def)
{
    const double v = b.value(key, def);
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidParameter,
            std::string("config value '") + key + "' must be positive");
    return v;
}

inline std::size_t count(const nlohmann::json &b, const char *key, std::size_t def)
{
    const auto v = b.value(key, static_cast<long long>(def));
    require(v > 0, ErrorCode::InvalidParameter, std::string("config value '") + key + "' must be positive");
    return static_cast<std::size_t>(v);
}

} // namespace detail

/// Validates the structure; models are checked again when the pipeline builds them.
[[nodiscard]] inline ExperimentConfig parse_config(const nlohmann::json &j)
{
    require(j.is_object(), ErrorCode::ParseError, "config must be a JSON object");
    require(j.contains("experiment"), ErrorCode::InvalidParameter, "config lacks 'experiment'");
    ExperimentConfig c;
    c.raw = j;
    c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    c.seed = j.value("seed", std::uint64_t{0});
    c.output_dir = j.value("output_dir", std::string{});
    const bool needs_equation = c.experiment != Experiment::Decompose && c.experiment != Experiment::Centers;
    if (needs_equation) {
        require(j.contains("equation"), ErrorCode::InvalidParameter,
                "experiment '" + to_string(c.experiment) + "' needs an 'equation' block");
        (void)equation_from_json(j.at("equation"));
    }
    const bool needs_pde = c.experiment == Experiment::Simulate || c.experiment == Experiment::Similarity
                           || c.experiment == Experiment::Geometry;
    if (needs_pde) {
        require(j.contains("grid") && j.contains("initial"), ErrorCode::InvalidParameter,
                "experiment '" + to_string(c.experiment) + "' needs 'grid' and 'initial' blocks");
    }
    if (c.experiment == Experiment::Centers) {
        require(j.contains("centers"), ErrorCode::InvalidParameter, "experiment 'centers' needs a 'centers' block");
    }
    for (const char *key : {"cutoff", "mu_margin", "tolerance"}) {
        if (j.contains(key)) (void)detail::positive(j, key, 1.0);
    }
    if (j.contains("controls")) {
        (void)detail::positive(j["controls"], "cfl", 0.5);
        (void)detail::positive(j["controls"], "blowup_threshold", 1e8);
    }
    if (j.contains("mu")) {
        require(j["mu"].get<double>() >= 0.0, ErrorCode::InvalidParameter, "mu must be non-negative");
    }
    return c;
}

[[nodiscard]] inline std::filesystem::path resolve_output_dir(const ExperimentConfig &c)
{
    if (!c.output_dir.empty()) return c.output_dir;
    const char *root = std::getenv(output_root_env);
    const std::filesystem::path base = root && *root ? root : "blowup_runs";
    return base / to_string(c.experiment);
}

struct ArtifactManifest {
    std::filesystem::path directory;
    nlohmann::json json;
    std::vector<std::string> outputs;
};

namespace detail
{

template <class Fn>
auto stage(const char *name, Fn &&fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const Error &e) {
        throw Error(e.code(), std::string("stage '") + name + "': " + e.what());
    }
}

inline RadialGrid grid_from(const nlohmann::json &g, int N)
{
    const double r_min = g.value("r_min", N >= 2 ? 0.05 : -10.0);
    const double r_max = g.value("r_max", 10.0);
    return RadialGrid::make(r_min, r_max, count(g, "n", 401), N);
}

inline InitialData initial_from(const nlohmann::json &b, const RadialGrid &grid)
{
    const std::string kind = b.value("kind", std::string("constant"));
    if (kind == "constant") return initial_data::constant(grid, b.value("A", 1.0), b.value("B", 0.0));
    if (kind == "gaussian") {
        return initial_data::gaussian(grid, b.value("A", 1.0), b.value("center", 0.0), b.value("width", 1.0));
    }
    if (kind == "bumped_plateau") {
        return initial_data::bumped_plateau(grid, b.value("A", 1.0), b.value("bump", 0.2), b.value("center", 0.0),
                                            b.value("width", 1.0));
    }
    if (kind == "signed_plateaus") {
        return initial_data::signed_plateaus(grid, b.value("A", 1.0), b.value("center", 0.0), b.value("width", 1.0));
    }
    fail(ErrorCode::InvalidParameter, "unknown initial data kind '" + kind + "'");
}

inline EvolveControls controls_from(const nlohmann::json &b)
{
    EvolveControls c;
    c.cfl = b.value("cfl", c.cfl);
    c.blowup_threshold = b.value("blowup_threshold", c.blowup_threshold);
    c.max_steps = b.value("max_steps", c.max_steps);
    c.t_end = b.value("t_end", c.t_end);
    c.adaptive_dt = b.value("adaptive_dt", c.adaptive_dt);
    c.save_every = b.value("save_every", c.save_every);
    c.monitor_boundary = b.value("monitor_boundary", c.monitor_boundary);
    return c;
}

struct RunContext {
    const ExperimentConfig &cfg;
    std::filesystem::path dir;
    std::vector<std::string> outputs;
    nlohmann::json summary = nlohmann::json::object();

    std::filesystem::path file(const std::string &name)
    {
        outputs.push_back(name);
        return dir / name;
    }
};

struct SimulationResult {
    EquationSpec spec;
    RadialGrid grid;
    EvolveControls controls;
    RadialTrajectory traj;
};

inline SimulationResult simulate(const ExperimentConfig &cfg)
{
    SimulationResult r;
    r.spec = stage("model", [&] { return equation_from_json(cfg.raw.at("equation")); });
    r.grid = stage("grid", [&] { return grid_from(cfg.block("grid"), r.spec.N()); });
    r.controls = controls_from(cfg.block("controls"));
    const auto data = stage("initial data", [&] { return initial_from(cfg.block("initial"), r.grid); });
    r.traj = stage("evolve", [&] { return evolve(r.spec, data, r.grid, r.controls); });
    return r;
}

inline std::size_t nearest_index(const RadialGrid &g, double r)
{
    const double x = std::round((r - g.r_min) / g.dr);
    return static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(g.n_points - 1)));
}

inline void run_simulate(RunContext &ctx)
{
    const auto sim = simulate(ctx.cfg);
    const auto &ex = ctx.cfg.block("export");
    write_trajectory_csv(ctx.file("trajectory.csv"), sim.traj, count(ex, "t_stride", 10), count(ex, "r_stride", 10));
    auto meta = trajectory_metadata(sim.traj, sim.controls);
    meta["equation"] = to_json(sim.spec);
    write_json(ctx.file("trajectory.json"), meta);
    ctx.summary["status"] = to_string(sim.traj.status);
    if (sim.traj.status == RunStatus::BlowupDetected) {
        const auto graph = stage("blowup graph", [&] { return blowup_graph(sim.traj); });
        write_graph_csv(ctx.file("blowup_graph.csv"), graph);
        const auto mid = nearest_index(sim.grid, 0.5 * (sim.grid.r_min + sim.grid.r_max));
        ctx.summary["T_mid"] = graph.T_estimates[mid];
    }
}

// Frames of w around r0 over an s grid ending just before the last stored time.
inline WTrajectory similarity_frames(const SimulationResult &sim, const nlohmann::json &b, double cutoff,
                                     double &T0, double &fit_q, double r0)
{
    const auto idx = nearest_index(sim.grid, r0);
    const auto est = stage("blow-up time", [&] { return estimate_blowup_time(sim.traj, idx); });
    T0 = est.T;
    fit_q = est.fit_quality;
    const double s_lo = min_s_start(sim.spec, sim.grid.r(idx), T0) + b.value("s_offset", 0.0);
    const double s_hi_avail = -std::log(T0 - sim.traj.times.back());
    const double s_hi = std::min(s_lo + b.value("s_span", 6.0), s_hi_avail - b.value("s_margin", 0.5));
    require(s_hi > s_lo, ErrorCode::InsufficientRange, "trajectory ends before the requested s window");
    const double ds = positive(b, "ds", 0.25);
    std::vector<double> s_values;
    for (double s = s_lo; s <= s_hi + 1e-12; s += ds) s_values.push_back(s);
    auto grid = std::make_shared<const YGrid>(YGrid::clustered(count(b, "n_y", 401), cutoff));
    auto w = stage("similarity transform",
                   [&] { return to_similarity(sim.traj, sim.spec, sim.grid.r(idx), T0, s_values, grid); });
    w.T0_fit_quality = fit_q;
    w.s_window_start = s_lo;
    return w;
}

inline void run_similarity(RunContext &ctx)
{
    const auto sim = simulate(ctx.cfg);
    require(sim.traj.status == RunStatus::BlowupDetected, ErrorCode::PreconditionFailed,
            "similarity pipeline needs a blow-up run");
    const auto &b = ctx.cfg.block("similarity");
    const double cutoff = ctx.cfg.raw.value("cutoff", default_cutoff);
    const double r0 = b.value("r0", 0.5 * (sim.grid.r_min + sim.grid.r_max));
    double T0 = 0, q = 0;
    const auto w = similarity_frames(sim, b, cutoff, T0, q, r0);
    write_frames_csv(ctx.file("frames.csv"), w);
    const WeightedQuadrature quad(*w.grid, sim.spec.p());
    CsvWriter fits(ctx.file("fits.csv"), {"s", "d", "theta", "residual", "E0"});
    for (const auto &f : w.frames) {
        const auto fit = fit_single(f, quad);
        fits.row({f.s, fit.params.d, static_cast<double>(fit.params.theta), fit.residual_hnorm, E0(f, quad)});
    }
    nlohmann::json meta{{"r0", w.r0}, {"T0", T0}, {"T0_fit_quality", q}, {"s_window_start", w.s_window_start},
                        {"frames", w.size()}, {"cutoff", cutoff}};
    write_json(ctx.file("similarity.json"), meta);
    ctx.summary = meta;
}

inline void run_diagnose(RunContext &ctx)
{
    const auto spec = stage("model", [&] { return equation_from_json(ctx.cfg.raw.at("equation")); });
    const auto &b = ctx.cfg.block("diagnose");
    const double cutoff = ctx.cfg.raw.value("cutoff", default_cutoff);
    const double p = spec.p();
    const double r0 = b.value("r0", spec.N() >= 2 ? 1.0 : 0.0);
    const double T0 = positive(b, "T0", 1.0);
    const double s0 = b.value("s_start", min_s_start(spec, r0, T0));
    const double span = positive(b, "s_span", 5.0);
    auto grid = std::make_shared<const YGrid>(YGrid::uniform_with_spacing(positive(b, "dy", 1.0 / 400.0), cutoff));
    const double d = b.value("d", 0.0);
    const double eps = b.value("perturbation", 0.05);
    const std::string shape = b.value("shape", std::string("soliton"));
    std::vector<double> w0(grid->size()), ws0(grid->size(), 0.0);
    CounterRng rng(ctx.cfg.seed);
    const double c1 = rng.uniform(-1.0, 1.0), c2 = rng.uniform(-1.0, 1.0);
    for (std::size_t j = 0; j < grid->size(); ++j) {
        const double y = grid->y[j];
        if (shape == "soliton") {
            w0[j] = kappa(p, d, y) * (1.0 - eps);
        } else if (shape == "generic") {
            w0[j] = kappa0(p) * (1.0 - eps * (1.0 + 0.5 * c1 * std::cos(std::numbers::pi * y) + 0.5 * c2 * y * y));
        } else {
            fail(ErrorCode::InvalidParameter, "unknown diagnose shape '" + shape + "'");
        }
    }
    WControls wc;
    wc.frame_ds = positive(b, "frame_ds", 0.05);
    const auto traj = stage("evolve_w", [&] { return evolve_w(spec, r0, T0, w0, ws0, {s0, s0 + span}, grid, wc); });
    std::optional<double> mu;
    if (ctx.cfg.raw.contains("mu")) mu = ctx.cfg.raw["mu"].get<double>();
    const auto rep = stage("monotonicity", [&] { return monotonicity_report(traj, mu); });
    write_readouts_csv(ctx.file("readouts.csv"), rep.readouts);
    auto j = to_json(rep);
    std::size_t negative = 0;
    for (const auto &r : rep.readouts) negative += blowup_criterion(r) == Criterion::ViolatesCriterion;
    j["criterion_violations"] = negative;
    j["s_window_start"] = traj.s_window_start;
    write_json(ctx.file("monotonicity.json"), j);
    ctx.summary = j;
}

inline void run_decompose(RunContext &ctx)
{
    const auto &b = ctx.cfg.block("decompose");
    const double p = b.value("p", ctx.cfg.raw.contains("equation") ? ctx.cfg.raw["equation"].value("p", 3.0) : 3.0);
    const int k_max = static_cast<int>(count(b, "k_max", 4));
    const std::size_t frames = count(b, "count", 10);
    const double gap_lo = positive(b, "gap_min", 1.5), gap_hi = positive(b, "gap_max", 2.0);
    const double cutoff = ctx.cfg.raw.value("cutoff", default_cutoff);
    auto grid = std::make_shared<const YGrid>(YGrid::clustered(count(b, "n_y", 801), cutoff));
    const WeightedQuadrature quad(*grid, p);
    CounterRng rng(ctx.cfg.seed);
    CsvWriter csv(ctx.file("decompositions.csv"),
                  {"index", "k_true", "k_fit", "k_energy", "theta1", "center_error", "residual", "converged"});
    nlohmann::json all = nlohmann::json::array();
    std::size_t correct = 0, energy_agree = 0;
    for (std::size_t m = 0; m < frames; ++m) {
        const int k = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k_max));
        const int theta = rng.uniform() < 0.5 ? 1 : -1;
        std::vector<double> z(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 1; i < z.size(); ++i) z[i] = z[i - 1] + rng.uniform(gap_lo, gap_hi);
        const double shift = barycenter(z) - rng.uniform(-0.25, 0.25);
        for (auto &x : z) x -= shift;
        const auto frame = soliton_frame(grid, p, theta, z);
        const auto dec = stage("decompose", [&] { return decompose(frame, quad, k_max); });
        double err = std::numeric_limits<double>::infinity();
        if (dec.k == k && dec.theta1 == theta) {
            err = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) err = std::max(err, std::abs(dec.zetas[i] - z[i]));
        }
        correct += dec.k == k && err < 1e-2;
        energy_agree += dec.k_energy == k;
        csv.row({static_cast<double>(m), static_cast<double>(k), static_cast<double>(dec.k),
                 static_cast<double>(dec.k_energy), static_cast<double>(dec.theta1), err, dec.residual_hnorm,
                 dec.converged ? 1.0 : 0.0});
        auto jd = to_json(dec);
        jd["k_true"] = k;
        jd["zetas_true"] = z;
        all.push_back(jd);
    }
    nlohmann::json j{{"frames", frames}, {"recovered", correct}, {"energy_agree", energy_agree}, {"decompositions", all}};
    write_json(ctx.file("decompositions.json"), j);
    ctx.summary = {{"frames", frames}, {"recovered", correct}, {"energy_agree", energy_agree}};
}

inline void run_centers(RunContext &ctx)
{
    const auto &b = ctx.cfg.block("centers");
    const double p = b.value("p", 3.0);
    const int k = static_cast<int>(count(b, "k", 3));
    const double c1 = positive(b, "c1", 1.0);
    const double s0 = positive(b, "s0", 10.0);
    const double s1 = positive(b, "s_end", 1e4);
    const std::size_t runs = count(b, "count", 3);
    const double amp = b.value("perturbation", 0.5);
    const double fc = b.value("forcing_c", 0.0);
    const double fexp = b.value("forcing_exponent", 1.5);
    require(fexp > 1.0, ErrorCode::InvalidParameter, "forcing exponent must exceed 1");
    const auto sys = make_center_system(p, k, c1);
    CenterForcing forcing;
    if (fc != 0.0) {
        forcing = [fc, fexp](std::size_t i, double s) { return fc * (i % 2 == 0 ? 1.0 : -0.5) / std::pow(s, fexp); };
    }
    CounterRng rng(ctx.cfg.seed);
    nlohmann::json reps = nlohmann::json::array();
    for (std::size_t m = 0; m < runs; ++m) {
        auto z = zeta_bar(sys, s0);
        std::vector<double> dz(z.size());
        for (auto &x : dz) x = rng.uniform(-amp, amp);
        const double mean = barycenter(dz);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += dz[i] - mean;
        const auto tr = stage("integrate", [&] { return integrate_system(sys, z, s0, s1, forcing); });
        write_centers_csv(ctx.file("centers_" + std::to_string(m) + ".csv"), tr);
        const auto zb = zeta_bar(sys, tr.s.back());
        std::vector<double> dev(zb.size());
        for (std::size_t i = 0; i < zb.size(); ++i) dev[i] = tr.zetas.back()[i] - zb[i];
        const double z0 = barycenter(dev);
        double spread = 0.0, drift = 0.0;
        for (const double x : dev) spread = std::max(spread, std::abs(x - z0));
        for (const double bc : tr.barycenters) drift = std::max(drift, std::abs(bc - tr.barycenters.front()));
        reps.push_back({{"run", m}, {"zeta0", z0}, {"max_deviation", spread}, {"barycenter_drift", drift}});
    }
    nlohmann::json j{{"p", p}, {"k", k}, {"c1", c1}, {"alpha_bar", sys.alpha_bar}, {"runs", reps}};
    write_json(ctx.file("centers.json"), j);
    ctx.summary = j;
}

inline PointClass to_point_class(PointType t)
{
    switch (t) {
    case PointType::NonCharacteristic: return PointClass::NonCharacteristic;
    case PointType::CharacteristicCandidate: return PointClass::Characteristic;
    case PointType::Unknown: return PointClass::Unknown;
    }
    return PointClass::Unknown;
}

inline void run_geometry(RunContext &ctx)
{
    auto sim = simulate(ctx.cfg);
    require(sim.traj.status == RunStatus::BlowupDetected, ErrorCode::PreconditionFailed,
            "geometry pipeline needs a blow-up run");
    const auto &b = ctx.cfg.block("geometry");
    const double cutoff = ctx.cfg.raw.value("cutoff", default_cutoff);
    auto graph = stage("blowup graph", [&] { return blowup_graph(sim.traj); });
    std::vector<double> points;
    if (b.contains("r_points")) {
        points = b["r_points"].get<std::vector<double>>();
    } else {
        const double a = sim.grid.r_min, c = sim.grid.r_max;
        for (int i = 1; i <= 3; ++i) points.push_back(a + (c - a) * (0.25 * i));
    }
    const double p = sim.spec.p();
    nlohmann::json pts = nlohmann::json::array();
    for (const double r0 : points) {
        nlohmann::json jp{{"r0", r0}};
        double T0 = 0, q = 0;
        PointType cls = PointType::Unknown;
        try {
            const auto w = similarity_frames(sim, b, cutoff, T0, q, r0);
            const WeightedQuadrature quad(*w.grid, p);
            std::vector<double> series;
            for (const auto &f : w.frames) series.push_back(E0(f, quad));
            cls = classify_point(series, p);
            jp["E0_final"] = series.back();
        } catch (const Error &e) {
            jp["transform_error"] = e.what();
        }
        const auto idx = nearest_index(sim.grid, r0);
        graph.classification[idx] = to_point_class(cls);
        jp["class"] = to_string(cls);
        const auto hint = sign_rule(sim.traj, sim.grid.r_min, sim.grid.r_max, 0.0);
        jp["sign_hint"] = hint.non_characteristic_by_sign;
        jp["conflict"] = classification_conflict(hint, cls);
        try {
            const auto cf = corner_fit(graph, graph.r_samples[idx], p, 2, Side::Right);
            jp["corner"] = {{"amplitude", cf.amplitude}, {"exponent_fit", cf.exponent_fit},
                            {"exponent_theory", cf.exponent_theory}, {"degenerate", cf.degenerate}};
        } catch (const Error &e) {
            jp["corner"] = {{"error", std::string(to_string(e.code()))}};
        }
        if (std::isfinite(graph.T_estimates[idx])) {
            const auto sc = speed_bound_check(sim.traj, graph.r_samples[idx], graph.T_estimates[idx], p, 1);
            jp["speed"] = {{"C4_fit", sc.C4_fit}, {"limit_ratio", sc.limit_ratio}, {"band_width", sc.band_width}};
        }
        pts.push_back(jp);
    }
    write_graph_csv(ctx.file("blowup_graph.csv"), graph);
    nlohmann::json j{{"points", pts}};
    write_json(ctx.file("geometry.json"), j);
    ctx.summary = j;
}

inline void run_energy(RunContext &ctx)
{
    const auto spec = stage("model", [&] { return equation_from_json(ctx.cfg.raw.at("equation")); });
    const auto &b = ctx.cfg.block("energy");
    const double lambda = positive(b, "lambda", 1.0);
    require(lambda <= 1.0, ErrorCode::InvalidParameter, "lambda must lie in (0,1]");
    const auto scaled = spec.rescaled(lambda);
    const int N = spec.N();
    const auto grid = RadialGrid::make(N >= 2 ? b.value("r_min", 0.01) : -b.value("r_max", 1.5), b.value("r_max", 1.5),
                                       count(b, "n", 301), N);
    const auto data = initial_data::gaussian(grid, b.value("A", 0.5), b.value("center", 0.0), b.value("width", 0.3));
    EvolveControls c;
    c.cfl = b.value("cfl", 0.5);
    c.t_end = b.value("t_max", 0.9);
    c.monitor_boundary = false; // reflections cannot reach |x| < 1 - t before t = 1
    const auto traj = stage("evolve", [&] { return evolve(scaled, data, grid, c); });
    const auto rep = stage("energy lemma", [&] { return verify_energy_lemma(traj, lambda, spec, c.t_end); });
    write_energy_csv(ctx.file("energy.csv"), rep);
    nlohmann::json j{{"lambda", lambda},
                     {"C_fit", rep.C_fit},
                     {"additive", rep.additive},
                     {"violations", rep.violations},
                     {"max_excess_after_fit", rep.max_excess_after_fit},
                     {"status", to_string(traj.status)}};
    write_json(ctx.file("lemma.json"), j);
    ctx.summary = j;
}

} // namespace detail

[[nodiscard]] inline std::string config_hash(const nlohmann::json &raw)
{
    return hex64(fnv1a(raw.dump()));
}

/// Runs the configured pipeline and writes artifacts, config.json and manifest.json.
inline ArtifactManifest run_experiment(const ExperimentConfig &cfg)
{
    const auto dir = resolve_output_dir(cfg);
    std::filesystem::create_directories(dir);
    detail::RunContext ctx{cfg, dir, {}, nlohmann::json::object()};
    write_json(ctx.file("config.json"), cfg.raw);
    switch (cfg.experiment) {
    case Experiment::Simulate: detail::run_simulate(ctx); break;
    case Experiment::Similarity: detail::run_similarity(ctx); break;
    case Experiment::Diagnose: detail::run_diagnose(ctx); break;
    case Experiment::Decompose: detail::run_decompose(ctx); break;
    case Experiment::Centers: detail::run_centers(ctx); break;
    case Experiment::Geometry: detail::run_geometry(ctx); break;
    case Experiment::Energy: detail::run_energy(ctx); break;
    }
    nlohmann::json outs = nlohmann::json::array();
    for (const auto &name : ctx.outputs) {
        const auto data = read_file(dir / name);
        outs.push_back({{"file", name}, {"bytes", data.size()}, {"fnv1a", hex64(fnv1a(data))}});
    }
    ArtifactManifest m;
    m.directory = dir;
    m.outputs = ctx.outputs;
    m.json = {{"experiment", to_string(cfg.experiment)},
              {"seed", cfg.seed},
              {"rng", "splitmix64 counter stream"},
              {"config_hash", config_hash(cfg.raw)},
              {"versions", {{"blowup_lab", lab_version}, {"boost", BOOST_LIB_VERSION}, {"compiler", __VERSION__}}},
              {"outputs", outs},
              {"summary", ctx.summary}};
    write_json(dir / "manifest.json", m.json);
    return m;
}

inline ArtifactManifest run_experiment(const nlohmann::json &config)
{
    return run_experiment(parse_config(config));
}

struct ReplayReport {
    std::size_t files_compared = 0;
    std::filesystem::path replay_dir;
};

/// Re-runs the experiment recorded next to `manifest_path` into a sibling
/// directory and byte-compares every CSV artifact.
inline ReplayReport replay(const std::filesystem::path &manifest_path)
{
    require(std::filesystem::exists(manifest_path), ErrorCode::MissingInput,
            "manifest not found: " + manifest_path.string());
    const auto manifest = read_json(manifest_path);
    const auto dir = manifest_path.parent_path();
    require(manifest.contains("outputs"), ErrorCode::MissingInput, "manifest lists no outputs");
    for (const auto &o : manifest["outputs"]) {
        const auto path = dir / o["file"].get<std::string>();
        require(std::filesystem::exists(path), ErrorCode::MissingInput, "artifact missing: " + path.string());
    }
    auto raw = read_json(dir / "config.json");
    if (config_hash(raw) != manifest.value("config_hash", std::string{})) {
        fail(ErrorCode::Mismatch, "config.json no longer matches the manifest hash");
    }
    ReplayReport rep;
    rep.replay_dir = dir / "replay";
    raw["output_dir"] = rep.replay_dir.string();
    // Keep the recorded config byte-identical apart from the output location.
    auto cfg = parse_config(raw);
    (void)run_experiment(cfg);
    for (const auto &o : manifest["outputs"]) {
        const auto name = o["file"].get<std::string>();
        if (std::filesystem::path(name).extension() != ".csv") continue;
        const auto a = read_file(dir / name);
        const auto b = read_file(rep.replay_dir / name);
        if (a != b) {
            std::size_t row = 1, i = 0;
            while (i < a.size() && i < b.size() && a[i] == b[i]) {
                if (a[i] == '\n') ++row;
                ++i;
            }
            fail(ErrorCode::Mismatch, name + " differs from the replay at row " + std::to_string(row));
        }
        ++rep.files_compared;
    }
    return rep;
}

} // namespace blowup

#endif
