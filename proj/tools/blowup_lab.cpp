// blowup_lab: run, replay and validate experiment configs.
//
//   blowup_lab run config.json [--p 3 --grid-n 801 --out dir ...]
//   blowup_lab simulate config.json          (same as run, experiment forced)
//   blowup_lab replay runs/simulate/manifest.json
//   blowup_lab validate config.json
//
// Output goes to the config's output_dir, else $BLOWUP_LAB_OUT/<experiment>.

#include <blowup/harness.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace blowup;

namespace
{

struct Flags {
    std::string config;
    std::optional<double> p, cfl, cutoff, mu, c1;
    std::optional<int> grid_n;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_override_flags(CLI::App *app, Flags &f)
{
    app->add_option("--p", f.p, "nonlinearity exponent");
    app->add_option("--grid-n", f.grid_n, "number of grid points");
    app->add_option("--cfl", f.cfl, "CFL number");
    app->add_option("--cutoff", f.cutoff, "similarity cutoff epsilon");
    app->add_option("--mu", f.mu, "H-functional weight mu");
    app->add_option("--c1", f.c1, "center-system constant c1");
    app->add_option("--seed", f.seed, "random seed");
    app->add_option("--out", f.out, "output directory");
}

nlohmann::json load(const Flags &f)
{
    auto j = f.config.empty() ? nlohmann::json::object() : read_json(f.config);
    ConfigOverrides o;
    o.p = f.p;
    o.grid_n = f.grid_n;
    o.cfl = f.cfl;
    o.cutoff = f.cutoff;
    o.mu = f.mu;
    o.c1 = f.c1;
    o.seed = f.seed;
    o.out = f.out;
    apply_overrides(j, o);
    return j;
}

int run(nlohmann::json j)
{
    const auto m = run_experiment(parse_config(j));
    std::cout << "wrote " << m.outputs.size() << " artifacts to " << m.directory.string() << '\n';
    std::cout << m.json["summary"].dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"blow-up experiments for semilinear wave equations"};
    app.require_subcommand(1);

    Flags run_flags;
    auto *run_cmd = app.add_subcommand("run", "run the experiment named in a config");
    run_cmd->add_option("config", run_flags.config, "config JSON")->required()->check(CLI::ExistingFile);
    add_override_flags(run_cmd, run_flags);

    std::vector<std::pair<CLI::App *, Experiment>> direct;
    std::vector<Flags> direct_flags(experiment_names().size());
    for (std::size_t i = 0; i < experiment_names().size(); ++i) {
        const auto &[e, name] = experiment_names()[i];
        auto *sub = app.add_subcommand(name, "run the " + name + " pipeline");
        sub->add_option("config", direct_flags[i].config, "config JSON")->check(CLI::ExistingFile);
        add_override_flags(sub, direct_flags[i]);
        direct.emplace_back(sub, e);
    }

    std::string manifest;
    auto *replay_cmd = app.add_subcommand("replay", "re-run from a manifest and byte-compare CSV outputs");
    replay_cmd->add_option("manifest", manifest, "manifest.json of a prior run")->required();

    Flags validate_flags;
    auto *validate_cmd = app.add_subcommand("validate", "check a config without running it");
    validate_cmd->add_option("config", validate_flags.config, "config JSON")->required()->check(CLI::ExistingFile);
    add_override_flags(validate_cmd, validate_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return run(load(run_flags));
        for (std::size_t i = 0; i < direct.size(); ++i) {
            if (!*direct[i].first) continue;
            auto j = load(direct_flags[i]);
            j["experiment"] = to_string(direct[i].second);
            return run(j);
        }
        if (*replay_cmd) {
            const auto rep = replay(manifest);
            std::cout << "replay matches: " << rep.files_compared << " CSV files compared in "
                      << rep.replay_dir.string() << '\n';
            return 0;
        }
        if (*validate_cmd) {
            const auto cfg = parse_config(load(validate_flags));
            std::cout << "ok: " << to_string(cfg.experiment) << ", output " << resolve_output_dir(cfg).string()
                      << '\n';
            return 0;
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::Mismatch ? 3 : 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
