#ifndef BLOWUP_IO_HPP
#define BLOWUP_IO_HPP

// CSV writing with fixed 17-significant-digit floats, content hashing, and
// the per-module export formats.

#include <blowup/error.hpp>
#include <blowup/functionals.hpp>
#include <blowup/geometry.hpp>
#include <blowup/local_energy.hpp>
#include <blowup/radial_solver.hpp>
#include <blowup/similarity.hpp>
#include <blowup/soliton_ode.hpp>
#include <blowup/solitons.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace blowup
{

[[nodiscard]] inline std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter
{
  public:
    CsvWriter(const std::filesystem::path &path, const std::vector<std::string> &header) : out_(path)
    {
        require(static_cast<bool>(out_), ErrorCode::MissingInput, "cannot open " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

    void row(const std::vector<double> &values)
    {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt17(values[i]);
        out_ << '\n';
    }

    /// Row whose last column is a text field.
    void row(const std::vector<double> &values, const std::string &label)
    {
        for (const double v : values) out_ << fmt17(v) << ',';
        out_ << label << '\n';
    }

  private:
    std::ofstream out_;
};

/// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(const std::string &data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t h)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

[[nodiscard]] inline std::string read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::MissingInput, "missing file " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_json(const std::filesystem::path &path, const nlohmann::json &j)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::MissingInput, "cannot open " + path.string());
    out << j.dump(2) << '\n';
}

[[nodiscard]] inline nlohmann::json read_json(const std::filesystem::path &path)
{
    const auto text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        fail(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

/// Long-format export `t,r,u,ut`, every t_stride-th time and r_stride-th point.
inline void write_trajectory_csv(const std::filesystem::path &path, const RadialTrajectory &traj,
                                 std::size_t t_stride = 1, std::size_t r_stride = 1)
{
    CsvWriter csv(path, {"t", "r", "u", "ut"});
    t_stride = std::max<std::size_t>(t_stride, 1);
    r_stride = std::max<std::size_t>(r_stride, 1);
    for (std::size_t m = 0; m < traj.size(); ++m) {
        if (m % t_stride != 0 && m + 1 != traj.size()) continue;
        for (std::size_t i = 0; i < traj.grid.n_points; i += r_stride) {
            csv.row({traj.times[m], traj.grid.r(i), traj.u[m][i], traj.ut[m][i]});
        }
    }
}

[[nodiscard]] inline nlohmann::json trajectory_metadata(const RadialTrajectory &traj,
                                                        const EvolveControls &c)
{
    return {{"grid", {{"r_min", traj.grid.r_min}, {"r_max", traj.grid.r_max},
                      {"n_points", traj.grid.n_points}, {"dr", traj.grid.dr}}},
            {"controls", {{"cfl", c.cfl}, {"blowup_threshold", c.blowup_threshold},
                          {"max_steps", c.max_steps}, {"adaptive_dt", c.adaptive_dt},
                          {"save_every", c.save_every}}},
            {"status", to_string(traj.status)},
            {"stop_reason", traj.stop_reason},
            {"steps", traj.steps},
            {"stored_times", traj.size()},
            {"final_time", traj.times.empty() ? 0.0 : traj.times.back()},
            {"final_amplitude", traj.amplitude_history.empty() ? 0.0 : traj.amplitude_history.back()}};
}

inline void write_graph_csv(const std::filesystem::path &path, const BlowupGraph &g)
{
    CsvWriter csv(path, {"r", "T", "fit_quality", "class"});
    for (std::size_t i = 0; i < g.size(); ++i) {
        csv.row({g.r_samples[i], g.T_estimates[i], g.fit_quality[i]}, to_string(g.classification[i]));
    }
}

inline void write_frames_csv(const std::filesystem::path &path, const WTrajectory &traj)
{
    CsvWriter csv(path, {"s", "y", "w", "ws", "wy"});
    for (const auto &f : traj.frames) {
        for (std::size_t j = 0; j < f.size(); ++j) csv.row({f.s, f.y()[j], f.w[j], f.ws[j], f.wy[j]});
    }
}

inline void write_readouts_csv(const std::filesystem::path &path, const std::vector<FunctionalReadout> &r)
{
    CsvWriter csv(path, {"s", "E0", "I", "J", "E", "H", "dissipation"});
    for (const auto &x : r) csv.row({x.s, x.E0, x.I, x.J, x.E, x.H, x.dissipation});
}

[[nodiscard]] inline nlohmann::json to_json(const MonotonicityReport &m)
{
    nlohmann::json v = nlohmann::json::array();
    for (const auto &[s, dh] : m.violations) v.push_back({{"s", s}, {"increase", dh}});
    return {{"frames", m.s_values.size()}, {"max_violation", m.max_violation},
            {"tolerance", m.tolerance},    {"violations", v},
            {"C_fit", m.C_fit},            {"mu", m.mu},
            {"mu_calibrated", m.mu_calibrated},
            {"cutoff", m.readouts.empty() ? default_cutoff : m.readouts.front().cutoff}};
}

[[nodiscard]] inline nlohmann::json to_json(const SolitonDecomposition &d)
{
    return {{"k", d.k},
            {"theta1", d.theta1},
            {"zetas", d.zetas},
            {"residual", d.residual_hnorm},
            {"converged", d.converged},
            {"k_energy", d.k_energy}};
}

inline void write_centers_csv(const std::filesystem::path &path, const CenterTrajectory &c)
{
    std::vector<std::string> header{"s"};
    const std::size_t k = c.zetas.empty() ? 0 : c.zetas.front().size();
    for (std::size_t i = 1; i <= k; ++i) header.push_back("zeta_" + std::to_string(i));
    header.push_back("barycenter");
    CsvWriter csv(path, header);
    for (std::size_t m = 0; m < c.s.size(); ++m) {
        std::vector<double> row{c.s[m]};
        row.insert(row.end(), c.zetas[m].begin(), c.zetas[m].end());
        row.push_back(c.barycenters[m]);
        csv.row(row);
    }
}

inline void write_energy_csv(const std::filesystem::path &path, const EnergyLemmaReport &rep)
{
    CsvWriter csv(path, {"t", "E_bar", "boundary_cum", "interior_cum"});
    for (const auto &r : rep.readouts) csv.row({r.t, r.E_bar, r.boundary_flux_integral, r.interior_integral});
}

} // namespace blowup

#endif
