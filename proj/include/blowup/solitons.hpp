#ifndef BLOWUP_SOLITONS_HPP
#define BLOWUP_SOLITONS_HPP

// The stationary family kappa(d, y) and fits of one or several alternating
// solitons to a frame in the weighted norm. Fits are parametrised by
// a = argth d for a single profile and by centres zeta = -argth d for sums.

#include <blowup/error.hpp>
#include <blowup/functionals.hpp>
#include <blowup/similarity.hpp>
#include <blowup/weighted_grid.hpp>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

namespace blowup
{

[[nodiscard]] inline double kappa0(double p)
{
    return std::pow(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0)), 1.0 / (p - 1.0));
}

[[nodiscard]] inline double kappa(double p, double d, double y)
{
    return kappa0(p) * std::pow(1.0 - d * d, 1.0 / (p - 1.0)) / std::pow(1.0 + d * y, 2.0 / (p - 1.0));
}

/// d kappa / dy.
[[nodiscard]] inline double kappa_y(double p, double d, double y)
{
    return -2.0 / (p - 1.0) * kappa(p, d, y) * d / (1.0 + d * y);
}

/// E0 of any member of the family: kappa0^2/(p-1) * B(1/2, 2/(p-1) + 1).
[[nodiscard]] inline double soliton_energy(double p)
{
    const double k0 = kappa0(p);
    return k0 * k0 / (p - 1.0) * boost::math::beta(0.5, 2.0 / (p - 1.0) + 1.0);
}

struct SolitonParams {
    double d = 0.0;
    int theta = 1;
};

struct SingleFit {
    SolitonParams params;
    double residual_hnorm = 0.0;
};

struct SolitonDecomposition {
    int k = 0;
    int theta1 = 1;
    std::vector<double> zetas;
    double residual_hnorm = 0.0;
    bool converged = false;
    double frame_hnorm = 0.0;
    int k_energy = 0; ///< estimate_k_from_energy cross-check
};

/// Sum theta1 sum_i (-1)^{i+1} kappa(-tanh zeta_i, y) and its y-derivative.
struct ProfileSamples {
    std::vector<double> w;
    std::vector<double> wy;
};

[[nodiscard]] inline ProfileSamples soliton_sum(const std::vector<double> &y, double p, int theta1,
                                                const std::vector<double> &zetas)
{
    ProfileSamples out{std::vector<double>(y.size(), 0.0), std::vector<double>(y.size(), 0.0)};
    double sign = theta1;
    for (const double z : zetas) {
        const double d = -std::tanh(z);
        for (std::size_t j = 0; j < y.size(); ++j) {
            out.w[j] += sign * kappa(p, d, y[j]);
            out.wy[j] += sign * kappa_y(p, d, y[j]);
        }
        sign = -sign;
    }
    return out;
}

/// Frame (w, 0) with w an alternating soliton sum; wy is exact.
[[nodiscard]] inline SimilarityFrame soliton_frame(std::shared_ptr<const YGrid> grid, double p,
                                                   int theta1, const std::vector<double> &zetas,
                                                   double s = 0.0)
{
    auto prof = soliton_sum(grid->y, p, theta1, zetas);
    SimilarityFrame f;
    f.s = s;
    f.grid = std::move(grid);
    f.w = std::move(prof.w);
    f.wy = std::move(prof.wy);
    f.ws.assign(f.w.size(), 0.0);
    return f;
}

namespace detail
{

// Squared weighted norm of (w - theta kappa(tanh a), ws).
class SingleObjective
{
  public:
    SingleObjective(const SimilarityFrame &f, const WeightedQuadrature &quad)
        : f_(f), w0_(quad.weights(WeightKind::Rho)), w1_(quad.weights(WeightKind::RhoTimesOneMinusY2)),
          p_(quad.p())
    {
        ws_part_ = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) ws_part_ += w0_[j] * f.ws[j] * f.ws[j];
    }

    [[nodiscard]] double operator()(int theta, double a) const
    {
        const double d = std::tanh(a);
        double acc = ws_part_;
        const auto &y = f_.y();
        for (std::size_t j = 0; j < f_.size(); ++j) {
            const double e0 = f_.w[j] - theta * kappa(p_, d, y[j]);
            const double e1 = f_.wy[j] - theta * kappa_y(p_, d, y[j]);
            acc += w0_[j] * e0 * e0 + w1_[j] * e1 * e1;
        }
        return acc;
    }

    // Gauss-Newton step in a.
    [[nodiscard]] double gauss_newton(int theta, double a) const
    {
        const double d = std::tanh(a);
        const double beta = 2.0 / (p_ - 1.0);
        double num = 0.0, den = 0.0;
        const auto &y = f_.y();
        for (std::size_t j = 0; j < f_.size(); ++j) {
            const double q = 1.0 + d * y[j];
            const double k = kappa(p_, d, y[j]);
            const double ka = -beta * k * (d + y[j]) / q;
            const double kya = -beta * (ka * d / q + k * (1.0 - d * d) / (q * q));
            const double e0 = f_.w[j] - theta * k;
            const double e1 = f_.wy[j] - theta * (-beta * k * d / q);
            num += w0_[j] * e0 * theta * ka + w1_[j] * e1 * theta * kya;
            den += w0_[j] * ka * ka + w1_[j] * kya * kya;
        }
        return den > 0.0 ? a + num / den : a;
    }

  private:
    const SimilarityFrame &f_;
    const std::vector<double> &w0_;
    const std::vector<double> &w1_;
    double p_;
    double ws_part_;
};

} // namespace detail

struct FitOptions {
    double d_max = 0.999;
    int starts = 5;
    int refine_steps = 6;
};

/// Best theta * kappa(d) in the weighted norm, over theta = +-1 and |d| < d_max.
/// Brent minimisation in argth d on `starts` equal segments, then Gauss-Newton polishing.
[[nodiscard]] inline SingleFit fit_single(const SimilarityFrame &f, const WeightedQuadrature &quad,
                                          const FitOptions &opt = {})
{
    require(opt.starts >= 1, ErrorCode::InvalidParameter, "need at least one start");
    const detail::SingleObjective obj(f, quad);
    const double A = std::atanh(opt.d_max);
    double best_a = 0.0, best_v = std::numeric_limits<double>::infinity();
    int best_theta = 1;
    for (const int theta : {1, -1}) {
        for (int seg = 0; seg < opt.starts; ++seg) {
            const double lo = -A + 2.0 * A * seg / opt.starts;
            const double hi = -A + 2.0 * A * (seg + 1) / opt.starts;
            const auto res = boost::math::tools::brent_find_minima(
                [&](double a) { return obj(theta, a); }, lo, hi, 40);
            if (res.second < best_v) {
                best_v = res.second;
                best_a = res.first;
                best_theta = theta;
            }
        }
    }
    for (int it = 0; it < opt.refine_steps; ++it) {
        const double a = std::clamp(obj.gauss_newton(best_theta, best_a), -A, A);
        const double v = obj(best_theta, a);
        if (!(v <= best_v)) break;
        best_a = a;
        best_v = v;
    }
    SingleFit out;
    out.params.d = std::tanh(best_a);
    out.params.theta = best_theta;
    out.residual_hnorm = std::sqrt(std::max(best_v, 0.0));
    return out;
}

[[nodiscard]] inline SingleFit fit_single(const SimilarityFrame &f, double p, const FitOptions &opt = {})
{
    return fit_single(f, WeightedQuadrature(*f.grid, p), opt);
}

/// round(E0 / E0(kappa0)), or 0 below half a soliton.
[[nodiscard]] inline int estimate_k_from_energy(double E0_value, double p)
{
    if (!std::isfinite(E0_value)) return 0;
    const double ratio = E0_value / soliton_energy(p);
    if (ratio < 0.5) return 0;
    return static_cast<int>(std::lround(ratio));
}

struct DecomposeOptions {
    double tol_fraction = 0.05; ///< accept k once residual < tol_fraction * frame norm
    int max_iterations = 200;
    double default_gap = 1.5;
};

namespace detail
{

struct LmResult {
    std::vector<double> zetas;
    double residual_sq = std::numeric_limits<double>::infinity();
};

// Levenberg-Marquardt over x = (zeta_1, log g_1, ..., log g_{k-1}).
inline LmResult fit_centers(const SimilarityFrame &f, const WeightedQuadrature &quad, int theta1,
                            std::vector<double> zeta0, int max_iter)
{
    const double p = quad.p();
    const double beta = 2.0 / (p - 1.0);
    const auto &y = f.y();
    const std::size_t n = f.size();
    const std::size_t k = zeta0.size();
    const auto &w0 = quad.weights(WeightKind::Rho);
    const auto &w1 = quad.weights(WeightKind::RhoTimesOneMinusY2);
    double ws_part = 0.0;
    for (std::size_t j = 0; j < n; ++j) ws_part += w0[j] * f.ws[j] * f.ws[j];
    Eigen::VectorXd sq0(n), sq1(n);
    for (std::size_t j = 0; j < n; ++j) {
        sq0[static_cast<Eigen::Index>(j)] = std::sqrt(w0[j]);
        sq1[static_cast<Eigen::Index>(j)] = std::sqrt(w1[j]);
    }

    auto to_zetas = [&](const Eigen::VectorXd &x) {
        std::vector<double> z(k);
        z[0] = x[0];
        for (std::size_t i = 1; i < k; ++i) z[i] = z[i - 1] + std::exp(x[static_cast<Eigen::Index>(i)]);
        return z;
    };
    // Residual r (size 2n) and dr/dzeta (2n x k).
    auto evaluate = [&](const std::vector<double> &z, Eigen::VectorXd &r, Eigen::MatrixXd *dz) {
        const auto N2 = static_cast<Eigen::Index>(2 * n);
        r.resize(N2);
        if (dz) dz->setZero(N2, static_cast<Eigen::Index>(k));
        for (std::size_t j = 0; j < n; ++j) {
            r[static_cast<Eigen::Index>(j)] = f.w[j];
            r[static_cast<Eigen::Index>(n + j)] = f.wy[j];
        }
        double sign = theta1;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = -std::tanh(z[i]);
            for (std::size_t j = 0; j < n; ++j) {
                const double q = 1.0 + d * y[j];
                const double kv = kappa(p, d, y[j]);
                const double ky = -beta * kv * d / q;
                r[static_cast<Eigen::Index>(j)] -= sign * kv;
                r[static_cast<Eigen::Index>(n + j)] -= sign * ky;
                if (dz) {
                    // zeta = -a, so d/dzeta = -d/da.
                    const double ka = -beta * kv * (d + y[j]) / q;
                    const double kya = -beta * (ka * d / q + kv * (1.0 - d * d) / (q * q));
                    (*dz)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = sign * ka;
                    (*dz)(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(i)) = sign * kya;
                }
            }
            sign = -sign;
        }
        r.head(static_cast<Eigen::Index>(n)).array() *= sq0.array();
        r.tail(static_cast<Eigen::Index>(n)).array() *= sq1.array();
        if (dz) {
            for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(k); ++c) {
                dz->col(c).head(static_cast<Eigen::Index>(n)).array() *= sq0.array();
                dz->col(c).tail(static_cast<Eigen::Index>(n)).array() *= sq1.array();
            }
        }
    };

    std::sort(zeta0.begin(), zeta0.end());
    Eigen::VectorXd x(static_cast<Eigen::Index>(k));
    x[0] = zeta0[0];
    for (std::size_t i = 1; i < k; ++i) {
        x[static_cast<Eigen::Index>(i)] = std::log(std::max(zeta0[i] - zeta0[i - 1], 1e-3));
    }
    Eigen::VectorXd r, r_new;
    Eigen::MatrixXd dz;
    auto z = to_zetas(x);
    evaluate(z, r, &dz);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    for (int it = 0; it < max_iter; ++it) {
        // Chain rule from zeta to x.
        Eigen::MatrixXd Jx = Eigen::MatrixXd::Zero(dz.rows(), static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < k; ++i) {
            Jx.col(0) += dz.col(static_cast<Eigen::Index>(i));
            for (std::size_t m = 1; m <= i; ++m) {
                Jx.col(static_cast<Eigen::Index>(m)) +=
                    std::exp(x[static_cast<Eigen::Index>(m)]) * dz.col(static_cast<Eigen::Index>(i));
            }
        }
        const Eigen::MatrixXd A = Jx.transpose() * Jx;
        const Eigen::VectorXd gvec = Jx.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd Ad = A;
            for (Eigen::Index c = 0; c < Ad.rows(); ++c) Ad(c, c) += lambda * (A(c, c) + 1e-12);
            const Eigen::VectorXd step = -Ad.ldlt().solve(gvec);
            const Eigen::VectorXd x_new = x + step;
            const auto z_new = to_zetas(x_new);
            evaluate(z_new, r_new, nullptr);
            const double c_new = r_new.squaredNorm();
            if (std::isfinite(c_new) && c_new < cost) {
                x = x_new;
                z = z_new;
                const double rel = (cost - c_new) / std::max(cost, 1e-300);
                cost = c_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                evaluate(z, r, &dz);
                if (rel < 1e-14 || step.norm() < 1e-13) it = max_iter;
                break;
            }
            lambda *= 4.0;
        }
        if (!improved) break;
    }
    return {z, cost + ws_part};
}

// Signed local extrema of w (1-y^2)^{1/(p-1)} with alternating signs; y positions.
inline std::vector<std::pair<double, double>> signed_peaks(const SimilarityFrame &f, double p,
                                                           double min_height)
{
    const auto &y = f.y();
    const std::size_t n = f.size();
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = f.w[j] * std::pow(1.0 - y[j] * y[j], 1.0 / (p - 1.0));
    std::vector<std::pair<double, double>> raw; // (y, value)
    for (std::size_t j = 0; j < n; ++j) {
        const double a = std::abs(v[j]);
        if (a < min_height) continue;
        const double l = j > 0 ? std::abs(v[j - 1]) : -1.0;
        const double r = j + 1 < n ? std::abs(v[j + 1]) : -1.0;
        const bool same_l = j == 0 || v[j - 1] * v[j] > 0.0;
        const bool same_r = j + 1 == n || v[j + 1] * v[j] > 0.0;
        if ((a >= l || !same_l) && (a >= r || !same_r)) raw.emplace_back(y[j], v[j]);
    }
    std::vector<std::pair<double, double>> out;
    for (const auto &pk : raw) {
        if (!out.empty() && out.back().second * pk.second > 0.0) {
            if (std::abs(pk.second) > std::abs(out.back().second)) out.back() = pk;
        } else {
            out.push_back(pk);
        }
    }
    return out;
}

} // namespace detail

/// Alternating k-soliton fit for k = 1..k_max; returns the smallest k whose
/// residual falls below tol_fraction * ||frame||, else the best k with converged = false.
[[nodiscard]] inline SolitonDecomposition decompose(const SimilarityFrame &f,
                                                    const WeightedQuadrature &quad, int k_max,
                                                    const DecomposeOptions &opt = {})
{
    require(k_max >= 1 && k_max <= 5, ErrorCode::InvalidParameter, "k_max must lie in 1..5");
    const double p = quad.p();
    const double norm = hnorm(f, quad);
    const double tol = opt.tol_fraction * norm;
    const auto peaks = detail::signed_peaks(f, p, 0.2 * kappa0(p));
    const double y_lim = 1.0 - 1e-9;

    SolitonDecomposition best;
    best.frame_hnorm = norm;
    best.residual_hnorm = std::numeric_limits<double>::infinity();
    best.k_energy = estimate_k_from_energy(E0(f, quad), p);

    for (int k = 1; k <= k_max; ++k) {
        struct Start {
            int theta1;
            std::vector<double> zetas;
        };
        std::vector<Start> starts;
        const auto ku = static_cast<std::size_t>(k);
        if (peaks.size() >= ku) {
            // Windows of k consecutive peaks (they alternate in sign by construction).
            for (std::size_t s0 = 0; s0 + ku <= peaks.size(); ++s0) {
                Start st{peaks[s0].second > 0.0 ? 1 : -1, {}};
                for (std::size_t i = 0; i < ku; ++i) {
                    st.zetas.push_back(std::atanh(std::clamp(peaks[s0 + i].first, -y_lim, y_lim)));
                }
                starts.push_back(std::move(st));
            }
        }
        double centre = 0.0;
        if (!peaks.empty()) {
            for (const auto &pk : peaks) centre += std::atanh(std::clamp(pk.first, -y_lim, y_lim));
            centre /= static_cast<double>(peaks.size());
        }
        for (const int th : {1, -1}) {
            Start st{th, {}};
            for (int i = 0; i < k; ++i) st.zetas.push_back(centre + (i - (k - 1) / 2.0) * opt.default_gap);
            starts.push_back(std::move(st));
        }
        double best_k_res = std::numeric_limits<double>::infinity();
        SolitonDecomposition cand;
        for (const auto &st : starts) {
            const auto res = detail::fit_centers(f, quad, st.theta1, st.zetas, opt.max_iterations);
            const double rn = std::sqrt(std::max(res.residual_sq, 0.0));
            if (rn < best_k_res) {
                best_k_res = rn;
                cand.k = k;
                cand.theta1 = st.theta1;
                cand.zetas = res.zetas;
                cand.residual_hnorm = rn;
            }
        }
        cand.frame_hnorm = norm;
        cand.k_energy = best.k_energy;
        if (cand.residual_hnorm < tol) {
            cand.converged = true;
            return cand;
        }
        if (cand.residual_hnorm < best.residual_hnorm) best = cand;
    }
    best.converged = false;
    return best;
}

[[nodiscard]] inline SolitonDecomposition decompose(const SimilarityFrame &f, double p, int k_max,
                                                    const DecomposeOptions &opt = {})
{
    return decompose(f, WeightedQuadrature(*f.grid, p), k_max, opt);
}

} // namespace blowup

#endif
