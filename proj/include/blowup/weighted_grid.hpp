#ifndef BLOWUP_WEIGHTED_GRID_HPP
#define BLOWUP_WEIGHTED_GRID_HPP

// Grids on the similarity interval (-1+eps, 1-eps) and the weighted
// quadrature used for every integral against rho(y) = (1-y^2)^{2/(p-1)}.
//
// Quadrature is cell based: node j owns the cell between the midpoints to its
// neighbours, and the two edge cells extend all the way to -1 and +1. The
// weight of node j is the exact integral of the weight function over its cell
// (via the incomplete beta function), so piecewise-constant data are
// integrated exactly and the degenerate tails beyond the cutoff are not lost.

#include <blowup/error.hpp>

#include <boost/math/special_functions/beta.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace blowup
{

inline constexpr double default_cutoff = 1e-3;

enum class YGridKind { Clustered, Uniform };

struct YGrid {
    std::vector<double> y;
    double cutoff = default_cutoff;
    YGridKind kind = YGridKind::Clustered;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
    [[nodiscard]] double operator[](std::size_t j) const noexcept { return y[j]; }

    /// y_j = (1-eps) sin(pi xi_j / 2) on uniform xi in [-1,1]; clusters toward the edges.
    static YGrid clustered(std::size_t n, double cutoff = default_cutoff)
    {
        check(n, cutoff);
        YGrid g;
        g.cutoff = cutoff;
        g.kind = YGridKind::Clustered;
        g.y.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
            g.y[j] = (1.0 - cutoff) * std::sin(std::numbers::pi * xi / 2.0);
        }
        g.symmetrize();
        return g;
    }

    /// Uniform nodes from -(1-eps) to 1-eps.
    static YGrid uniform(std::size_t n, double cutoff = default_cutoff)
    {
        check(n, cutoff);
        YGrid g;
        g.cutoff = cutoff;
        g.kind = YGridKind::Uniform;
        g.y.resize(n);
        const double a = 1.0 - cutoff;
        for (std::size_t j = 0; j < n; ++j) {
            g.y[j] = -a + 2.0 * a * static_cast<double>(j) / static_cast<double>(n - 1);
        }
        g.symmetrize();
        return g;
    }

    /// Smallest odd-sized uniform grid with spacing at most dy.
    static YGrid uniform_with_spacing(double dy, double cutoff = default_cutoff)
    {
        require(dy > 0.0, ErrorCode::InvalidGrid, "spacing must be positive");
        auto n = static_cast<std::size_t>(std::ceil(2.0 * (1.0 - cutoff) / dy)) + 1;
        if (n % 2 == 0) ++n;
        return uniform(n, cutoff);
    }

    [[nodiscard]] double max_spacing() const noexcept
    {
        double h = 0.0;
        for (std::size_t j = 1; j < y.size(); ++j) h = std::max(h, y[j] - y[j - 1]);
        return h;
    }

    [[nodiscard]] double min_spacing() const noexcept
    {
        double h = 2.0;
        for (std::size_t j = 1; j < y.size(); ++j) h = std::min(h, y[j] - y[j - 1]);
        return h;
    }

  private:
    static void check(std::size_t n, double cutoff)
    {
        require(n >= 5, ErrorCode::InvalidGrid, "y grid needs at least 5 points");
        require(cutoff > 0.0 && cutoff < 0.5, ErrorCode::InvalidGrid, "cutoff must lie in (0, 0.5)");
    }

    void symmetrize()
    {
        const std::size_t n = y.size();
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double a = 0.5 * (y[n - 1 - j] - y[j]);
            y[j] = -a;
            y[n - 1 - j] = a;
        }
        if (n % 2 == 1) y[n / 2] = 0.0;
    }
};

/// rho(y) = (1-y^2)^{2/(p-1)}.
[[nodiscard]] inline double rho(double y, double p)
{
    return std::pow(1.0 - y * y, 2.0 / (p - 1.0));
}

/// Which weight multiplies the integrand: rho, rho(1-y^2) or rho/(1-y^2).
enum class WeightKind { Rho, RhoTimesOneMinusY2, RhoOverOneMinusY2 };

inline std::string to_string(WeightKind k)
{
    switch (k) {
    case WeightKind::Rho: return "rho";
    case WeightKind::RhoTimesOneMinusY2: return "rho*(1-y^2)";
    case WeightKind::RhoOverOneMinusY2: return "rho/(1-y^2)";
    }
    return "?";
}

namespace detail
{

// Integral of (1-y^2)^a over [-1, b] for a > -1, through y = 2x-1:
// 2^{2a+1} B(a+1,a+1) I_x(a+1,a+1).
inline double weight_primitive(double b, double a)
{
    if (b <= -1.0) return 0.0;
    const double x = std::min(1.0, 0.5 * (b + 1.0));
    const double c = std::pow(2.0, 2.0 * a + 1.0) * boost::math::beta(a + 1.0, a + 1.0);
    if (x <= 0.5) return c * boost::math::ibeta(a + 1.0, a + 1.0, x);
    return c * (1.0 - boost::math::ibetac(a + 1.0, a + 1.0, x));
}

// Integral of (1-y^2)^a over [lo, hi], split at 0 so each half uses the
// accurate side of the incomplete beta function.
inline double weight_cell(double lo, double hi, double a)
{
    auto half_lower = [&](double l, double h) { // both <= 0
        return weight_primitive(h, a) - weight_primitive(l, a);
    };
    if (hi <= 0.0) return half_lower(lo, hi);
    if (lo >= 0.0) return half_lower(-hi, -lo);
    return half_lower(lo, 0.0) + half_lower(-hi, 0.0);
}

} // namespace detail

/// Precomputed cell weights of a grid for one exponent p.
class WeightedQuadrature
{
  public:
    WeightedQuadrature(const YGrid &grid, double p) : p_(p), cutoff_(grid.cutoff)
    {
        require(p > 1.0, ErrorCode::InvalidExponent, "p must exceed 1");
        const std::size_t n = grid.size();
        require(n >= 2, ErrorCode::InvalidGrid, "grid too small");
        edges_.resize(n + 1);
        edges_[0] = -1.0;
        edges_[n] = 1.0;
        for (std::size_t j = 1; j < n; ++j) edges_[j] = 0.5 * (grid.y[j - 1] + grid.y[j]);
        const double beta = 2.0 / (p - 1.0);
        const std::array<double, 3> expo{beta, beta + 1.0, beta - 1.0};
        for (std::size_t k = 0; k < 3; ++k) {
            weights_[k].resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                weights_[k][j] = detail::weight_cell(edges_[j], edges_[j + 1], expo[k]);
            }
        }
    }

    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] double cutoff() const noexcept { return cutoff_; }
    [[nodiscard]] std::size_t size() const noexcept { return weights_[0].size(); }

    [[nodiscard]] const std::vector<double> &weights(WeightKind kind) const noexcept
    {
        return weights_[static_cast<std::size_t>(kind)];
    }

    /// Cell boundaries; edges()[j], edges()[j+1] bracket node j.
    [[nodiscard]] const std::vector<double> &edges() const noexcept { return edges_; }

    [[nodiscard]] double integrate(const std::vector<double> &samples, WeightKind kind) const
    {
        const auto &w = weights(kind);
        require(samples.size() == w.size(), ErrorCode::InvalidParameter,
                "samples do not match the grid");
        double acc = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * samples[j];
        return acc;
    }

  private:
    double p_;
    double cutoff_;
    std::vector<double> edges_;
    std::array<std::vector<double>, 3> weights_;
};

/// Second-order first derivative on a nonuniform grid (one-sided at the ends).
[[nodiscard]] inline std::vector<double> derivative(const std::vector<double> &w,
                                                    const std::vector<double> &y)
{
    const std::size_t n = y.size();
    std::vector<double> d(n);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double hm = y[j] - y[j - 1], hp = y[j + 1] - y[j];
        d[j] = (-hp / (hm * (hm + hp))) * w[j - 1] + ((hp - hm) / (hm * hp)) * w[j]
               + (hm / (hp * (hm + hp))) * w[j + 1];
    }
    {
        const double h1 = y[1] - y[0], h2 = y[2] - y[1];
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * w[0] + (h1 + h2) / (h1 * h2) * w[1]
               - h1 / (h2 * (h1 + h2)) * w[2];
    }
    {
        const double h1 = y[n - 1] - y[n - 2], h2 = y[n - 2] - y[n - 3];
        d[n - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * w[n - 1] - (h1 + h2) / (h1 * h2) * w[n - 2]
                   + h1 / (h2 * (h1 + h2)) * w[n - 3];
    }
    return d;
}

/// Flux-form (1/rho) d/dy (rho (1-y^2) dw/dy) with zero flux through y = +-1.
/// Face coefficients rho(1-y^2) are taken at cell midpoints and divided by the
/// exact cell mass, which keeps the edge rows consistent with the continuous
/// operator and gives exact summation by parts against the rho weights.
class FluxOperator
{
  public:
    FluxOperator(const YGrid &grid, const WeightedQuadrature &quad)
        : y_(grid.y), mass_(quad.weights(WeightKind::Rho))
    {
        const std::size_t n = y_.size();
        face_.resize(n > 0 ? n - 1 : 0);
        const double e = 2.0 / (quad.p() - 1.0) + 1.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double ym = 0.5 * (y_[j] + y_[j + 1]);
            face_[j] = std::pow(1.0 - ym * ym, e) / (y_[j + 1] - y_[j]);
        }
    }

    void apply(const std::vector<double> &w, std::vector<double> &out) const
    {
        const std::size_t n = y_.size();
        out.assign(n, 0.0);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double flux = face_[j] * (w[j + 1] - w[j]);
            out[j] += flux;
            out[j + 1] -= flux;
        }
        for (std::size_t j = 0; j < n; ++j) out[j] /= mass_[j];
    }

    [[nodiscard]] std::vector<double> operator()(const std::vector<double> &w) const
    {
        std::vector<double> out;
        apply(w, out);
        return out;
    }

  private:
    std::vector<double> y_;
    std::vector<double> mass_;
    std::vector<double> face_;
};

/// One-shot version of FluxOperator.
[[nodiscard]] inline std::vector<double> apply_L(const std::vector<double> &w, const YGrid &grid,
                                                 double p)
{
    require(w.size() == grid.size(), ErrorCode::InvalidParameter, "samples do not match the grid");
    const WeightedQuadrature quad(grid, p);
    return FluxOperator(grid, quad)(w);
}

[[nodiscard]] inline double weighted_integral(const std::vector<double> &samples, const YGrid &grid,
                                              double p, WeightKind kind)
{
    return WeightedQuadrature(grid, p).integrate(samples, kind);
}

} // namespace blowup

#endif
