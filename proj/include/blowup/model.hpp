#ifndef BLOWUP_MODEL_HPP
#define BLOWUP_MODEL_HPP

// Equation instances
//
//   u_tt = u_rr + (N-1)/r u_r + |u|^{p-1} u + f(u) + g(|x|, t, u_r, u_t)
//
// with the growth hypotheses |f(u)| <= M(1+|u|^q), q < p, and
// |g(x,t,v,z)| <= M(1+|v|+|z|), g globally Lipschitz.

#include <blowup/error.hpp>
#include <blowup/expr.hpp>
#include <blowup/rng.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace blowup
{

enum class Preset { KleinGordon, PurePower, Custom };

inline std::string to_string(Preset p)
{
    switch (p) {
    case Preset::KleinGordon: return "klein_gordon";
    case Preset::PurePower: return "pure_power";
    case Preset::Custom: return "custom";
    }
    return "custom";
}

inline Preset preset_from_string(const std::string &name)
{
    if (name == "klein_gordon") return Preset::KleinGordon;
    if (name == "pure_power") return Preset::PurePower;
    if (name == "custom") return Preset::Custom;
    fail(ErrorCode::InvalidParameter, "unknown preset '" + name + "'");
}

/// f(u) = coeff * |u|^{exponent-1} u. Lets scaled forms of f and F be evaluated
/// without forming e^{2s/(p-1)} w explicitly.
struct PowerLaw {
    double coeff = 0.0;
    double exponent = 1.0;
};

struct EquationParams {
    Preset preset = Preset::PurePower;
    double p = 3.0;
    int N = 1;
    double q = 1.0;
    double M = 1.0;
    std::string f_expr; ///< custom only, variable u
    std::string g_expr; ///< custom only, variables x, t, v, z
    /// Coefficient of |u|^{p-1}u. 1 for every physical run; 0 turns the
    /// equation into the linear wave equation for flux-identity checks.
    double nonlinearity_scale = 1.0;
};

class EquationSpec
{
  public:
    using ScalarFn = std::function<double(double)>;
    using PerturbationFn = std::function<double(double, double, double, double)>;

    [[nodiscard]] double p() const noexcept { return params_.p; }
    [[nodiscard]] int N() const noexcept { return params_.N; }
    [[nodiscard]] double q() const noexcept { return params_.q; }
    [[nodiscard]] double M() const noexcept { return params_.M; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] Preset preset() const noexcept { return params_.preset; }
    [[nodiscard]] const EquationParams &params() const noexcept { return params_; }
    [[nodiscard]] double nonlinearity_scale() const noexcept { return params_.nonlinearity_scale; }

    [[nodiscard]] const std::optional<PowerLaw> &f_power_law() const noexcept { return power_law_; }
    [[nodiscard]] bool f_is_zero() const noexcept { return f_zero_; }
    [[nodiscard]] bool g_is_zero() const noexcept { return g_zero_; }

    [[nodiscard]] double f(double u) const
    {
        if (f_zero_) return 0.0;
        if (power_law_) return power_law_->coeff * signed_pow(u, power_law_->exponent);
        return (*f_)(u);
    }

    /// g(|x|, t, radial derivative, time derivative).
    [[nodiscard]] double g(double x, double t, double v, double z) const
    {
        if (g_zero_) return 0.0;
        return (*g_)(x, t, v, z);
    }

    /// F(u) = int_0^u f. Closed form for power-law f, adaptive Gauss-Kronrod otherwise.
    [[nodiscard]] double F(double u) const
    {
        if (f_zero_ || u == 0.0) return 0.0;
        if (power_law_) {
            const double m = power_law_->exponent;
            return power_law_->coeff * std::pow(std::abs(u), m + 1.0) / (m + 1.0);
        }
        double err = 0.0;
        const auto &fn = *f_;
        const double val = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
            [&fn](double v) { return fn(v); }, 0.0, u, 12, 1e-13, &err);
        return val;
    }

    /// lambda^{-p} f(lambda w) with lambda = exp(log_lambda).
    [[nodiscard]] double scaled_f(double w, double log_lambda) const
    {
        if (f_zero_) return 0.0;
        if (power_law_) {
            const double m = power_law_->exponent;
            return power_law_->coeff * std::exp((m - params_.p) * log_lambda) * signed_pow(w, m);
        }
        const double lam = std::exp(log_lambda);
        return std::exp(-params_.p * log_lambda) * (*f_)(lam * w);
    }

    /// lambda^{-(p+1)} F(lambda w) with lambda = exp(log_lambda).
    [[nodiscard]] double scaled_F(double w, double log_lambda) const
    {
        if (f_zero_ || w == 0.0) return 0.0;
        if (power_law_) {
            const double m = power_law_->exponent;
            return power_law_->coeff * std::exp((m - params_.p) * log_lambda)
                   * std::pow(std::abs(w), m + 1.0) / (m + 1.0);
        }
        const double lam = std::exp(log_lambda);
        return std::exp(-(params_.p + 1.0) * log_lambda) * F(lam * w);
    }

    /// Equation obtained through U_lambda(x,t) = lambda^{2/(p-1)} U(lambda x, lambda t):
    /// f_lambda(u) = lambda^{2p/(p-1)} f(lambda^{-2/(p-1)} u) and
    /// g_lambda(x,t,v,z) = lambda^{2p/(p-1)} g(lambda x, lambda t, lambda^{-(p+1)/(p-1)} v, lambda^{-(p+1)/(p-1)} z).
    [[nodiscard]] EquationSpec rescaled(double lambda) const
    {
        require(lambda > 0.0 && lambda <= 1.0, ErrorCode::InvalidParameter,
                "rescaling requires lambda in (0,1]");
        EquationSpec out = *this;
        const double p = params_.p;
        const double outer = std::pow(lambda, 2.0 * p / (p - 1.0));
        const double inner_u = std::pow(lambda, -2.0 / (p - 1.0));
        const double inner_d = std::pow(lambda, -(p + 1.0) / (p - 1.0));
        if (power_law_) {
            out.power_law_->coeff =
                power_law_->coeff * std::pow(lambda, 2.0 * (p - power_law_->exponent) / (p - 1.0));
        } else if (!f_zero_) {
            auto base = f_;
            out.f_ = std::make_shared<const ScalarFn>(
                [base, outer, inner_u](double u) { return outer * (*base)(inner_u * u); });
        }
        if (!g_zero_) {
            auto base = g_;
            out.g_ = std::make_shared<const PerturbationFn>(
                [base, outer, lambda, inner_d](double x, double t, double v, double z) {
                    return outer * (*base)(lambda * x, lambda * t, inner_d * v, inner_d * z);
                });
        }
        out.rescale_lambda_ = rescale_lambda_ * lambda;
        return out;
    }

    /// Product of all rescaling factors applied so far (1 for an original equation).
    [[nodiscard]] double rescale_lambda() const noexcept { return rescale_lambda_; }

    static double signed_pow(double u, double m)
    {
        if (m == 1.0) return u;
        const double a = std::pow(std::abs(u), m);
        return u < 0.0 ? -a : a;
    }

  private:
    friend EquationSpec make_equation(const EquationParams &params);
    friend EquationSpec make_equation(EquationParams params, ScalarFn f, PerturbationFn g);

    EquationParams params_;
    double gamma_ = 0.5;
    std::optional<PowerLaw> power_law_;
    bool f_zero_ = true;
    bool g_zero_ = true;
    std::shared_ptr<const ScalarFn> f_;
    std::shared_ptr<const PerturbationFn> g_;
    double rescale_lambda_ = 1.0;
};

namespace detail
{

inline void validate_params(const EquationParams &params)
{
    const double p = params.p;
    require(std::isfinite(p) && p > 1.0, ErrorCode::InvalidExponent,
            "p must exceed 1 (got " + std::to_string(p) + ")");
    require(params.N >= 1, ErrorCode::InvalidParameter, "space dimension N must be >= 1");
    if (params.N >= 2) {
        const double p_max = 1.0 + 4.0 / (params.N - 1.0);
        require(p <= p_max, ErrorCode::InvalidExponent,
                "p must not exceed 1+4/(N-1) = " + std::to_string(p_max) + " for N = "
                    + std::to_string(params.N));
    }
    require(params.q >= 1.0, ErrorCode::InvalidExponent, "q must be >= 1");
    require(params.q < p, ErrorCode::InvalidExponent, "q must be < p");
    require(params.M > 0.0, ErrorCode::InvalidParameter, "M must be positive");
    require(std::isfinite(params.nonlinearity_scale), ErrorCode::InvalidParameter,
            "nonlinearity_scale must be finite");
}

} // namespace detail

[[nodiscard]] inline double growth_gamma(double p, double q)
{
    return std::min(0.5, (p - q) / (p - 1.0));
}

/// Builds a validated equation. Presets: klein_gordon (f(u) = -u, g = 0, q = 1, M = 1),
/// pure_power (f = g = 0), custom (f_expr, g_expr parsed with the expression grammar).
[[nodiscard]] inline EquationSpec make_equation(const EquationParams &params)
{
    EquationParams canon = params;
    if (canon.preset == Preset::KleinGordon) {
        canon.q = 1.0;
        canon.M = 1.0;
        canon.f_expr.clear();
        canon.g_expr.clear();
    } else if (canon.preset == Preset::PurePower) {
        canon.f_expr.clear();
        canon.g_expr.clear();
    }
    detail::validate_params(canon);

    EquationSpec spec;
    spec.params_ = canon;
    spec.gamma_ = growth_gamma(canon.p, canon.q);
    switch (canon.preset) {
    case Preset::KleinGordon:
        spec.power_law_ = PowerLaw{-1.0, 1.0};
        spec.f_zero_ = false;
        break;
    case Preset::PurePower:
        break;
    case Preset::Custom:
        if (!canon.f_expr.empty()) {
            auto expr = std::make_shared<const Expression>(Expression::parse(canon.f_expr, {"u"}));
            spec.f_ = std::make_shared<const EquationSpec::ScalarFn>([expr](double u) {
                const std::array<double, 1> vars{u};
                return (*expr)(vars);
            });
            spec.f_zero_ = false;
        }
        if (!canon.g_expr.empty()) {
            auto expr = std::make_shared<const Expression>(
                Expression::parse(canon.g_expr, {"x", "t", "v", "z"}));
            spec.g_ = std::make_shared<const EquationSpec::PerturbationFn>(
                [expr](double x, double t, double v, double z) {
                    const std::array<double, 4> vars{x, t, v, z};
                    return (*expr)(vars);
                });
            spec.g_zero_ = false;
        }
        break;
    }
    return spec;
}

/// Custom equation from callables; f or g may be empty (treated as zero).
[[nodiscard]] inline EquationSpec make_equation(EquationParams params, EquationSpec::ScalarFn f,
                                                EquationSpec::PerturbationFn g)
{
    params.preset = Preset::Custom;
    params.f_expr.clear();
    params.g_expr.clear();
    detail::validate_params(params);
    EquationSpec spec;
    spec.params_ = params;
    spec.gamma_ = growth_gamma(params.p, params.q);
    if (f) {
        spec.f_ = std::make_shared<const EquationSpec::ScalarFn>(std::move(f));
        spec.f_zero_ = false;
    }
    if (g) {
        spec.g_ = std::make_shared<const EquationSpec::PerturbationFn>(std::move(g));
        spec.g_zero_ = false;
    }
    return spec;
}

[[nodiscard]] inline EquationSpec klein_gordon(double p, int N)
{
    EquationParams params;
    params.preset = Preset::KleinGordon;
    params.p = p;
    params.N = N;
    return make_equation(params);
}

[[nodiscard]] inline EquationSpec pure_power(double p, int N)
{
    EquationParams params;
    params.preset = Preset::PurePower;
    params.p = p;
    params.N = N;
    return make_equation(params);
}

[[nodiscard]] inline double antiderivative_F(const EquationSpec &spec, double u)
{
    return spec.F(u);
}

struct PerturbationReport {
    bool f_bound_ok = true;
    bool g_bound_ok = true;
    double g_lipschitz_estimate = 0.0;
    int samples_used = 0;
    double worst_f_ratio = 0.0; ///< max |f(u)| / (M(1+|u|^q)) over samples
    double worst_g_ratio = 0.0; ///< max |g| / (M(1+|v|+|z|)) over samples
};

/// Sampled check of the growth hypotheses: f on a log-spaced |u| grid up to 1e6
/// (both signs), g and its finite-difference Lipschitz quotient on random 4-tuples.
[[nodiscard]] inline PerturbationReport validate_hypotheses(const EquationSpec &spec,
                                                            int sample_count,
                                                            std::uint64_t seed = 0x5eed)
{
    require(sample_count >= 100, ErrorCode::InvalidParameter, "sample_count must be >= 100");
    PerturbationReport rep;
    const double M = spec.M();
    const double q = spec.q();
    constexpr double slack = 1.0 + 1e-12;

    const int half = sample_count / 2;
    for (int i = 0; i <= half; ++i) {
        const double mag = std::pow(10.0, -6.0 + 12.0 * i / half);
        for (const double u : {mag, -mag}) {
            const double bound = M * (1.0 + std::pow(std::abs(u), q));
            const double val = std::abs(spec.f(u));
            const double ratio = val / bound;
            rep.worst_f_ratio = std::max(rep.worst_f_ratio, std::isfinite(ratio) ? ratio : 1e300);
            if (!(val <= bound * slack)) rep.f_bound_ok = false;
            ++rep.samples_used;
        }
    }

    CounterRng rng(seed);
    auto draw = [&rng] {
        const double mag = std::pow(10.0, rng.uniform(-3.0, 6.0));
        return rng.uniform() < 0.5 ? -mag : mag;
    };
    for (int i = 0; i < sample_count; ++i) {
        std::array<double, 4> a{std::abs(draw()), draw(), draw(), draw()};
        const double g0 = spec.g(a[0], a[1], a[2], a[3]);
        const double bound = M * (1.0 + std::abs(a[2]) + std::abs(a[3]));
        const double ratio = std::abs(g0) / bound;
        rep.worst_g_ratio = std::max(rep.worst_g_ratio, std::isfinite(ratio) ? ratio : 1e300);
        if (!(std::abs(g0) <= bound * slack)) rep.g_bound_ok = false;
        for (std::size_t k = 0; k < 4; ++k) {
            auto b = a;
            const double h = 1e-6 * (1.0 + std::abs(a[k]));
            b[k] += h;
            const double g1 = spec.g(b[0], b[1], b[2], b[3]);
            const double quot = std::abs(g1 - g0) / h;
            if (std::isfinite(quot)) {
                rep.g_lipschitz_estimate = std::max(rep.g_lipschitz_estimate, quot);
            }
        }
        ++rep.samples_used;
    }
    return rep;
}

// Config serialization: keys p, N, q, M, preset, f_expr, g_expr.

inline nlohmann::json to_json(const EquationSpec &spec)
{
    const auto &prm = spec.params();
    nlohmann::json j{{"preset", to_string(prm.preset)}, {"p", prm.p}, {"N", prm.N},
                     {"q", prm.q},                      {"M", prm.M}};
    if (prm.preset == Preset::Custom) {
        j["f_expr"] = prm.f_expr;
        j["g_expr"] = prm.g_expr;
    }
    if (prm.nonlinearity_scale != 1.0) {
        j["nonlinearity_scale"] = prm.nonlinearity_scale;
    }
    return j;
}

inline EquationParams params_from_json(const nlohmann::json &j)
{
    EquationParams prm;
    prm.preset = preset_from_string(j.value("preset", std::string("pure_power")));
    prm.p = j.value("p", 3.0);
    prm.N = j.value("N", 1);
    prm.q = j.value("q", 1.0);
    prm.M = j.value("M", 1.0);
    prm.f_expr = j.value("f_expr", std::string());
    prm.g_expr = j.value("g_expr", std::string());
    prm.nonlinearity_scale = j.value("nonlinearity_scale", 1.0);
    return prm;
}

inline EquationSpec equation_from_json(const nlohmann::json &j)
{
    return make_equation(params_from_json(j));
}

} // namespace blowup

#endif
