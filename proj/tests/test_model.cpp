#include <blowup/model.hpp>

#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>

using namespace blowup;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

ErrorCode code_of(const std::function<void()> &fn)
{
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Mismatch;
}

// Fixed 20-point Gauss-Legendre, independent of the adaptive rule used in the model.
double gauss_integral(const std::function<double(double)> &f, double a, double b)
{
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

} // namespace

TEST_CASE("klein_gordon preset")
{
    const auto s = klein_gordon(3.0, 3);
    CHECK(s.f(2.0) == -2.0);
    CHECK(s.q() == 1.0);
    CHECK(s.M() == 1.0);
    CHECK(s.gamma() == 0.5);
    CHECK(s.g_is_zero());
    CHECK(s.g(1.0, 2.0, 3.0, 4.0) == 0.0);
}

TEST_CASE("pure_power preset has f = g = 0")
{
    const auto s = pure_power(3.0, 1);
    CHECK(s.f_is_zero());
    CHECK(s.g_is_zero());
    for (const double u : {-5.0, 0.0, 0.3, 7.0}) CHECK(s.f(u) == 0.0);
    CHECK(s.F(5.0) == 0.0);
}

TEST_CASE("parameter validation")
{
    EquationParams prm;
    prm.p = 1.0;
    CHECK(code_of([&] { (void)make_equation(prm); }) == ErrorCode::InvalidExponent);
    prm.p = 0.5;
    CHECK(code_of([&] { (void)make_equation(prm); }) == ErrorCode::InvalidExponent);

    prm.p = 3.5; // above 1 + 4/(N-1) = 3 for N = 3
    prm.N = 3;
    CHECK(code_of([&] { (void)make_equation(prm); }) == ErrorCode::InvalidExponent);
    prm.p = 3.0;
    CHECK_NOTHROW(make_equation(prm));

    prm.N = 1;
    prm.preset = Preset::Custom;
    prm.q = 3.0;
    CHECK(code_of([&] { (void)make_equation(prm); }) == ErrorCode::InvalidExponent);
    prm.q = 0.5;
    CHECK(code_of([&] { (void)make_equation(prm); }) == ErrorCode::InvalidExponent);
    prm.q = 1.0;
    prm.N = 0;
    CHECK(code_of([&] { (void)make_equation(prm); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("antiderivative examples")
{
    const auto kg = klein_gordon(3.0, 1);
    const double oracle = gauss_integral([&](double v) { return -v; }, 0.0, 2.0);
    CHECK_THAT(antiderivative_F(kg, 2.0), WithinAbs(oracle, 1e-12));
    CHECK_THAT(antiderivative_F(kg, 2.0), WithinAbs(-2.0, 1e-12));
    CHECK(antiderivative_F(kg, 0.0) == 0.0);
    CHECK(antiderivative_F(pure_power(3.0, 1), 5.0) == 0.0);
}

TEST_CASE("klein_gordon antiderivative is -u^2/2 against quadrature")
{
    const auto kg = klein_gordon(2.0, 1);
    for (double u = -10.0; u <= 10.0; u += 0.37) {
        const double oracle = gauss_integral([](double v) { return -v; }, 0.0, u);
        CHECK_THAT(kg.F(u), WithinAbs(oracle, 1e-12 * (1.0 + u * u)));
        CHECK_THAT(kg.F(u), WithinAbs(-0.5 * u * u, 1e-12 * (1.0 + u * u)));
    }
}

TEST_CASE("custom antiderivative uses quadrature")
{
    EquationParams prm;
    prm.preset = Preset::Custom;
    prm.p = 3.0;
    prm.q = 2.0;
    prm.f_expr = "sin(u) * u^2";
    const auto s = make_equation(prm);
    for (const double u : {-3.0, -0.5, 0.2, 2.5}) {
        const double oracle = gauss_integral([](double v) { return std::sin(v) * v * v; }, 0.0, u);
        CHECK_THAT(s.F(u), WithinAbs(oracle, 1e-11));
    }
}

TEST_CASE("gamma matches its closed form for random (p, q)")
{
    CounterRng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        EquationParams prm;
        prm.preset = Preset::Custom;
        prm.p = rng.uniform(1.01, 6.0);
        prm.q = rng.uniform(1.0, prm.p);
        if (prm.q >= prm.p) continue;
        const auto s = make_equation(prm);
        const double expected = std::min(0.5, (prm.p - prm.q) / (prm.p - 1.0));
        CHECK(s.gamma() == expected);
        CHECK(s.gamma() > 0.0);
    }
}

TEST_CASE("hypothesis sampling")
{
    const auto kg = validate_hypotheses(klein_gordon(3.0, 1), 200);
    CHECK(kg.f_bound_ok);
    CHECK(kg.g_bound_ok);
    CHECK(kg.samples_used >= 200);

    const auto pp = validate_hypotheses(pure_power(3.0, 1), 200);
    CHECK(pp.f_bound_ok);
    CHECK(pp.g_bound_ok);
    CHECK(pp.g_lipschitz_estimate == 0.0);

    EquationParams prm;
    prm.preset = Preset::Custom;
    prm.p = 3.0;
    prm.q = 1.0;
    prm.f_expr = "u^2";
    CHECK_FALSE(validate_hypotheses(make_equation(prm), 200).f_bound_ok);

    prm.f_expr.clear();
    prm.g_expr = "0.5 * v + 0.25 * sin(z)";
    const auto g = validate_hypotheses(make_equation(prm), 400);
    CHECK(g.g_bound_ok);
    CHECK(g.g_lipschitz_estimate <= 0.5 + 1e-6);
    CHECK(g.g_lipschitz_estimate >= 0.4);

    CHECK(code_of([] { (void)validate_hypotheses(pure_power(3.0, 1), 50); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("json round trip")
{
    EquationParams prm;
    prm.preset = Preset::Custom;
    prm.p = 2.5;
    prm.N = 2;
    prm.q = 1.5;
    prm.M = 3.0;
    prm.f_expr = "-abs(u)^1.5";
    prm.g_expr = "tanh(v) * exp(-x)";
    const auto s = make_equation(prm);
    const auto back = equation_from_json(to_json(s));
    CHECK(back.p() == 2.5);
    CHECK(back.N() == 2);
    CHECK(back.q() == 1.5);
    CHECK(back.M() == 3.0);
    CHECK(back.params().f_expr == prm.f_expr);
    CHECK_THAT(back.f(2.0), WithinRel(-std::pow(2.0, 1.5), 1e-14));
    CHECK_THAT(back.g(1.0, 0.0, 0.3, 0.0), WithinRel(std::tanh(0.3) * std::exp(-1.0), 1e-14));
    CHECK(code_of([] { (void)equation_from_json({{"preset", "quartic"}}); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("expression grammar")
{
    const auto e = Expression::parse("2*x - y^2 / 4 + sign(-x) + abs(-3) + log(exp(1))", {"x", "y"});
    const std::array<double, 2> v{1.5, 2.0};
    CHECK_THAT(e(v), WithinAbs(3.0 - 1.0 - 1.0 + 3.0 + 1.0, 1e-14));
    const auto neg = Expression::parse("-x^2", {"x"});
    const std::array<double, 1> w{3.0};
    CHECK(neg(w) == -9.0);
    CHECK(code_of([] { (void)Expression::parse("2 * (x", {"x"}); }) == ErrorCode::ParseError);
    CHECK(code_of([] { (void)Expression::parse("q + 1", {"x"}); }) == ErrorCode::ParseError);
}

TEST_CASE("scaled nonlinearities")
{
    const auto kg = klein_gordon(3.0, 1);
    // lambda^{-p} f(lambda w) with f = -u: -lambda^{1-p} w.
    const double lam = 0.3, w = 1.7;
    CHECK_THAT(kg.scaled_f(w, std::log(lam)), WithinRel(-std::pow(lam, -2.0) * w, 1e-13));
    CHECK_THAT(kg.scaled_F(w, std::log(lam)), WithinRel(-std::pow(lam, -2.0) * w * w / 2.0, 1e-13));

    const auto r = kg.rescaled(0.1);
    // f_lambda(u) = lambda^{2p/(p-1)} f(lambda^{-2/(p-1)} u) = -lambda^2 u for p = 3.
    CHECK_THAT(r.f(2.0), WithinRel(-0.01 * 2.0, 1e-13));
    CHECK_THAT(r.rescale_lambda(), WithinRel(0.1, 1e-15));
}
