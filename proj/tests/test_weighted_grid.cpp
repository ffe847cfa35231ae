#include <blowup/weighted_grid.hpp>

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace blowup;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("rho values")
{
    CHECK(rho(0.0, 3.0) == 1.0);
    CHECK_THAT(rho(0.5, 3.0), WithinAbs(0.75, 1e-15));
    CHECK_THAT(rho(0.5, 2.0), WithinAbs(0.5625, 1e-15));
}

TEST_CASE("grids are symmetric and inside the cutoff")
{
    for (const auto &g : {YGrid::clustered(201), YGrid::uniform(101, 1e-2), YGrid::clustered(50)}) {
        const std::size_t n = g.size();
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(g.y[j] == -g.y[n - 1 - j]);
            CHECK(std::abs(g.y[j]) <= 1.0 - g.cutoff + 1e-15);
        }
        for (std::size_t j = 1; j < n; ++j) CHECK(g.y[j] > g.y[j - 1]);
    }
    const auto c = YGrid::clustered(201);
    CHECK(c.y.front() == -(1.0 - default_cutoff));
    CHECK(c.min_spacing() < 0.1 * c.max_spacing());
    const auto u = YGrid::uniform_with_spacing(1.0 / 400.0);
    CHECK(u.size() % 2 == 1);
    CHECK(u.max_spacing() <= 1.0 / 400.0 + 1e-15);
    CHECK(u.y[u.size() / 2] == 0.0);
    CHECK_THROWS_AS(YGrid::uniform(3), Error);
    CHECK_THROWS_AS(YGrid::clustered(100, 0.7), Error);
}

TEST_CASE("weighted integrals of constants")
{
    const auto g = YGrid::clustered(2000);
    const std::vector<double> one(g.size(), 1.0), zero(g.size(), 0.0);
    CHECK_THAT(weighted_integral(one, g, 3.0, WeightKind::Rho), WithinAbs(4.0 / 3.0, 1e-6));
    CHECK_THAT(weighted_integral(one, g, 3.0, WeightKind::RhoOverOneMinusY2), WithinAbs(2.0, 1e-4));
    CHECK(weighted_integral(zero, g, 3.0, WeightKind::Rho) == 0.0);
    for (const double p : {1.5, 2.0, 3.0, 5.0}) {
        const double b = 2.0 / (p - 1.0);
        CHECK_THAT(weighted_integral(one, g, p, WeightKind::Rho), WithinRel(oracle::weight_mass(b), 1e-10));
        CHECK_THAT(weighted_integral(one, g, p, WeightKind::RhoTimesOneMinusY2),
                   WithinRel(oracle::weight_mass(b + 1.0), 1e-10));
        CHECK_THAT(weighted_integral(one, g, p, WeightKind::RhoOverOneMinusY2),
                   WithinRel(oracle::weight_mass(b - 1.0), 1e-8));
    }
}

TEST_CASE("weighted integrals of smooth functions converge")
{
    auto f = [](double y) { return std::cos(3.0 * y) + y * y * y; };
    for (const double p : {2.0, 3.0}) {
        const double b = 2.0 / (p - 1.0);
        const double exact = oracle::gauss([&](double y) { return f(y) * std::pow(1.0 - y * y, b); }, -1.0, 1.0);
        double prev = 1.0;
        for (const std::size_t n : {201u, 401u, 801u}) {
            const auto g = YGrid::clustered(n);
            std::vector<double> s(n);
            for (std::size_t j = 0; j < n; ++j) s[j] = f(g.y[j]);
            const double err = std::abs(weighted_integral(s, g, p, WeightKind::Rho) - exact);
            CHECK(err < 2e-4);
            CHECK(err < prev);
            prev = err;
        }
    }
}

TEST_CASE("L annihilates constants")
{
    for (const auto &g : {YGrid::clustered(301), YGrid::uniform(201)}) {
        for (const double p : {2.0, 3.0, 4.0}) {
            const auto out = apply_L(std::vector<double>(g.size(), 2.5), g, p);
            for (const double x : out) CHECK(std::abs(x) < 1e-12);
        }
    }
}

TEST_CASE("L is consistent in the interior")
{
    // p = 3: L(y^2) = ((1-y^2)^2 2y)' / (1-y^2) = 2 - 10 y^2.
    const auto g = YGrid::uniform(801);
    std::vector<double> w(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) w[j] = g.y[j] * g.y[j];
    const auto lw = apply_L(w, g, 3.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (std::abs(g.y[j]) < 0.9) CHECK_THAT(lw[j], WithinAbs(2.0 - 10.0 * g.y[j] * g.y[j], 1e-4));
    }
}

TEST_CASE("summation by parts against the continuous identity")
{
    // int (Lw) w rho = -int w'^2 (1-y^2) rho.
    auto w = [](double y) { return std::sin(2.0 * y) + y * y * y; };
    auto wp = [](double y) { return 2.0 * std::cos(2.0 * y) + 3.0 * y * y; };
    for (const double p : {2.0, 3.0, 5.0}) {
        const double b = 2.0 / (p - 1.0);
        const double exact =
            -oracle::gauss([&](double y) { return wp(y) * wp(y) * std::pow(1.0 - y * y, b + 1.0); }, -1.0, 1.0);
        const auto g = YGrid::clustered(801);
        const WeightedQuadrature q(g, p);
        std::vector<double> ws(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) ws[j] = w(g.y[j]);
        const auto lw = FluxOperator(g, q)(ws);
        std::vector<double> prod(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) prod[j] = lw[j] * ws[j];
        CHECK_THAT(q.integrate(prod, WeightKind::Rho), WithinRel(exact, 1e-4));
    }
}

TEST_CASE("derivative on a nonuniform grid")
{
    const auto g = YGrid::clustered(401);
    std::vector<double> w(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) w[j] = std::exp(g.y[j]);
    const auto d = derivative(w, g.y);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK_THAT(d[j], WithinAbs(std::exp(g.y[j]), 1e-4));
}
