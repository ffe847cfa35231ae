#include <blowup/rng.hpp>
#include <blowup/soliton_ode.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace blowup;
using Catch::Matchers::WithinAbs;

namespace
{

// Right-hand side written out term by term, outer neighbours absent.
std::vector<double> reference_rhs(double p, const std::vector<double> &z)
{
    const std::size_t k = z.size();
    const double b = 2.0 / (p - 1.0);
    std::vector<double> out(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        if (i > 0) out[i] += std::exp(-b * (z[i] - z[i - 1]));
        if (i + 1 < k) out[i] -= std::exp(-b * (z[i + 1] - z[i]));
    }
    return out;
}

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

std::vector<double> perturbed(const CenterSystem &sys, double s0, CounterRng &rng, double amp)
{
    auto z = zeta_bar(sys, s0);
    std::vector<double> dz(z.size());
    for (auto &x : dz) x = rng.uniform(-amp, amp);
    const double m = barycenter(dz);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += dz[i] - m;
    return z;
}

} // namespace

TEST_CASE("alpha bar examples")
{
    const auto a2 = alpha_bars(3.0, 2, 1.0);
    CHECK_THAT(a2[0], WithinAbs(-std::log(2.0) / 2.0, 1e-14));
    CHECK_THAT(a2[1], WithinAbs(std::log(2.0) / 2.0, 1e-14));
    CHECK_THAT(a2[0], WithinAbs(-0.34657, 1e-5));

    const auto a3 = alpha_bars(3.0, 3, 1.0);
    CHECK_THAT(a3[0], WithinAbs(-a3[2], 1e-14));
    CHECK(std::abs(a3[1]) < 1e-14);

    for (const double p : {1.5, 2.0, 3.0, 5.0}) {
        for (int k = 2; k <= 6; ++k) {
            for (const double c1 : {0.3, 1.0, 4.0}) {
                const auto a = alpha_bars(p, k, c1);
                CHECK(std::abs(barycenter(a)) < 1e-14);
                for (const double b : center_couplings(p, k, c1)) CHECK(b > 0.0);
            }
        }
    }
    CHECK(code_of([] { (void)alpha_bars(3.0, 1, 1.0); }) == ErrorCode::InvalidParameter);
    CHECK(code_of([] { (void)alpha_bars(3.0, 3, 0.0); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("explicit solution residual")
{
    for (const double p : {2.0, 3.0, 1.5}) {
        for (int k = 2; k <= 5; ++k) {
            for (const double c1 : {1.0, 0.5}) {
                const auto sys = make_center_system(p, k, c1);
                for (double s = 2.0; s <= 1e6; s *= 1.7) {
                    const auto z = zeta_bar(sys, s);
                    const auto rhs = reference_rhs(p, z);
                    for (int i = 0; i < k; ++i) {
                        const double rate = (i + 1 - (k + 1) / 2.0) * (p - 1.0) / (2.0 * s);
                        CHECK(std::abs(rate / c1 - rhs[i]) < 1e-10);
                    }
                    CHECK(std::abs(barycenter(z)) < 1e-14);
                    CHECK(explicit_residual(sys, s) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("zeta bar examples")
{
    const auto sys = make_center_system(3.0, 2, 1.0);
    const auto z = zeta_bar(sys, std::exp(2.0));
    CHECK_THAT(z[0], WithinAbs(-1.0 + sys.alpha_bar[0], 1e-14));
    CHECK_THAT(z[1], WithinAbs(1.0 + sys.alpha_bar[1], 1e-14));
    const auto one = zeta_bar(make_center_system(2.0, 4, 1.0), 1.0);
    const auto ab = alpha_bars(2.0, 4, 1.0);
    for (int i = 0; i < 4; ++i) CHECK(one[i] == ab[i]);
    CHECK(code_of([&] { (void)zeta_bar(sys, 0.0); }) == ErrorCode::InvalidParameter);
    CHECK(barycenter({1.0, 2.0, 3.0}) == 2.0);
}

TEST_CASE("integration follows the explicit solution")
{
    for (const int k : {2, 3, 4}) {
        const auto sys = make_center_system(3.0, k, 1.0);
        const double s0 = 5.0;
        const auto tr = integrate_system(sys, zeta_bar(sys, s0), s0, 10.0 * s0);
        for (std::size_t m = 0; m < tr.s.size(); ++m) {
            const auto zb = zeta_bar(sys, tr.s[m]);
            for (int i = 0; i < k; ++i) CHECK(std::abs(tr.zetas[m][i] - zb[i]) < 1e-8);
        }
        CHECK(tr.s.back() == 10.0 * s0);
    }
}

TEST_CASE("barycenter conservation and convergence")
{
    CounterRng rng(8);
    for (const int k : {2, 3}) {
        for (const double p : {2.0, 3.0}) {
            const auto sys = make_center_system(p, k, 1.0);
            const auto z0 = perturbed(sys, 10.0, rng, 0.5);
            const auto tr = integrate_system(sys, z0, 10.0, 1e4);
            for (const double b : tr.barycenters) CHECK(std::abs(b - tr.barycenters.front()) < 1e-10);
            const auto zb = zeta_bar(sys, 1e4);
            std::vector<double> dev(k);
            for (int i = 0; i < k; ++i) dev[i] = tr.zetas.back()[i] - zb[i];
            const double shift = barycenter(dev);
            for (int i = 0; i < k; ++i) CHECK(std::abs(dev[i] - shift) < 1e-2);
            for (const auto &z : tr.zetas) {
                for (int i = 1; i < k; ++i) CHECK(z[i] > z[i - 1]);
            }
        }
    }
}

TEST_CASE("forced system keeps the limit")
{
    CounterRng rng(21);
    const auto sys = make_center_system(3.0, 3, 1.0);
    const CenterForcing f = [](std::size_t i, double s) { return (i == 0 ? 1.0 : -0.5) / std::pow(s, 1.5); };
    const auto tr = integrate_system(sys, perturbed(sys, 10.0, rng, 0.5), 10.0, 1e4, f);
    const auto zb = zeta_bar(sys, 1e4);
    std::vector<double> dev(3);
    for (int i = 0; i < 3; ++i) dev[i] = tr.zetas.back()[i] - zb[i];
    const double shift = barycenter(dev);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(dev[i] - shift) < 5e-2);
}

TEST_CASE("bad inputs and collisions")
{
    const auto sys = make_center_system(3.0, 2, 1.0);
    CHECK(code_of([&] { (void)integrate_system(sys, {1.0, 0.5}, 1.0, 2.0); }) == ErrorCode::InvalidParameter);
    CHECK(code_of([&] { (void)integrate_system(sys, {0.0, 1.0, 2.0}, 1.0, 2.0); }) == ErrorCode::InvalidParameter);
    const CenterForcing squeeze = [](std::size_t i, double) { return i == 0 ? 50.0 : -50.0; };
    CHECK(code_of([&] { (void)integrate_system(sys, {-0.5, 0.5}, 1.0, 100.0, squeeze); }) == ErrorCode::StepFailure);
}
