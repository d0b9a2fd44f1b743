#include "tarraq/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tarraq::numerics;

TEST_SUITE("numerics")
{
    TEST_CASE("quadrature of smooth integrands")
    {
        auto r = integrate([](double x) { return x * x * x; }, 0.0, 2.0);
        CHECK(r.value == doctest::Approx(4.0).epsilon(1e-12));
        r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
        r = integrate([](double x) { return std::exp(-x); }, 0.0, 50.0);
        CHECK(r.value == doctest::Approx(1.0 - std::exp(-50.0)).epsilon(1e-9));
    }

    TEST_CASE("quadrature with a log singularity split at the kink")
    {
        auto f = [](double x) { return std::log(std::fabs(x - 0.3)); };
        const auto r = integrate_pieces(f, {0.0, 0.3, 1.0});
        const double exact = (0.3 * std::log(0.3) - 0.3) + (0.7 * std::log(0.7) - 0.7);
        CHECK(r.value == doctest::Approx(exact).epsilon(1e-8));
    }

    TEST_CASE("complete elliptic integrals")
    {
        CHECK(elliptic_k(0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
        CHECK(elliptic_e(0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
        CHECK(elliptic_e(1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(elliptic_k(0.5) == doctest::Approx(1.685750354812596).epsilon(1e-13));
        CHECK(elliptic_e(0.5) == doctest::Approx(1.467462209339427).epsilon(1e-13));
    }

    TEST_CASE("incomplete elliptic integral of the second kind")
    {
        CHECK(elliptic_e_incomplete(0.7, 0.0) == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(elliptic_e_incomplete(std::numbers::pi / 2, 0.5) == doctest::Approx(elliptic_e(0.5)).epsilon(1e-12));
        const double k = 0.8;
        const double phi = 1.1;
        const auto q = integrate([&](double t) { return std::sqrt(1.0 - k * k * std::sin(t) * std::sin(t)); }, 0.0, phi,
                                 {1e-13, 1e-13, 2000});
        CHECK(elliptic_e_incomplete(phi, k) == doctest::Approx(q.value).epsilon(1e-11));
    }

    TEST_CASE("bisection")
    {
        const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
        CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    }
}
