#include "tarraq/analytics.hpp"
#include "tarraq/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tarraq;
using std::numbers::pi;

namespace {

AnalyticScenario fig5(double L, double R, double v_c = 0.0)
{
    return AnalyticScenario::from_box(40.0, L, R, 5.0, 40.0, v_c);
}

double cdf_at(const AnalyticScenario &s, double t, bool change)
{
    const std::vector<double> g{t};
    return change ? ncit_distribution(s, g).cdf[0] : nit_distribution(s, g).cdf[0];
}

double quantile(const AnalyticScenario &s, double p, double rate, bool change)
{
    return numerics::bisect([&](double t) { return cdf_at(s, t, change) - p; }, 0.0, 100.0 / rate, 1e-6 / rate);
}

} // namespace

TEST_SUITE("analytics")
{
    TEST_CASE("scenario validation")
    {
        CHECK_NOTHROW(fig5(400, 150).validate());
        CHECK_THROWS_AS(AnalyticScenario::from_box(40, 400, 150, 40, 5, 0).validate(), std::invalid_argument);
        CHECK_THROWS_AS(AnalyticScenario::from_box(40, 400, 150, 5, 40, 50).validate(), std::invalid_argument);
        CHECK_THROWS_AS(AnalyticScenario::from_box(40, 100, 200, 5, 40, 0).validate(), std::invalid_argument);
    }

    TEST_CASE("joint density window")
    {
        const auto s = fig5(400, 150, 0.0);
        CHECK(joint_pdf_rel_velocity(s, 3.0, 1.0) == 0.0);
        CHECK(joint_pdf_rel_velocity(s, 20.0, 1.0) == doctest::Approx(1.0 / (4 * pi * pi * 35.0)));
        CHECK(joint_pdf_rel_velocity(s, 41.0, 1.0) == 0.0);
        const auto m = fig5(400, 150, 3.0);
        CHECK(joint_pdf_rel_velocity(m, 1.0, pi) == 0.0);
        CHECK(joint_pdf_rel_velocity(m, 1.0, 0.0) == 0.0);
        CHECK(joint_pdf_rel_velocity(m, 4.0, 0.0) > 0.0);
    }

    TEST_CASE("joint density integrates to one")
    {
        for (double vc : {0.0, 3.0, 12.0, 25.0, 40.0})
        {
            const auto s = fig5(400, 150, vc);
            CHECK(rel_speed_expectation(s, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-6));
            // Brute midpoint sum over v in [0, v_u + v_c] and beta in [-pi, pi], alpha contributes 2 pi.
            const int nv = 1500;
            const int nb = 600;
            const double vmax = s.v_u + s.v_c;
            double sum = 0.0;
            for (int i = 0; i < nv; ++i)
            {
                const double v = (i + 0.5) * vmax / nv;
                for (int j = 0; j < nb; ++j)
                {
                    const double b = -pi + (j + 0.5) * 2 * pi / nb;
                    sum += joint_pdf_rel_velocity(s, v, std::fabs(b));
                }
            }
            CHECK(sum * (vmax / nv) * (2 * pi / nb) * 2 * pi == doctest::Approx(1.0).epsilon(5e-3));
        }
    }

    TEST_CASE("arrival rate at rest reduces to the mean speed")
    {
        const auto s = fig5(400, 150, 0.0);
        const double expected = s.rho * pi * 150.0 * 150.0 * (5.0 + 40.0) / 2.0;
        CHECK(expected == doctest::Approx(0.99401955054989566).epsilon(1e-14));
        CHECK(arrival_rate_quadrature(s) == doctest::Approx(expected).epsilon(1e-9));
        CHECK_THROWS_AS(arrival_rate_closed_form(s), BranchError);
    }

    TEST_CASE("arrival rate scales with density and range squared")
    {
        const auto s = fig5(400, 150, 15.0);
        const double base = arrival_rate_quadrature(s);
        auto d = s;
        d.rho *= 2.0;
        CHECK(arrival_rate_quadrature(d) == doctest::Approx(2.0 * base).epsilon(1e-12));
        auto r = s;
        r.R *= 2.0;
        r.L *= 2.0;
        r.rho = s.rho;
        CHECK(arrival_rate_quadrature(r) == doctest::Approx(4.0 * base).epsilon(1e-12));
    }

    TEST_CASE("frozen arrival rates")
    {
        CHECK(arrival_rate_quadrature(fig5(400, 150, 5.0)) == doctest::Approx(1.010712011880212).epsilon(1e-9));
        CHECK(arrival_rate_quadrature(fig5(400, 150, 20.0)) == doctest::Approx(1.2705963932036735).epsilon(1e-9));
        CHECK(arrival_rate_quadrature(fig5(400, 150, 40.0)) == doctest::Approx(1.943199568983677).epsilon(1e-9));
        CHECK(arrival_rate_quadrature(fig5(400, 200)) == doctest::Approx(1.7671458676442586).epsilon(1e-9));
        CHECK(arrival_rate_quadrature(fig5(600, 150)) == doctest::Approx(0.2945243112740431).epsilon(1e-9));
        CHECK(arrival_rate_quadrature(fig5(600, 200)) == doctest::Approx(0.52359877559829882).epsilon(1e-9));
    }

    TEST_CASE("closed form agrees with quadrature on its branch")
    {
        double worst = 0.0;
        for (int a = 0; a < 5; ++a)
        {
            for (int b = 0; b < 5; ++b)
            {
                for (int c = 0; c < 5; ++c)
                {
                    AnalyticScenario s;
                    s.v_l = 5.0;
                    s.v_u = 40.0;
                    s.v_c = 5.0 + 35.0 * a / 4.0;
                    s.R = 100.0 + 25.0 * b;
                    s.L = 600.0;
                    s.rho = (20.0 + 15.0 * c) / (s.L * s.L * s.L);
                    const double q = arrival_rate_quadrature(s);
                    const double f = arrival_rate_closed_form(s);
                    worst = std::max(worst, std::fabs(f - q) / q);
                }
            }
        }
        CHECK(worst <= 1e-4);
        CHECK_THROWS_AS(arrival_rate_closed_form(fig5(400, 150, 3.0)), BranchError);
    }

    TEST_CASE("arrival rate grows with accelerating slope in the central speed")
    {
        std::vector<double> eta;
        for (int i = 0; i <= 8; ++i)
        {
            eta.push_back(arrival_rate_quadrature(fig5(400, 150, 5.0 * i)));
        }
        for (std::size_t i = 1; i < eta.size(); ++i)
        {
            CHECK(eta[i] > eta[i - 1]);
        }
        for (std::size_t i = 1; i + 1 < eta.size(); ++i)
        {
            CHECK(eta[i + 1] - 2 * eta[i] + eta[i - 1] > 0.0);
        }
    }

    TEST_CASE("change rate doubles the arrival rate")
    {
        for (double vc : {0.0, 10.0, 30.0})
        {
            const auto s = fig5(600, 200, vc);
            CHECK(change_rate(s) == 2.0 * arrival_rate_quadrature(s));
        }
    }

    TEST_CASE("distribution endpoints, normalization and derivative consistency")
    {
        for (bool change : {false, true})
        {
            const auto s = fig5(400, 150, 10.0);
            const double rate = change ? change_rate(s) : arrival_rate_quadrature(s);
            const std::vector<double> ends{0.0, std::log(1e4) / rate, 400.0 / rate};
            const auto far = change ? ncit_distribution(s, ends) : nit_distribution(s, ends);
            CHECK(far.cdf[0] == doctest::Approx(0.0).epsilon(1e-9));
            CHECK(far.cdf[1] > 0.95);
            CHECK(far.cdf[2] > 1.0 - 1e-4);

            const double q = quantile(s, 0.999, rate, change);
            const auto grid = linear_grid(q, 3000);
            const auto c = change ? ncit_distribution(s, grid) : nit_distribution(s, grid);
            CHECK(pdf_mass(c) == doctest::Approx(0.999).epsilon(1e-3));
            for (std::size_t i = 1; i < c.t.size(); ++i)
            {
                REQUIRE(c.cdf[i] >= c.cdf[i - 1]);
                REQUIRE(c.pdf[i] >= 0.0);
            }
            double worst = 0.0;
            for (std::size_t i = 1; i + 1 < c.t.size(); ++i)
            {
                const double d = (c.cdf[i + 1] - c.cdf[i - 1]) / (c.t[i + 1] - c.t[i - 1]);
                worst = std::max(worst, std::fabs(d - c.pdf[i]) / c.pdf[i]);
            }
            CHECK(worst <= 0.01);
        }
    }

    TEST_CASE("default grid")
    {
        const auto g = default_grid(2.0);
        REQUIRE(g.size() == 200);
        CHECK(g.front() == doctest::Approx(0.005));
        CHECK(g.back() == doctest::Approx(4.0));
    }

    TEST_CASE("exponential surrogate of the arrival law")
    {
        for (double L : {400.0, 600.0})
        {
            for (double R : {150.0, 200.0})
            {
                const auto s = fig5(L, R);
                const auto c = nit_distribution(s, default_grid(arrival_rate_quadrature(s)));
                CHECK(fit_error(c).cdf_sup <= 0.01);
            }
        }
    }
}
