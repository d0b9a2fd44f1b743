#include "tarraq/kinematics.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace tarraq;
using std::numbers::pi;

namespace {

Vec3 spherical(double speed, double alpha, double beta)
{
    return {speed * std::sin(beta) * std::cos(alpha), speed * std::sin(beta) * std::sin(alpha),
            speed * std::cos(beta)};
}

// Chord time by shooting the ray from the entrance point along u.
double ray_sphere_time(const Vec3 &entrance, const Vec3 &vel, double R)
{
    const double v = norm(vel);
    const Vec3 u = vel / v;
    const double b = dot(entrance, u);
    const double c = norm_squared(entrance) - R * R;
    const double s = -b + std::sqrt(std::max(b * b - c, 0.0));
    return std::max(s, 0.0) / v;
}

} // namespace

TEST_SUITE("kinematics")
{
    TEST_CASE("relative motion examples")
    {
        auto r = relative_motion(10.0, 10.0, 0.3, 0.0);
        CHECK(r.co_moving);
        CHECK(r.v == 0.0);

        r = relative_motion(3.0, 4.0, 0.0, pi / 2);
        CHECK(r.v == doctest::Approx(5.0).epsilon(1e-14));

        r = relative_motion(20.0, 10.0, 0.0, pi / 3);
        CHECK(r.v == doctest::Approx(std::sqrt(300.0)).epsilon(1e-14));
        CHECK(r.beta_v == doctest::Approx(pi / 2).epsilon(1e-12));
    }

    TEST_CASE("relative speed agrees with explicit vector subtraction")
    {
        Rng rng(7);
        for (int i = 0; i < 10000; ++i)
        {
            const double vo = uniform(rng, 0.0, 40.0);
            const double vc = uniform(rng, 0.0, 40.0);
            const double a = uniform(rng, -pi, pi);
            const double b = uniform(rng, 0.0, pi);
            const Vec3 rel = spherical(vo, a, b) - Vec3{0.0, 0.0, vc};
            const auto r = relative_motion(vo, vc, a, b);
            REQUIRE(r.v == doctest::Approx(norm(rel)).epsilon(1e-10));
            if (!r.co_moving && r.v > 1e-6)
            {
                const auto r3 = relative_motion(rel);
                REQUIRE(r3.beta_v == doctest::Approx(r.beta_v).epsilon(1e-8));
            }
        }
    }

    TEST_CASE("whole link duration examples")
    {
        RelativeMotion rel;
        rel.v = 15.0;
        rel.beta_v = pi;
        CHECK(whole_link_duration(150.0, rel, 0.4, 0.0) == doctest::Approx(20.0).epsilon(1e-14));

        rel.v = 10.0;
        rel.alpha_v = 0.0;
        rel.beta_v = pi / 2;
        CHECK(whole_link_duration(150.0, rel, 2 * pi / 3, pi / 2) == doctest::Approx(15.0).epsilon(1e-12));

        // Grazing entry.
        CHECK(whole_link_duration(150.0, rel, pi / 2, pi / 2) == doctest::Approx(0.0).epsilon(1e-12));

        rel.co_moving = true;
        CHECK(std::isinf(whole_link_duration(150.0, rel, 0.0, 0.0)));
    }

    TEST_CASE("whole link duration matches the ray-sphere oracle")
    {
        Rng rng(11);
        const double R = 150.0;
        for (int i = 0; i < 2000; ++i)
        {
            const double theta = uniform(rng, -pi, pi);
            const double psi = uniform(rng, 0.0, pi);
            const Vec3 entrance = spherical(R, theta, psi);
            Vec3 vel = spherical(uniform(rng, 1.0, 50.0), uniform(rng, -pi, pi), uniform(rng, 0.0, pi));
            if (dot(vel, entrance) > 0.0)
            {
                vel = -vel;
            }
            const double t = whole_link_duration(R, relative_motion(vel), theta, psi);
            REQUIRE(t * norm(vel) <= 2 * R * (1 + 1e-12));
            REQUIRE(t == doctest::Approx(ray_sphere_time(entrance, vel, R)).epsilon(1e-9));
        }
    }

    TEST_CASE("entrance point examples")
    {
        const double R = 150.0;
        auto g = entrance_point({}, {R / 2, 0, 0}, {10, 0, 0}, R);
        CHECK(g.entrance.x == doctest::Approx(-R));
        CHECK(std::fabs(g.entrance.y) < 1e-9);
        CHECK(g.elapsed_distance == doctest::Approx(1.5 * R));
        CHECK(g.chord_length == doctest::Approx(2 * R));
        CHECK(g.chord_length - g.elapsed_distance == doctest::Approx(R / 2));

        g = entrance_point({}, {0, 0, -R / 2}, {0, 0, 10}, R);
        CHECK(g.entrance.z == doctest::Approx(-R));
        CHECK(g.chord_length == doctest::Approx(2 * R));
        CHECK(g.chord_length - g.elapsed_distance == doctest::Approx(1.5 * R));

        g = entrance_point({}, {R, 0, 0}, {-5, 0, 0}, R);
        CHECK(g.entrance.x == doctest::Approx(R));
        CHECK(g.elapsed_distance == doctest::Approx(0.0));

        CHECK_THROWS_AS(entrance_point({}, {2 * R, 0, 0}, {1, 0, 0}, R), std::invalid_argument);
    }

    TEST_CASE("entrance point round trip")
    {
        Rng rng(3);
        const double R = 200.0;
        const Vec3 center{10, -20, 5};
        for (int i = 0; i < 2000; ++i)
        {
            const Vec3 q = spherical(uniform(rng, 0.0, R), uniform(rng, -pi, pi), uniform(rng, 0.0, pi));
            const Vec3 vel = spherical(uniform(rng, 0.5, 40.0), uniform(rng, -pi, pi), uniform(rng, 0.0, pi));
            const auto g = entrance_point(center, center + q, vel, R);
            REQUIRE(distance(g.entrance, center) == doctest::Approx(R).epsilon(1e-9));
            const Vec3 back = g.entrance + vel / norm(vel) * g.elapsed_distance;
            REQUIRE(distance(back, center + q) <= 1e-9 * R);
            REQUIRE(g.chord_length <= 2 * R * (1 + 1e-12));
        }
    }

    TEST_CASE("time to exit")
    {
        CHECK(time_to_exit({75, 0, 0}, {10, 0, 0}, 150.0) == doctest::Approx(7.5));
        CHECK(time_to_exit({300, 0, 0}, {10, 0, 0}, 150.0) == 0.0);
        CHECK(std::isinf(time_to_exit({0, 0, 0}, {0, 0, 0}, 150.0)));
    }

    TEST_CASE("swept volume")
    {
        const double R = 150.0;
        CHECK(swept_volume(10.0, 1.0, R) == doctest::Approx(pi * 10.0 * 539900.0 / 12.0).epsilon(1e-14));
        const double below = swept_volume(1.0, 2 * R * (1 - 1e-12), R);
        const double above = swept_volume(1.0, 2 * R * (1 + 1e-12), R);
        CHECK(below == doctest::Approx(10 * pi * R * R * R / 3).epsilon(1e-9));
        CHECK(above == doctest::Approx(10 * pi * R * R * R / 3).epsilon(1e-9));
        CHECK(swept_volume(1.0, 1e-4, R) == doctest::Approx(2 * pi * R * R * 1e-4).epsilon(1e-8));
        double prev = 0.0;
        for (double t = 0.0; t < 100.0; t += 0.37)
        {
            const double v = swept_volume(7.0, t, R);
            REQUIRE(v >= prev);
            prev = v;
        }
    }

    TEST_CASE("random waypoint steps")
    {
        const Vec3 box{600, 600, 150};
        const SpeedBounds sp{5, 40};
        Rng rng(42);
        MobilityState s;
        s.position = {100, 100, 50};
        s.waypoint = {500, 100, 50};
        s.speed = 10;
        s.velocity = {10, 0, 0};
        const auto n = rwp_step(s, box, sp, 0.01, rng);
        CHECK(n.position.x == doctest::Approx(100.1));
        CHECK(n.velocity == s.velocity);

        s.waypoint = s.position;
        for (int i = 0; i < 200; ++i)
        {
            s.waypoint = s.position;
            const auto t = rwp_step(s, box, sp, 0.01, rng);
            REQUIRE(t.speed >= sp.v_l);
            REQUIRE(t.speed <= sp.v_u);
        }

        Rng a(5);
        Rng b(5);
        auto sa = rwp_init(box, sp, a);
        auto sb = rwp_init(box, sp, b);
        for (int i = 0; i < 10; ++i)
        {
            const Vec3 before = sa.position;
            sa = rwp_step(sa, box, sp, 0.5, a);
            sb = rwp_step(sb, box, sp, 0.5, b);
            REQUIRE(sa.position == sb.position);
            REQUIRE(distance(before, sa.position) <= sp.v_u * 0.5 + 1e-9);
        }
    }

    TEST_CASE("random waypoint octant occupancy")
    {
        const Vec3 box{600, 600, 150};
        const SpeedBounds sp{5, 40};
        Rng rng(9);
        std::vector<MobilityState> nodes;
        for (int i = 0; i < 100; ++i)
        {
            nodes.push_back(rwp_init(box, sp, rng));
        }
        std::array<double, 8> counts{};
        double total = 0.0;
        for (int step = 0; step < 12000; ++step)
        {
            for (auto &s : nodes)
            {
                s = rwp_step(s, box, sp, 1.0, rng);
                if (step >= 2000)
                {
                    const int o = (s.position.x > box.x / 2) + 2 * (s.position.y > box.y / 2) +
                                  4 * (s.position.z > box.z / 2);
                    counts[o] += 1.0;
                    total += 1.0;
                }
            }
        }
        for (double c : counts)
        {
            CHECK(c / total == doctest::Approx(0.125).epsilon(0.05));
        }
    }
}
