#include "tarraq/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tarraq {

namespace {

double clamp_unit(double x)
{
    return std::clamp(x, -1.0, 1.0);
}

} // namespace

RelativeMotion relative_motion(double v_o, double v_c, double alpha_vo, double beta_vo)
{
    if (v_o < 0.0 || v_c < 0.0 || !std::isfinite(alpha_vo) || !std::isfinite(beta_vo))
    {
        throw std::invalid_argument("relative_motion: negative speed or non-finite angle");
    }
    const double cb = std::cos(beta_vo);
    const double v2 = v_o * v_o + v_c * v_c - 2.0 * v_o * v_c * cb;
    const double v = std::sqrt(std::max(v2, 0.0));
    RelativeMotion out;
    out.alpha_v = alpha_vo;
    if (v <= 1e-12 * std::max({v_o, v_c, 1.0}))
    {
        out.co_moving = true;
        return out;
    }
    out.v = v;
    out.beta_v = std::acos(clamp_unit((v_o * cb - v_c) / v));
    return out;
}

RelativeMotion relative_motion(const Vec3 &rel_vel)
{
    RelativeMotion out;
    const double v = norm(rel_vel);
    if (v == 0.0)
    {
        out.co_moving = true;
        return out;
    }
    out.v = v;
    out.alpha_v = std::atan2(rel_vel.y, rel_vel.x);
    out.beta_v = std::acos(clamp_unit(rel_vel.z / v));
    return out;
}

double whole_link_duration(double R, const RelativeMotion &rel, double theta_a, double psi_a)
{
    if (R <= 0.0)
    {
        throw std::invalid_argument("whole_link_duration: R must be positive");
    }
    if (rel.co_moving || rel.v <= 0.0)
    {
        return kUnboundedDuration;
    }
    const double c = std::sin(psi_a) * std::sin(rel.beta_v) * std::cos(theta_a - rel.alpha_v) +
                     std::cos(psi_a) * std::cos(rel.beta_v);
    return 2.0 * R / rel.v * std::min(std::fabs(c), 1.0);
}

ChordGeometry entrance_point(const Vec3 &center, const Vec3 &neighbor_rel_pos, const Vec3 &rel_vel, double R)
{
    if (R <= 0.0)
    {
        throw std::invalid_argument("entrance_point: R must be positive");
    }
    const Vec3 q = neighbor_rel_pos - center;
    const double q2 = norm_squared(q);
    if (q2 > R * R * (1.0 + 1e-9))
    {
        throw std::invalid_argument("entrance_point: node is outside the sphere");
    }
    ChordGeometry g;
    const double v = norm(rel_vel);
    if (v == 0.0)
    {
        g.co_moving = true;
        g.entrance = neighbor_rel_pos;
        g.whole_ld = kUnboundedDuration;
        return g;
    }
    const Vec3 u = rel_vel / v;
    const double b = dot(q, u);
    const double disc = std::max(b * b - (q2 - R * R), 0.0);
    const double s = b + std::sqrt(disc);
    Vec3 a = q - s * u;
    const double an = norm(a);
    if (an > 0.0)
    {
        a *= R / an;
    }
    g.entrance = center + a;
    g.elapsed_distance = std::max(s, 0.0);
    g.theta_a = std::atan2(a.y, a.x);
    g.psi_a = std::acos(clamp_unit(a.z / R));
    g.whole_ld = whole_link_duration(R, relative_motion(rel_vel), g.theta_a, g.psi_a);
    g.chord_length = g.whole_ld * v;
    return g;
}

double time_to_exit(const Vec3 &rel_pos, const Vec3 &rel_vel, double R)
{
    const double q2 = norm_squared(rel_pos);
    if (q2 > R * R)
    {
        return 0.0;
    }
    const double v = norm(rel_vel);
    if (v == 0.0)
    {
        return kUnboundedDuration;
    }
    const double b = dot(rel_pos, rel_vel) / v;
    const double disc = std::max(b * b - (q2 - R * R), 0.0);
    return std::max(-b + std::sqrt(disc), 0.0) / v;
}

void rwp_new_leg(MobilityState &state, const Vec3 &box, const SpeedBounds &speeds, Rng &rng)
{
    state.waypoint = {uniform(rng, 0.0, box.x), uniform(rng, 0.0, box.y), uniform(rng, 0.0, box.z)};
    state.speed = uniform(rng, speeds.v_l, speeds.v_u);
    const Vec3 d = state.waypoint - state.position;
    const double n = norm(d);
    state.velocity = n > 0.0 ? d * (state.speed / n) : Vec3{};
}

MobilityState rwp_init(const Vec3 &box, const SpeedBounds &speeds, Rng &rng)
{
    MobilityState s;
    s.position = {uniform(rng, 0.0, box.x), uniform(rng, 0.0, box.y), uniform(rng, 0.0, box.z)};
    rwp_new_leg(s, box, speeds, rng);
    return s;
}

MobilityState rwp_step(MobilityState state, const Vec3 &box, const SpeedBounds &speeds, double dt, Rng &rng)
{
    if (!(dt > 0.0))
    {
        throw std::invalid_argument("rwp_step: dt must be positive");
    }
    double remaining = dt;
    for (int guard = 0; remaining > 0.0 && guard < 1000; ++guard)
    {
        const double dist = distance(state.position, state.waypoint);
        if (state.speed > 0.0 && state.speed * remaining < dist)
        {
            state.position += state.velocity * remaining;
            break;
        }
        remaining -= state.speed > 0.0 ? dist / state.speed : remaining;
        state.position = state.waypoint;
        rwp_new_leg(state, box, speeds, rng);
    }
    return state;
}

double swept_volume(double v, double t, double R)
{
    if (v < 0.0 || t < 0.0 || R <= 0.0)
    {
        throw std::invalid_argument("swept_volume: invalid arguments");
    }
    const double vt = v * t;
    if (vt > 2.0 * R)
    {
        return std::numbers::pi * R * R * (4.0 * R + 3.0 * vt) / 3.0;
    }
    return std::numbers::pi * vt * (24.0 * R * R - vt * vt) / 12.0;
}

} // namespace tarraq
