#pragma once

#include "tarraq/rng.hpp"
#include "tarraq/vec3.hpp"

#include <limits>

namespace tarraq {

/// Stands in for the duration of a link between co-moving nodes.
inline constexpr double kUnboundedDuration = std::numeric_limits<double>::infinity();

struct SpeedBounds
{
    double v_l{5.0};
    double v_u{40.0};
};

/// Kinematic state of one node under random waypoint mobility.
struct MobilityState
{
    Vec3 position;
    Vec3 velocity;
    Vec3 waypoint;
    double speed{0.0};
};

/// Relative velocity of a node seen from a central node moving along +Z.
struct RelativeMotion
{
    double v{0.0};
    double alpha_v{0.0};
    double beta_v{0.0};
    bool co_moving{false};
};

struct ChordGeometry
{
    Vec3 entrance;
    double theta_a{0.0};
    double psi_a{0.0};
    double whole_ld{0.0};
    double chord_length{0.0};
    // Distance already travelled since the entrance.
    double elapsed_distance{0.0};
    bool co_moving{false};
};

RelativeMotion relative_motion(double v_o, double v_c, double alpha_vo, double beta_vo);

/// Relative motion of an arbitrary relative velocity vector (direction angles in the global frame).
RelativeMotion relative_motion(const Vec3 &rel_vel);

/// Whole crossing time of the sphere of radius R, entering at angles (theta_a, psi_a).
double whole_link_duration(double R, const RelativeMotion &rel, double theta_a, double psi_a);

/// Throws std::invalid_argument if the neighbor is outside the sphere.
ChordGeometry entrance_point(const Vec3 &center, const Vec3 &neighbor_rel_pos, const Vec3 &rel_vel, double R);

/// Time until a point at rel_pos moving with rel_vel leaves the sphere of radius R about the origin.
/// Zero when already outside; unbounded when rel_vel is zero.
double time_to_exit(const Vec3 &rel_pos, const Vec3 &rel_vel, double R);

/// Draws a fresh leg: uniform waypoint inside [0, box] and uniform speed.
void rwp_new_leg(MobilityState &state, const Vec3 &box, const SpeedBounds &speeds, Rng &rng);

MobilityState rwp_init(const Vec3 &box, const SpeedBounds &speeds, Rng &rng);

MobilityState rwp_step(MobilityState state, const Vec3 &box, const SpeedBounds &speeds, double dt, Rng &rng);

/// Volume swept by the sphere of radius R translating a distance v t.
double swept_volume(double v, double t, double R);

} // namespace tarraq
