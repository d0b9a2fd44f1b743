#pragma once

#include "tarraq/kinematics.hpp"
#include "tarraq/vec3.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace tarraq {

using NodeId = std::uint32_t;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct KfParams
{
    double m0{1e4};
    double q{1e-3};
    double r{1.0};
};

/// Constant-velocity filter state [position; velocity].
struct KfState
{
    Vec6 x{Vec6::Zero()};
    Mat6 M{Mat6::Identity()};
    double last_update{0.0};
    double si{1.0};
    KfParams params;
};

/// Transition matrix [I, dt I; 0, I].
Mat6 kf_transition(double dt);

KfState kf_init(const Vec3 &measured_pos, double si, const std::optional<Vec3> &velocity = std::nullopt,
                double now = 0.0, const KfParams &params = {});

/// One prediction over the filter's SI.
KfState kf_predict(const KfState &kf);

/// Prediction over an arbitrary step dt >= 0 (dt = 0 leaves the state untouched).
KfState kf_predict(const KfState &kf, double dt);

/// Measurement update with a position fix. Sets *singular when the innovation
/// covariance could not be inverted; the covariance diagonal is then inflated by 10%.
KfState kf_update(const KfState &kf, const Vec3 &y, bool *singular = nullptr);

Vec3 kf_position(const KfState &kf);
Vec3 kf_velocity(const KfState &kf);

/// Smallest eigenvalue of the symmetric part of M.
double kf_min_eigenvalue(const KfState &kf);

struct HelloMessage
{
    NodeId sender{0};
    double timestamp{0.0};
    Vec3 position;
    Vec3 velocity;
    std::vector<NodeId> neighbors;
    double ncr{0.0};
    double energy{0.0};
    double max_q{0.0};
    std::optional<NodeId> best_relay;
    double best_relay_residual{0.0};
    // Smallest distance to the destination among the sender's neighbors.
    double min_neighbor_dest{0.0};
};

bool is_well_formed(const HelloMessage &msg);

struct NeighborEntry
{
    NodeId id{0};
    KfState kf;
    // Entrance point in the frame centered on the owning node.
    ChordGeometry chord;
    double whole_ld{0.0};
    double residual_ld{0.0};
    double expiration{0.0};
    double last_heard{0.0};
    Vec3 chord_rel_vel;
    Vec3 last_position;
    Vec3 last_velocity;
    std::vector<NodeId> advertised;
    double ncr{0.0};
    double energy{0.0};
    double max_q{0.0};
    std::optional<NodeId> best_relay;
    double best_relay_residual{0.0};
    double min_neighbor_dest{0.0};
};

/// Residual link duration from the filter's predicted position, center = owner position.
double residual_link_duration(const NeighborEntry &entry, const RelativeMotion &rel, const Vec3 &center, double R);

enum class TrackingMode
{
    // Filtered positions and predicted residual link duration.
    kalman,
    // Last advertised position and a fixed timeout, as plain beaconing protocols do.
    timeout,
};

struct TrackingConfig
{
    double R{150.0};
    double velocity_tol{0.1};
    TrackingMode mode{TrackingMode::kalman};
    double timeout{3.0};
    KfParams kf;
};

enum class HelloOutcome
{
    created,
    updated,
    duplicate,
    dropped,
};

class NeighborTable
{
public:
    explicit NeighborTable(TrackingConfig cfg = {});

    HelloOutcome on_hello(const HelloMessage &msg, const Vec3 &own_pos, const Vec3 &own_vel, double now, double si);

    /// Predicts every entry to now, refreshes residual link durations and removes expired entries.
    std::vector<NodeId> audit(const Vec3 &own_pos, const Vec3 &own_vel, double now);

    /// Drops entries whose expiration has passed without touching the filters.
    std::vector<NodeId> expire(double now);

    /// Forgets a neighbor after a link failure.
    bool remove(NodeId id);

    const std::map<NodeId, NeighborEntry> &entries() const { return m_entries; }
    const NeighborEntry *find(NodeId id) const;
    bool contains(NodeId id) const { return m_entries.count(id) != 0; }
    std::size_t size() const { return m_entries.size(); }
    std::vector<NodeId> ids() const;

    /// Best estimate of the neighbor's current position.
    Vec3 estimated_position(const NeighborEntry &e, double now) const;

    void set_radius(double R) { m_cfg.R = R; }
    void set_timeout(double timeout) { m_cfg.timeout = timeout; }
    const TrackingConfig &config() const { return m_cfg; }
    std::size_t malformed() const { return m_malformed; }

private:
    void refresh(NeighborEntry &e, const Vec3 &own_pos, const Vec3 &own_vel, double now, bool force_chord);

    TrackingConfig m_cfg;
    std::map<NodeId, NeighborEntry> m_entries;
    std::size_t m_malformed{0};
};

/// Appends rows `time,node,neighbor,residual_ld,expiration`.
void write_snapshot_csv(std::ostream &os, double time, NodeId node, const NeighborTable &table, bool header);

} // namespace tarraq
