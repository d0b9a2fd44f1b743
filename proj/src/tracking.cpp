#include "tarraq/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace tarraq {

namespace {

Vec6 stack(const Vec3 &p, const Vec3 &v)
{
    Vec6 x;
    x << p.x, p.y, p.z, v.x, v.y, v.z;
    return x;
}

Eigen::Matrix<double, 3, 6> observation()
{
    Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
    H.leftCols<3>().setIdentity();
    return H;
}

} // namespace

Mat6 kf_transition(double dt)
{
    Mat6 F = Mat6::Identity();
    F.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
    return F;
}

KfState kf_init(const Vec3 &measured_pos, double si, const std::optional<Vec3> &velocity, double now,
                const KfParams &params)
{
    if (!(si > 0.0))
    {
        throw std::invalid_argument("kf_init: sensing interval must be positive");
    }
    KfState kf;
    kf.params = params;
    kf.x = stack(measured_pos, velocity.value_or(Vec3{}));
    kf.M = params.m0 * Mat6::Identity();
    kf.si = si;
    kf.last_update = now;
    return kf;
}

KfState kf_predict(const KfState &kf)
{
    return kf_predict(kf, kf.si);
}

KfState kf_predict(const KfState &kf, double dt)
{
    if (dt < 0.0)
    {
        throw std::invalid_argument("kf_predict: negative step");
    }
    if (dt == 0.0)
    {
        return kf;
    }
    KfState out = kf;
    const Mat6 F = kf_transition(dt);
    out.x = F * kf.x;
    out.M = F * kf.M * F.transpose() + kf.params.q * Mat6::Identity();
    out.last_update = kf.last_update + dt;
    return out;
}

KfState kf_update(const KfState &kf, const Vec3 &y, bool *singular)
{
    const auto H = observation();
    const Eigen::Matrix3d S = kf.params.r * Eigen::Matrix3d::Identity() + H * kf.M * H.transpose();
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(S);
    KfState out = kf;
    const bool bad = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                     ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff());
    if (singular != nullptr)
    {
        *singular = bad;
    }
    if (bad)
    {
        out.M.diagonal() *= 1.1;
        return out;
    }
    const Eigen::Matrix<double, 6, 3> K = ldlt.solve(H * kf.M).transpose();
    const Eigen::Vector3d innovation = Eigen::Vector3d(y.x, y.y, y.z) - H * kf.x;
    out.x = kf.x + K * innovation;
    out.M = (Mat6::Identity() - K * H) * kf.M;
    out.M = 0.5 * (out.M + out.M.transpose()).eval();
    return out;
}

Vec3 kf_position(const KfState &kf)
{
    return {kf.x(0), kf.x(1), kf.x(2)};
}

Vec3 kf_velocity(const KfState &kf)
{
    return {kf.x(3), kf.x(4), kf.x(5)};
}

double kf_min_eigenvalue(const KfState &kf)
{
    const Mat6 sym = 0.5 * (kf.M + kf.M.transpose());
    return Eigen::SelfAdjointEigenSolver<Mat6>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

bool is_well_formed(const HelloMessage &msg)
{
    return std::isfinite(msg.timestamp) && msg.timestamp >= 0.0 && is_finite(msg.position) &&
           is_finite(msg.velocity) && std::isfinite(msg.ncr) && msg.ncr >= 0.0 && std::isfinite(msg.energy) &&
           std::isfinite(msg.max_q) && std::isfinite(msg.best_relay_residual) &&
           !std::isnan(msg.min_neighbor_dest);
}

double residual_link_duration(const NeighborEntry &entry, const RelativeMotion &rel, const Vec3 &center, double R)
{
    if (rel.co_moving || rel.v <= 0.0 || entry.chord.co_moving)
    {
        return kUnboundedDuration;
    }
    if (R <= 0.0)
    {
        throw std::invalid_argument("residual_link_duration: R must be positive");
    }
    const Vec3 rel_pos = kf_position(entry.kf) - center;
    const double elapsed = distance(rel_pos, entry.chord.entrance) / rel.v;
    return entry.whole_ld - elapsed;
}

NeighborTable::NeighborTable(TrackingConfig cfg)
    : m_cfg(cfg)
{
}

const NeighborEntry *NeighborTable::find(NodeId id) const
{
    auto it = m_entries.find(id);
    return it == m_entries.end() ? nullptr : &it->second;
}

std::vector<NodeId> NeighborTable::ids() const
{
    std::vector<NodeId> out;
    out.reserve(m_entries.size());
    for (const auto &[id, e] : m_entries)
    {
        out.push_back(id);
    }
    return out;
}

Vec3 NeighborTable::estimated_position(const NeighborEntry &e, double now) const
{
    if (m_cfg.mode == TrackingMode::timeout)
    {
        return e.last_position;
    }
    return kf_position(e.kf) + kf_velocity(e.kf) * (now - e.kf.last_update);
}

void NeighborTable::refresh(NeighborEntry &e, const Vec3 &own_pos, const Vec3 &own_vel, double now,
                            bool force_chord)
{
    if (m_cfg.mode == TrackingMode::timeout)
    {
        e.expiration = e.last_heard + m_cfg.timeout;
        e.residual_ld = e.expiration - now;
        e.whole_ld = m_cfg.timeout;
        return;
    }
    const Vec3 rel_pos = kf_position(e.kf) - own_pos;
    const Vec3 rel_vel = kf_velocity(e.kf) - own_vel;
    const double R = m_cfg.R;
    if (norm(rel_pos) > R)
    {
        // Predicted outside the sphere: the link is already gone.
        const double v = std::max(norm(rel_vel), 1e-9);
        e.residual_ld = std::min(-(norm(rel_pos) - R) / v, -1e-9);
        e.expiration = now + e.residual_ld;
        return;
    }
    if (force_chord || max_abs_diff(rel_vel, e.chord_rel_vel) > m_cfg.velocity_tol)
    {
        e.chord = entrance_point(Vec3{}, rel_pos, rel_vel, R);
        e.chord_rel_vel = rel_vel;
        e.whole_ld = e.chord.whole_ld;
    }
    e.residual_ld = residual_link_duration(e, relative_motion(rel_vel), own_pos, R);
    e.expiration = now + e.residual_ld;
}

HelloOutcome NeighborTable::on_hello(const HelloMessage &msg, const Vec3 &own_pos, const Vec3 &own_vel, double now,
                                     double si)
{
    if (!is_well_formed(msg) || !(si > 0.0))
    {
        ++m_malformed;
        return HelloOutcome::dropped;
    }
    auto copy_fields = [&](NeighborEntry &e) {
        e.advertised = msg.neighbors;
        e.ncr = msg.ncr;
        e.energy = msg.energy;
        e.max_q = msg.max_q;
        e.best_relay = msg.best_relay;
        e.best_relay_residual = msg.best_relay_residual;
        e.min_neighbor_dest = msg.min_neighbor_dest;
        e.last_heard = now;
        e.last_position = msg.position;
        e.last_velocity = msg.velocity;
    };

    auto it = m_entries.find(msg.sender);
    if (it == m_entries.end())
    {
        NeighborEntry e;
        e.id = msg.sender;
        e.kf = kf_init(msg.position, si, msg.velocity, now, m_cfg.kf);
        copy_fields(e);
        refresh(e, own_pos, own_vel, now, true);
        m_entries.emplace(msg.sender, std::move(e));
        return HelloOutcome::created;
    }

    NeighborEntry &e = it->second;
    if (e.last_heard == now && e.last_position == msg.position && e.last_velocity == msg.velocity)
    {
        return HelloOutcome::duplicate;
    }
    if (m_cfg.mode == TrackingMode::kalman)
    {
        e.kf = kf_predict(e.kf, std::max(now - e.kf.last_update, 0.0));
        e.kf.last_update = now;
        e.kf.si = si;
        bool singular = false;
        e.kf = kf_update(e.kf, msg.position, &singular);
        if (max_abs_diff(msg.velocity, e.last_velocity) > m_cfg.velocity_tol)
        {
            // Waypoint turnover: restart the velocity estimate from the advertised one.
            e.kf.x.tail<3>() << msg.velocity.x, msg.velocity.y, msg.velocity.z;
            e.kf.M.topRightCorner<3, 3>().setZero();
            e.kf.M.bottomLeftCorner<3, 3>().setZero();
            e.kf.M.bottomRightCorner<3, 3>() = m_cfg.kf.m0 * Eigen::Matrix3d::Identity();
        }
    }
    copy_fields(e);
    refresh(e, own_pos, own_vel, now, false);
    return HelloOutcome::updated;
}

std::vector<NodeId> NeighborTable::audit(const Vec3 &own_pos, const Vec3 &own_vel, double now)
{
    std::vector<NodeId> removed;
    for (auto it = m_entries.begin(); it != m_entries.end();)
    {
        NeighborEntry &e = it->second;
        if (m_cfg.mode == TrackingMode::kalman && now > e.kf.last_update)
        {
            e.kf = kf_predict(e.kf, now - e.kf.last_update);
            e.kf.last_update = now;
        }
        refresh(e, own_pos, own_vel, now, false);
        if (e.residual_ld <= 0.0)
        {
            removed.push_back(it->first);
            it = m_entries.erase(it);
        }
        else
        {
            ++it;
        }
    }
    return removed;
}

std::vector<NodeId> NeighborTable::expire(double now)
{
    std::vector<NodeId> removed;
    for (auto it = m_entries.begin(); it != m_entries.end();)
    {
        if (it->second.expiration <= now)
        {
            removed.push_back(it->first);
            it = m_entries.erase(it);
        }
        else
        {
            ++it;
        }
    }
    return removed;
}

bool NeighborTable::remove(NodeId id)
{
    return m_entries.erase(id) != 0;
}

void write_snapshot_csv(std::ostream &os, double time, NodeId node, const NeighborTable &table, bool header)
{
    if (header)
    {
        os << "time,node,neighbor,residual_ld,expiration\n";
    }
    for (const auto &[id, e] : table.entries())
    {
        os << time << ',' << node << ',' << id << ',' << e.residual_ld << ',' << e.expiration << '\n';
    }
}

} // namespace tarraq
