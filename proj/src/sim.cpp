#include "tarraq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace tarraq {

namespace {

constexpr double kPi = std::numbers::pi;

const numerics::QuadratureOptions kRuntimeQuadrature{1e-6, 1e-5, 2000};

bool changed(double a, double b)
{
    return std::fabs(a - b) > 0.01 * std::max(std::fabs(a), std::fabs(b));
}

} // namespace

void RadioModel::validate() const
{
    if (!(phi > 0.0 && phi < 1.0))
    {
        throw ConfigError("radio: phi must lie in (0, 1)");
    }
    if (!(gamma_th > 0.0) || !(p_tx > 0.0) || !(alpha > 0.0) || !(L > 0.0) || !(N > 0.0))
    {
        throw ConfigError("radio: gamma_th, p_tx, alpha, L and N must be positive");
    }
    if (alpha == 3.0)
    {
        throw ConfigError("radio: path-loss exponent 3 makes the interference term singular");
    }
    if (!(n0 >= 0.0) || !(interference_gain >= 0.0) || !(epsilon > 0.0) || n0 + interference_gain <= 0.0)
    {
        throw ConfigError("radio: invalid noise or interference parameters");
    }
    if (!(e_elec >= 0.0) || !(e_fs >= 0.0))
    {
        throw ConfigError("radio: energy coefficients must be non-negative");
    }
}

double RadioModel::interference() const
{
    const double d_m = std::sqrt(3.0) * L;
    const double n_e = 4.0 * std::sqrt(3.0) * kPi * N;
    const double raw = 3.0 * n_e * (std::pow(d_m, 3.0 - alpha) - std::pow(epsilon, 3.0 - alpha)) /
                       (2.0 * std::pow(d_m, 3.0) * (3.0 - alpha));
    return interference_gain * raw;
}

double RadioModel::success_probability(double d) const
{
    return std::exp(-gamma_th * std::pow(d, alpha) * (n0 + interference()) / p_tx);
}

double effective_range(const RadioModel &rm)
{
    rm.validate();
    return std::pow(-rm.p_tx * std::log(rm.phi) / (rm.gamma_th * (rm.n0 + rm.interference())), 1.0 / rm.alpha);
}

bool tx_success(const RadioModel &rm, double d, Rng &rng)
{
    // The draw is always consumed so the channel stream stays aligned across outcomes.
    const double u = uniform(rng, 0.0, 1.0);
    if (d > effective_range(rm))
    {
        return false;
    }
    return u < rm.success_probability(d);
}

EnergyCost energy_tx_rx(double bits, double d, const RadioModel &rm)
{
    const double rx = bits * rm.e_elec;
    return {rx + bits * std::pow(d, rm.alpha) * rm.e_fs, rx};
}

Protocol parse_protocol(const std::string &s)
{
    if (s == "tarraq")
    {
        return Protocol::tarraq;
    }
    if (s == "greedy-fixed")
    {
        return Protocol::greedy_fixed;
    }
    if (s == "greedy-resilient")
    {
        return Protocol::greedy_resilient;
    }
    throw ConfigError("unknown protocol: " + s);
}

std::string to_string(Protocol p)
{
    switch (p)
    {
    case Protocol::tarraq:
        return "tarraq";
    case Protocol::greedy_fixed:
        return "greedy-fixed";
    case Protocol::greedy_resilient:
        return "greedy-resilient";
    }
    return "unknown";
}

void SimConfig::validate() const
{
    if (n_nodes < 1)
    {
        throw ConfigError("need at least one node");
    }
    if (!(box.x > 0.0 && box.y > 0.0 && box.z > 0.0))
    {
        throw ConfigError("box dimensions must be positive");
    }
    if (!(speeds.v_l > 0.0 && speeds.v_l < speeds.v_u))
    {
        throw ConfigError("need 0 < v_min < v_max");
    }
    if (!(duration > 0.0) || !(tick > 0.0) || !(warmup >= 0.0) || warmup >= duration)
    {
        throw ConfigError("need duration > warmup >= 0 and tick > 0");
    }
    radio.validate();
    if (effective_range(radio) >= std::sqrt(3.0) * radio.L)
    {
        throw ConfigError("effective range must be below sqrt(3) L");
    }
    try
    {
        sensing.validate();
        qrouting.weights.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(e.what());
    }
    if (!(qrouting.tau0 > 0.0) || qrouting.k_max < 1 || !(qrouting.epsilon > 0.0) ||
        !(qrouting.alpha_min > 0.0 && qrouting.alpha_min <= qrouting.alpha_max && qrouting.alpha_max <= 1.0))
    {
        throw ConfigError("invalid Q-routing parameters");
    }
    if (!(session_rate >= 0.0) || !(cbr_bps > 0.0) || !(burst > 0.0) || packet_bytes < 1 || !(max_cache > 0.0) ||
        !(service_time > 0.0) || retry_limit < 0 || ttl < 1)
    {
        throw ConfigError("invalid traffic parameters");
    }
    if (!(fixed_si > 0.0) || !(timeout_factor > 0.0) || hello_base_bytes < 0 || hello_per_neighbor_bytes < 0)
    {
        throw ConfigError("invalid hello parameters");
    }
    if (mobility == MobilityKind::fixed)
    {
        if (static_cast<int>(static_positions.size()) != n_nodes)
        {
            throw ConfigError("static_positions must list one position per node");
        }
        for (const auto &p : static_positions)
        {
            if (!is_finite(p) || p.x < 0.0 || p.y < 0.0 || p.z < 0.0 || p.x > box.x || p.y > box.y || p.z > box.z)
            {
                throw ConfigError("static position outside the box");
            }
        }
    }
    if (fixed_source && (*fixed_source < 0 || *fixed_source >= n_nodes))
    {
        throw ConfigError("fixed_source out of range");
    }
}

Vec3 SimConfig::base_station() const
{
    return bs_position.value_or(Vec3{box.x / 2.0, box.y / 2.0, 0.0});
}

bool SimConfig::replies() const
{
    return hello_reply.value_or(protocol != Protocol::greedy_fixed);
}

double RunMetrics::pdr() const
{
    return generated == 0 ? 0.0 : static_cast<double>(delivered) / static_cast<double>(generated);
}

double RunMetrics::e2ed_ms() const
{
    return delivered == 0 ? 0.0 : 1000.0 * e2ed_sum / static_cast<double>(delivered);
}

Simulator::Simulator(SimConfig cfg)
    : m_cfg(std::move(cfg))
{
    m_cfg.validate();
    m_R = effective_range(m_cfg.radio);
    m_bs = m_cfg.base_station();
    m_rng_mob = make_rng(m_cfg.seed, Stream::mobility);
    m_rng_traffic = make_rng(m_cfg.seed, Stream::traffic);
    m_rng_channel = make_rng(m_cfg.seed, Stream::channel);
    m_rng_protocol = make_rng(m_cfg.seed, Stream::protocol);
    m_total_steps = static_cast<std::uint64_t>(std::llround(m_cfg.duration / m_cfg.tick));

    TrackingConfig tc;
    tc.R = m_R;
    tc.velocity_tol = m_cfg.velocity_tol;
    tc.mode = m_cfg.protocol == Protocol::tarraq ? TrackingMode::kalman : TrackingMode::timeout;
    tc.timeout = m_cfg.timeout_factor * m_cfg.fixed_si;
    tc.kf = m_cfg.kf;

    const double volume = m_cfg.box.x * m_cfg.box.y * m_cfg.box.z;
    m_nodes.resize(static_cast<std::size_t>(m_cfg.n_nodes));
    for (std::size_t i = 0; i < m_nodes.size(); ++i)
    {
        NodeRuntime &n = m_nodes[i];
        n.id = static_cast<NodeId>(i);
        if (m_cfg.mobility == MobilityKind::rwp)
        {
            n.mob = rwp_init(m_cfg.box, m_cfg.speeds, m_rng_mob);
        }
        else
        {
            n.mob.position = m_cfg.static_positions[i];
            n.mob.waypoint = n.mob.position;
        }
        n.table = NeighborTable(tc);
        n.row.owner = n.id;
        n.rho = {m_cfg.n_nodes / volume, m_cfg.n_nodes / volume};
        n.v_l = {m_cfg.speeds.v_l, m_cfg.speeds.v_l};
        n.v_u = {m_cfg.speeds.v_u, m_cfg.speeds.v_u};
        n.si = m_cfg.fixed_si;
        n.next_hello = uniform(m_rng_protocol, 0.0, n.si);
    }
    m_metrics.energy.assign(m_nodes.size(), 0.0);
    std::exponential_distribution<double> gap(m_cfg.session_rate > 0.0 ? m_cfg.session_rate : 1.0);
    m_next_session = m_cfg.session_rate > 0.0 ? m_cfg.warmup + gap(m_rng_traffic) : m_cfg.duration + 1.0;
}

void Simulator::charge(std::size_t node, double bits, double d, bool tx)
{
    const auto cost = energy_tx_rx(bits, d, m_cfg.radio);
    const double e = tx ? cost.e_tx : cost.e_rx;
    m_nodes[node].energy_used += e;
    if (counting())
    {
        m_metrics.energy[node] += e;
        m_metrics.energy_total += e;
        m_metrics.bits_elec += bits;
        if (tx)
        {
            m_metrics.bits_amp += bits * std::pow(d, m_cfg.radio.alpha);
        }
    }
}

void Simulator::advance_mobility()
{
    if (m_cfg.mobility != MobilityKind::rwp)
    {
        return;
    }
    for (auto &n : m_nodes)
    {
        n.mob = rwp_step(n.mob, m_cfg.box, m_cfg.speeds, m_cfg.tick, m_rng_mob);
    }
}

void Simulator::generate_traffic()
{
    const double horizon = m_now + m_cfg.tick;
    std::exponential_distribution<double> gap(m_cfg.session_rate > 0.0 ? m_cfg.session_rate : 1.0);
    std::uniform_int_distribution<int> pick(0, m_cfg.n_nodes - 1);
    const double bits = 8.0 * m_cfg.packet_bytes;
    const double interval = bits / m_cfg.cbr_bps;
    const int count = std::max(1, static_cast<int>(std::ceil(m_cfg.cbr_bps * m_cfg.burst / bits - 1e-9)));
    while (m_next_session < horizon && m_next_session < m_cfg.duration)
    {
        const int src = m_cfg.fixed_source ? *m_cfg.fixed_source : pick(m_rng_traffic);
        for (int k = 0; k < count; ++k)
        {
            Packet p;
            p.seq = m_next_seq++;
            p.src = src;
            p.size_bits = bits;
            p.created = m_next_session + k * interval;
            p.ready = p.created;
            m_pending.push_back(std::move(p));
        }
        m_next_session += gap(m_rng_traffic);
    }
    auto due = std::stable_partition(m_pending.begin(), m_pending.end(),
                                     [&](const Packet &p) { return p.created < horizon; });
    for (auto it = m_pending.begin(); it != due; ++it)
    {
        if (it->created >= m_cfg.duration)
        {
            continue;
        }
        ++m_metrics.generated;
        m_nodes[static_cast<std::size_t>(it->src)].buffer.push_back(std::move(*it));
    }
    m_pending.erase(m_pending.begin(), due);
}

void Simulator::update_sensing(NodeRuntime &n)
{
    const auto &entries = n.table.entries();
    const double sphere = 4.0 / 3.0 * kPi * m_R * m_R * m_R;
    if (auto r = dewma_update(n.rho, static_cast<double>(entries.size()) / sphere))
    {
        n.rho = *r;
    }
    double lo = m_cfg.speeds.v_l;
    double hi = m_cfg.speeds.v_u;
    if (!entries.empty())
    {
        lo = std::numeric_limits<double>::infinity();
        hi = 0.0;
        for (const auto &[id, e] : entries)
        {
            const double s = norm(e.last_velocity);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    if (auto r = dewma_update(n.v_l, lo))
    {
        n.v_l = *r;
    }
    if (auto r = dewma_update(n.v_u, hi))
    {
        n.v_u = *r;
    }

    AnalyticScenario scn;
    scn.rho = n.rho.est;
    scn.R = m_R;
    scn.v_c = n.mob.speed;
    scn.v_l = std::min(n.v_l.est, n.v_u.est);
    scn.v_u = std::max({n.v_u.est, n.v_l.est, scn.v_c});
    if (scn.v_u <= scn.v_l)
    {
        scn.v_u = scn.v_l + 0.1;
    }
    const double key[4]{scn.rho, scn.v_l, scn.v_u, scn.v_c};
    if (n.ncr == 0.0 || changed(key[0], n.ncr_key[0]) || changed(key[1], n.ncr_key[1]) ||
        changed(key[2], n.ncr_key[2]) || changed(key[3], n.ncr_key[3]))
    {
        n.ncr = change_rate(scn, kRuntimeQuadrature);
        std::copy(std::begin(key), std::end(key), std::begin(n.ncr_key));
    }
    const auto eta = event_rate(n.ncr, m_cfg.sensing.tar);
    if (!eta || *eta <= 0.0)
    {
        n.si = m_cfg.sensing.t_s_max;
        return;
    }
    n.si = resilient_interval(*eta, m_cfg.sensing).t_s;
}

void Simulator::send_hello(std::size_t i, std::vector<std::size_t> &replies)
{
    NodeRuntime &n = m_nodes[i];
    const auto removed = n.table.audit(n.mob.position, n.mob.velocity, m_now);
    if (!removed.empty())
    {
        n.row.prune(n.table.ids());
        ++n.epoch;
    }
    if (m_cfg.resilient())
    {
        update_sensing(n);
    }
    else
    {
        n.si = m_cfg.fixed_si;
    }
    if (m_cfg.protocol != Protocol::tarraq)
    {
        n.table.set_timeout(m_cfg.timeout_factor * n.si);
    }

    HelloMessage msg;
    msg.sender = n.id;
    msg.timestamp = m_now;
    msg.position = n.mob.position;
    msg.velocity = n.mob.velocity;
    msg.neighbors = n.table.ids();
    msg.ncr = n.ncr;
    msg.energy = m_cfg.initial_energy - n.energy_used;
    const double d_bs = distance(n.mob.position, m_bs);
    if (d_bs <= m_R)
    {
        msg.max_q = q_fixed_point(m_cfg.qrouting.weights.r_max, 0.0, 0.0, m_cfg.qrouting.form);
        msg.best_relay = static_cast<NodeId>(m_nodes.size());
        msg.best_relay_residual = time_to_exit(n.mob.position - m_bs, n.mob.velocity, m_R);
        msg.min_neighbor_dest = 0.0;
    }
    else
    {
        msg.max_q = n.row.max_q();
        msg.best_relay = n.row.argmax();
        if (msg.best_relay)
        {
            const NeighborEntry *e = n.table.find(*msg.best_relay);
            msg.best_relay_residual = e != nullptr ? std::max(e->expiration - m_now, 0.0) : 0.0;
            if (e == nullptr)
            {
                msg.best_relay.reset();
            }
        }
        msg.min_neighbor_dest = std::numeric_limits<double>::infinity();
        for (const auto &[id, e] : n.table.entries())
        {
            msg.min_neighbor_dest =
                std::min(msg.min_neighbor_dest, distance(n.table.estimated_position(e, m_now), m_bs));
        }
    }
    if (!std::isfinite(msg.best_relay_residual))
    {
        msg.best_relay_residual = 1e9;
    }

    const double bits =
        8.0 * (m_cfg.hello_base_bytes + m_cfg.hello_per_neighbor_bytes * static_cast<double>(msg.neighbors.size()));
    ++m_hello_audit;
    if (counting())
    {
        ++m_metrics.hello_count;
        m_metrics.hello_bits += bits;
    }
    charge(i, bits, m_R, true);

    for (std::size_t j = 0; j < m_nodes.size(); ++j)
    {
        if (j == i)
        {
            continue;
        }
        NodeRuntime &r = m_nodes[j];
        const double d = distance(n.mob.position, r.mob.position);
        if (d > m_R)
        {
            continue;
        }
        if (!tx_success(m_cfg.radio, d, m_rng_channel))
        {
            continue;
        }
        charge(j, bits, d, false);
        const auto outcome = r.table.on_hello(msg, r.mob.position, r.mob.velocity, m_now, r.si);
        if (outcome == HelloOutcome::created || outcome == HelloOutcome::updated)
        {
            ++r.epoch;
        }
        if (outcome == HelloOutcome::created && m_cfg.replies())
        {
            replies.push_back(j);
        }
    }
    n.next_hello = m_now + n.si;
}

void Simulator::run_hellos()
{
    std::vector<char> sent(m_nodes.size(), 0);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < m_nodes.size(); ++i)
    {
        if (m_nodes[i].next_hello <= m_now + 1e-12)
        {
            queue.push_back(i);
        }
    }
    while (!queue.empty())
    {
        std::vector<std::size_t> replies;
        for (std::size_t i : queue)
        {
            if (sent[i])
            {
                continue;
            }
            sent[i] = 1;
            send_hello(i, replies);
        }
        std::sort(replies.begin(), replies.end());
        replies.erase(std::unique(replies.begin(), replies.end()), replies.end());
        queue = std::move(replies);
    }
}

NodeContext Simulator::build_context(const NodeRuntime &n, const std::vector<NodeId> &excluded) const
{
    NodeContext ctx;
    ctx.id = n.id;
    ctx.R = m_R;
    ctx.d_iD = distance(n.mob.position, m_bs);
    ctx.destination_in_range = ctx.d_iD <= m_R;
    ctx.neighbors = n.table.ids();
    ctx.neighbors.push_back(n.id);
    std::sort(ctx.neighbors.begin(), ctx.neighbors.end());
    for (const auto &[id, e] : n.table.entries())
    {
        if (std::find(excluded.begin(), excluded.end(), id) != excluded.end())
        {
            continue;
        }
        const Vec3 pj = n.table.estimated_position(e, m_now);
        const double d_ij = std::max(distance(pj, n.mob.position), m_cfg.radio.epsilon);
        if (d_ij > m_R)
        {
            continue;
        }
        Candidate c;
        c.id = id;
        c.residual_ld = e.expiration - m_now;
        c.d_ij = d_ij;
        c.d_jD = distance(pj, m_bs);
        c.neighbors = e.advertised;
        c.ncr = e.ncr;
        c.max_q = e.max_q;
        if (e.best_relay)
        {
            c.residual_best = e.best_relay_residual;
        }
        c.min_neighbor_dest = e.min_neighbor_dest;
        c.energy = e.energy;
        ctx.candidates.push_back(std::move(c));
    }
    return ctx;
}

Decision Simulator::decide(NodeRuntime &n, const std::vector<NodeId> &excluded, const std::vector<NodeId> &visited)
{
    if (!n.table.expire(m_now).empty())
    {
        n.row.prune(n.table.ids());
        ++n.epoch;
    }
    std::vector<NodeId> skip = excluded;
    skip.insert(skip.end(), visited.begin(), visited.end());
    Decision d;
    if (m_cfg.protocol == Protocol::tarraq)
    {
        d = select_relay(n.row, build_context(n, skip), m_cfg.qrouting, m_rng_protocol);
        if (d.kind == DecisionKind::carry && !visited.empty())
        {
            // Greedy recovery may revisit a node, but only with strict geographic progress.
            d = baseline_greedy(build_context(n, excluded));
        }
    }
    else
    {
        d = baseline_greedy(build_context(n, skip));
    }
    if (counting() && d.kind == DecisionKind::forward)
    {
        ++m_metrics.decisions;
        if (d.converged)
        {
            ++m_metrics.decisions_converged;
        }
    }
    return d;
}

void Simulator::process_packets()
{
    struct Work
    {
        double ready;
        std::uint64_t seq;
        std::size_t node;
        Packet packet;
        bool operator>(const Work &o) const { return ready != o.ready ? ready > o.ready : seq > o.seq; }
    };
    std::priority_queue<Work, std::vector<Work>, std::greater<>> heap;
    for (std::size_t i = 0; i < m_nodes.size(); ++i)
    {
        for (auto &p : m_nodes[i].buffer)
        {
            const double ready = p.ready;
            const auto seq = p.seq;
            heap.push(Work{ready, seq, i, std::move(p)});
        }
        m_nodes[i].buffer.clear();
    }
    const double horizon = m_now + m_cfg.tick;
    const auto bs_id = static_cast<NodeId>(m_nodes.size());

    while (!heap.empty())
    {
        Work w = heap.top();
        heap.pop();
        Packet p = std::move(w.packet);
        std::size_t i = w.node;
        if (p.cache_deadline && m_now > *p.cache_deadline)
        {
            ++m_metrics.dropped_cache;
            continue;
        }
        if (p.hops >= m_cfg.ttl)
        {
            ++m_metrics.dropped_ttl;
            continue;
        }
        double t = std::max(p.ready, m_now);
        bool moved = false;
        bool delivered = false;
        std::size_t next = i;
        for (std::size_t guard = 0; guard <= m_nodes.size() && !moved; ++guard)
        {
            NodeRuntime &n = m_nodes[i];
            const Decision d = decide(n, p.excluded, p.visited);
            if (d.kind == DecisionKind::carry)
            {
                break;
            }
            const bool to_bs = d.kind == DecisionKind::deliver;
            const NodeId target = to_bs ? bs_id : d.next;
            const Vec3 target_pos = to_bs ? m_bs : m_nodes[target].mob.position;
            const double dist = std::max(distance(n.mob.position, target_pos), m_cfg.radio.epsilon);
            bool ok = false;
            for (int attempt = 0; attempt <= m_cfg.retry_limit && !ok; ++attempt)
            {
                if (counting())
                {
                    ++m_metrics.data_tx;
                }
                charge(i, p.size_bits, dist, true);
                t += m_cfg.service_time;
                p.e2ed += m_cfg.service_time;
                ok = dist <= m_R && tx_success(m_cfg.radio, dist, m_rng_channel);
            }
            if (ok)
            {
                moved = true;
                ++p.hops;
                if (to_bs)
                {
                    delivered = true;
                }
                else
                {
                    charge(target, p.size_bits, dist, false);
                    p.visited.push_back(n.id);
                    next = target;
                }
                break;
            }
            if (counting())
            {
                ++m_metrics.routing_errors;
            }
            if (to_bs)
            {
                break;
            }
            if (n.table.remove(target))
            {
                n.row.prune(n.table.ids());
                ++n.epoch;
            }
            p.excluded.push_back(target);
        }
        p.ready = t;
        if (delivered)
        {
            ++m_metrics.delivered;
            m_metrics.e2ed_sum += p.e2ed;
            m_metrics.hops += static_cast<std::uint64_t>(p.hops);
            continue;
        }
        if (moved)
        {
            p.excluded.clear();
            p.cache_deadline.reset();
            if (p.ready < horizon)
            {
                const double ready = p.ready;
                const auto seq = p.seq;
                heap.push(Work{ready, seq, next, std::move(p)});
            }
            else
            {
                m_nodes[next].buffer.push_back(std::move(p));
            }
            continue;
        }
        // Carry: wait for the topology to change.
        p.excluded.clear();
        if (!p.cache_deadline)
        {
            p.cache_deadline = m_now + m_cfg.max_cache;
        }
        p.ready = std::max(p.ready, horizon);
        m_nodes[i].buffer.push_back(std::move(p));
    }
}

bool Simulator::step()
{
    if (m_steps >= m_total_steps)
    {
        return false;
    }
    m_now = static_cast<double>(m_steps) * m_cfg.tick;
    if (m_steps > 0)
    {
        advance_mobility();
    }
    for (auto &n : m_nodes)
    {
        if (!n.table.expire(m_now).empty())
        {
            n.row.prune(n.table.ids());
            ++n.epoch;
        }
    }
    generate_traffic();
    run_hellos();
    process_packets();
    if (m_observer)
    {
        m_observer(*this);
    }
    ++m_steps;
    return true;
}

RunMetrics Simulator::run()
{
    while (step())
    {
    }
    return m_metrics;
}

RunMetrics run_simulation(const SimConfig &cfg)
{
    Simulator sim(cfg);
    return sim.run();
}

} // namespace tarraq
