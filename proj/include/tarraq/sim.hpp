#pragma once

#include "tarraq/kinematics.hpp"
#include "tarraq/perception.hpp"
#include "tarraq/qrouting.hpp"
#include "tarraq/rng.hpp"
#include "tarraq/tracking.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tarraq {

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RadioModel
{
    double p_tx{1.0};
    double gamma_th{0.501187};
    double n0{1e-12};
    double alpha{2.0};
    double phi{0.9};
    double epsilon{1.0};
    double L{600.0};
    double N{40.0};
    // Scales the ambient interference term; 1 reproduces the raw formula.
    double interference_gain{5.371e-3};
    double e_elec{50e-9};
    double e_fs{10e-12};

    void validate() const;
    /// Ambient interference from the node count and region size.
    double interference() const;
    /// Success probability of one transmission at distance d (ignoring the range cut).
    double success_probability(double d) const;
};

double effective_range(const RadioModel &rm);

bool tx_success(const RadioModel &rm, double d, Rng &rng);

struct EnergyCost
{
    double e_tx{0.0};
    double e_rx{0.0};
};

EnergyCost energy_tx_rx(double bits, double d, const RadioModel &rm);

enum class Protocol
{
    tarraq,
    greedy_fixed,
    greedy_resilient,
};

Protocol parse_protocol(const std::string &s);
std::string to_string(Protocol p);

enum class MobilityKind
{
    rwp,
    fixed,
};

struct SimConfig
{
    Vec3 box{600.0, 600.0, 150.0};
    int n_nodes{40};
    SpeedBounds speeds{5.0, 20.0};
    double duration{300.0};
    double warmup{10.0};
    double tick{0.01};
    MobilityKind mobility{MobilityKind::rwp};
    // Positions used when mobility is fixed.
    std::vector<Vec3> static_positions;
    std::optional<Vec3> bs_position;

    RadioModel radio;

    double session_rate{1.0};
    double cbr_bps{1e6};
    double burst{0.1};
    int packet_bytes{1024};
    double max_cache{5.0};
    double service_time{0.002};
    int retry_limit{3};
    int ttl{64};
    // Restricts traffic to one source when set.
    std::optional<int> fixed_source;

    int hello_base_bytes{64};
    int hello_per_neighbor_bytes{4};
    double fixed_si{1.0};
    double timeout_factor{3.0};
    std::optional<bool> hello_reply;

    Protocol protocol{Protocol::tarraq};
    SensingConfig sensing;
    QRoutingConfig qrouting;
    double velocity_tol{0.1};
    KfParams kf;
    double initial_energy{1000.0};

    std::uint64_t seed{1};

    void validate() const;
    Vec3 base_station() const;
    bool replies() const;
    bool resilient() const { return protocol != Protocol::greedy_fixed; }
};

struct RunMetrics
{
    std::uint64_t generated{0};
    std::uint64_t delivered{0};
    std::uint64_t dropped_cache{0};
    std::uint64_t dropped_ttl{0};
    std::uint64_t hops{0};
    std::uint64_t data_tx{0};
    std::uint64_t routing_errors{0};
    std::uint64_t decisions{0};
    std::uint64_t decisions_converged{0};
    double e2ed_sum{0.0};
    std::uint64_t hello_count{0};
    double hello_bits{0.0};
    std::vector<double> energy;
    double energy_total{0.0};
    // Independent tallies of the two terms of the energy model.
    double bits_elec{0.0};
    double bits_amp{0.0};

    double pdr() const;
    double e2ed_ms() const;
};

struct Packet
{
    std::uint64_t seq{0};
    int src{0};
    double size_bits{0.0};
    double created{0.0};
    double ready{0.0};
    int hops{0};
    double e2ed{0.0};
    // Set while the packet waits at a node without a usable relay.
    std::optional<double> cache_deadline;
    std::vector<NodeId> excluded;
    // Nodes that already held the packet.
    std::vector<NodeId> visited;
};

struct NodeRuntime
{
    NodeId id{0};
    MobilityState mob;
    NeighborTable table;
    QTableRow row;
    SmoothedParam rho;
    SmoothedParam v_l;
    SmoothedParam v_u;
    double ncr{0.0};
    double si{1.0};
    double next_hello{0.0};
    std::uint64_t epoch{0};
    std::vector<Packet> buffer;
    double energy_used{0.0};

    // Cached change-rate inputs.
    double ncr_key[4]{0.0, 0.0, 0.0, 0.0};
};

class Simulator
{
public:
    explicit Simulator(SimConfig cfg);

    /// Advances one tick. Returns false once the configured duration is reached.
    bool step();
    RunMetrics run();

    double now() const { return m_now; }
    double range() const { return m_R; }
    const SimConfig &config() const { return m_cfg; }
    const std::vector<NodeRuntime> &nodes() const { return m_nodes; }
    const RunMetrics &metrics() const { return m_metrics; }
    /// Hello transmissions counted independently of RunMetrics (all times).
    std::uint64_t hello_audit() const { return m_hello_audit; }

    /// Called after every tick.
    void set_observer(std::function<void(const Simulator &)> obs) { m_observer = std::move(obs); }

private:
    void advance_mobility();
    void generate_traffic();
    void run_hellos();
    void send_hello(std::size_t i, std::vector<std::size_t> &replies);
    void update_sensing(NodeRuntime &n);
    void process_packets();
    NodeContext build_context(const NodeRuntime &n, const std::vector<NodeId> &excluded) const;
    Decision decide(NodeRuntime &n, const std::vector<NodeId> &excluded, const std::vector<NodeId> &visited);
    void charge(std::size_t node, double bits, double d, bool tx);
    bool counting() const { return m_now >= m_cfg.warmup; }

    SimConfig m_cfg;
    double m_R{0.0};
    Vec3 m_bs;
    double m_now{0.0};
    std::uint64_t m_steps{0};
    std::uint64_t m_total_steps{0};
    std::vector<NodeRuntime> m_nodes;
    RunMetrics m_metrics;
    Rng m_rng_mob;
    Rng m_rng_traffic;
    Rng m_rng_channel;
    Rng m_rng_protocol;
    double m_next_session{0.0};
    std::vector<Packet> m_pending;
    std::uint64_t m_next_seq{0};
    std::uint64_t m_hello_audit{0};
    std::function<void(const Simulator &)> m_observer;
};

RunMetrics run_simulation(const SimConfig &cfg);

} // namespace tarraq
