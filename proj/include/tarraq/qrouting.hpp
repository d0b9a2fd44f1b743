#pragma once

#include "tarraq/rng.hpp"
#include "tarraq/tracking.hpp"

#include <array>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tarraq {

struct RewardWeights
{
    std::array<double, 3> phi{0.4, 0.2, 0.4};
    double r_max{10.0};
    double r_min{-10.0};
    double sigma{1.0};
    // Optional residual-energy term, off by default.
    double energy_weight{0.0};

    void validate() const;
};

enum class QUpdateForm
{
    printed,
    standard,
};

QUpdateForm parse_q_update_form(const std::string &s);
std::string to_string(QUpdateForm f);

struct QRoutingConfig
{
    RewardWeights weights;
    double tau0{5.0};
    int k_max{500};
    double epsilon{1e-4};
    double link_cap{60.0};
    double ncr_floor{0.01};
    double gamma_default{0.9};
    double alpha_min{0.25};
    double alpha_max{0.75};
    QUpdateForm form{QUpdateForm::printed};
};

struct QEntry
{
    double q{0.0};
    double alpha{0.0};
    double gamma{0.0};
    // Magnitude of the most recent change; infinite until the entry is first updated.
    double last_delta{std::numeric_limits<double>::infinity()};
};

struct QTableRow
{
    NodeId owner{0};
    std::map<NodeId, QEntry> entries;

    /// Drops entries whose id is not in the (sorted) list.
    void prune(const std::vector<NodeId> &alive);
    /// Inserts missing entries with Q = 0.
    void ensure(const std::vector<NodeId> &ids);
    double max_q() const;
    std::optional<NodeId> argmax() const;
};

/// One forwarding candidate as seen by the deciding node.
struct Candidate
{
    NodeId id{0};
    double residual_ld{0.0};
    double d_ij{0.0};
    double d_jD{0.0};
    std::vector<NodeId> neighbors;
    double ncr{0.0};
    double max_q{0.0};
    std::optional<double> residual_best;
    double min_neighbor_dest{std::numeric_limits<double>::infinity()};
    double energy{0.0};
    bool is_destination{false};
};

struct NodeContext
{
    NodeId id{0};
    double d_iD{0.0};
    double R{0.0};
    // Sorted neighbor ids of the deciding node.
    std::vector<NodeId> neighbors;
    std::vector<Candidate> candidates;
    bool destination_in_range{false};
};

double link_metric(double residual_ld, double cap);

double neighbor_metric(const std::vector<NodeId> &n_j, const std::vector<NodeId> &n_i, double ncr_j,
                       double ncr_floor = 0.01);

double distance_metric(double d_ij, double d_iD, double d_jD, double R, double sigma);

bool is_local_minimum(const NodeContext &ctx, const Candidate &c);

/// Reward of choosing ctx.candidates[j].
double reward(const NodeContext &ctx, std::size_t j, const RewardWeights &w, const QRoutingConfig &cfg = {});

/// Softmax over residual link durations with temperature tau0 / log2(1 + t).
std::vector<double> softmax_probabilities(const std::vector<double> &residuals, double tau0, int t);

std::size_t select_action(const std::vector<double> &residuals, double tau0, int t, Rng &rng);

/// (alpha, gamma) from the residual link durations. Unclamped.
std::pair<double, double> adaptive_params(double residual_ij, std::optional<double> residual_jk_best,
                                          double gamma_default = 0.9);

double q_update_value(double q, double r, double max_q_next, double alpha, double gamma, QUpdateForm form);

QTableRow q_update(QTableRow row, NodeId a, double r, double max_q_next, double alpha, double gamma,
                   QUpdateForm form = QUpdateForm::printed);

/// Fixed point of the selected update form for a constant target.
double q_fixed_point(double r, double max_q_next, double gamma, QUpdateForm form);

enum class DecisionKind
{
    forward,
    deliver,
    carry,
};

struct Decision
{
    DecisionKind kind{DecisionKind::carry};
    NodeId next{0};
    int iterations{0};
    bool converged{false};
};

/// Iterative Q-learning relay choice. Mutates the row in place.
Decision select_relay(QTableRow &row, const NodeContext &ctx, const QRoutingConfig &cfg, Rng &rng);

/// Closest-to-destination neighbor that makes progress; lowest id on ties.
Decision baseline_greedy(const NodeContext &ctx);

void write_q_dump(std::ostream &os, const std::vector<QTableRow> &rows, bool header = true);

} // namespace tarraq
