#include "tarraq/qrouting.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace tarraq {

void RewardWeights::validate() const
{
    for (double p : phi)
    {
        if (!(p > 0.0 && p < 1.0))
        {
            throw std::invalid_argument("reward weights: each phi must lie in (0, 1)");
        }
    }
    if (!(r_min < 0.0 && 0.0 < r_max))
    {
        throw std::invalid_argument("reward weights: need r_min < 0 < r_max");
    }
    if (!(sigma > 0.0))
    {
        throw std::invalid_argument("reward weights: sigma must be positive");
    }
}

QUpdateForm parse_q_update_form(const std::string &s)
{
    if (s == "printed")
    {
        return QUpdateForm::printed;
    }
    if (s == "standard")
    {
        return QUpdateForm::standard;
    }
    throw std::invalid_argument("unknown q_update_form: " + s);
}

std::string to_string(QUpdateForm f)
{
    return f == QUpdateForm::printed ? "printed" : "standard";
}

void QTableRow::prune(const std::vector<NodeId> &alive)
{
    std::erase_if(entries, [&](const auto &kv) { return !std::binary_search(alive.begin(), alive.end(), kv.first); });
}

void QTableRow::ensure(const std::vector<NodeId> &ids)
{
    for (NodeId id : ids)
    {
        entries.try_emplace(id);
    }
}

double QTableRow::max_q() const
{
    double m = 0.0;
    bool any = false;
    for (const auto &[id, e] : entries)
    {
        if (!any || e.q > m)
        {
            m = e.q;
            any = true;
        }
    }
    return m;
}

std::optional<NodeId> QTableRow::argmax() const
{
    std::optional<NodeId> best;
    double m = 0.0;
    for (const auto &[id, e] : entries)
    {
        if (!best || e.q > m)
        {
            m = e.q;
            best = id;
        }
    }
    return best;
}

double link_metric(double residual_ld, double cap)
{
    if (!std::isfinite(residual_ld))
    {
        return cap;
    }
    return std::min(residual_ld, cap);
}

double neighbor_metric(const std::vector<NodeId> &n_j, const std::vector<NodeId> &n_i, double ncr_j,
                       double ncr_floor)
{
    std::size_t unique = 0;
    for (NodeId id : n_j)
    {
        if (std::find(n_i.begin(), n_i.end(), id) == n_i.end())
        {
            ++unique;
        }
    }
    return static_cast<double>(unique) / std::max(ncr_j, ncr_floor);
}

double distance_metric(double d_ij, double d_iD, double d_jD, double R, double sigma)
{
    if (!(d_ij > 0.0))
    {
        throw std::invalid_argument("distance_metric: zero separation");
    }
    const double z = (R / d_ij) * (R / d_ij) - 1.0;
    const double s2 = sigma * sigma;
    return z * (d_iD - d_jD) / s2 * std::exp(-z * z / (2.0 * s2));
}

bool is_local_minimum(const NodeContext &ctx, const Candidate &c)
{
    if (c.is_destination)
    {
        return false;
    }
    return std::min(c.d_jD, c.min_neighbor_dest) >= ctx.d_iD;
}

namespace {

std::array<double, 3> metrics_of(const NodeContext &ctx, const Candidate &c, const RewardWeights &w,
                                 const QRoutingConfig &cfg)
{
    return {link_metric(c.residual_ld, cfg.link_cap), neighbor_metric(c.neighbors, ctx.neighbors, c.ncr, cfg.ncr_floor),
            distance_metric(c.d_ij, ctx.d_iD, c.d_jD, ctx.R, w.sigma)};
}

} // namespace

double reward(const NodeContext &ctx, std::size_t j, const RewardWeights &w, const QRoutingConfig &cfg)
{
    const Candidate &c = ctx.candidates.at(j);
    if (c.is_destination)
    {
        return w.r_max;
    }
    if (is_local_minimum(ctx, c))
    {
        return w.r_min;
    }
    std::array<double, 3> norm{};
    double energy_norm = 0.0;
    for (const Candidate &o : ctx.candidates)
    {
        if (o.is_destination)
        {
            continue;
        }
        const auto m = metrics_of(ctx, o, w, cfg);
        for (std::size_t k = 0; k < 3; ++k)
        {
            norm[k] += std::fabs(m[k]);
        }
        energy_norm += std::fabs(o.energy);
    }
    const auto mine = metrics_of(ctx, c, w, cfg);
    double r = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
    {
        if (norm[k] > 0.0)
        {
            r += w.phi[k] * mine[k] / norm[k];
        }
    }
    if (w.energy_weight > 0.0 && energy_norm > 0.0)
    {
        r += w.energy_weight * c.energy / energy_norm;
    }
    return r;
}

std::vector<double> softmax_probabilities(const std::vector<double> &residuals, double tau0, int t)
{
    if (residuals.empty())
    {
        throw std::invalid_argument("softmax_probabilities: empty action space");
    }
    if (!(tau0 > 0.0) || t < 1)
    {
        throw std::invalid_argument("softmax_probabilities: need tau0 > 0 and t >= 1");
    }
    const double tau = tau0 / std::log2(1.0 + static_cast<double>(t));
    const double top = *std::max_element(residuals.begin(), residuals.end());
    std::vector<double> p(residuals.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < residuals.size(); ++i)
    {
        p[i] = std::exp((residuals[i] - top) / tau);
        sum += p[i];
    }
    for (double &x : p)
    {
        x /= sum;
    }
    return p;
}

std::size_t select_action(const std::vector<double> &residuals, double tau0, int t, Rng &rng)
{
    const auto p = softmax_probabilities(residuals, tau0, t);
    const double u = uniform(rng, 0.0, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
    {
        acc += p[i];
        if (u < acc)
        {
            return i;
        }
    }
    return p.size() - 1;
}

std::pair<double, double> adaptive_params(double residual_ij, std::optional<double> residual_jk_best,
                                          double gamma_default)
{
    const double alpha = std::exp(-std::max(residual_ij, 0.0));
    const double gamma =
        residual_jk_best ? 1.0 - std::exp(-std::max(*residual_jk_best, 0.0)) : gamma_default;
    return {alpha, gamma};
}

double q_update_value(double q, double r, double max_q_next, double alpha, double gamma, QUpdateForm form)
{
    if (form == QUpdateForm::printed)
    {
        return (1.0 - alpha) * q + alpha * (r + gamma * max_q_next - q);
    }
    return (1.0 - alpha) * q + alpha * (r + gamma * max_q_next);
}

double q_fixed_point(double r, double max_q_next, double gamma, QUpdateForm form)
{
    const double target = r + gamma * max_q_next;
    return form == QUpdateForm::printed ? 0.5 * target : target;
}

QTableRow q_update(QTableRow row, NodeId a, double r, double max_q_next, double alpha, double gamma,
                   QUpdateForm form)
{
    auto it = row.entries.find(a);
    if (it == row.entries.end())
    {
        throw std::invalid_argument("q_update: action not in row");
    }
    QEntry &e = it->second;
    const double next = q_update_value(e.q, r, max_q_next, alpha, gamma, form);
    e.last_delta = std::fabs(next - e.q);
    e.q = next;
    e.alpha = alpha;
    e.gamma = gamma;
    return row;
}

Decision select_relay(QTableRow &row, const NodeContext &ctx, const QRoutingConfig &cfg, Rng &rng)
{
    Decision d;
    if (ctx.destination_in_range)
    {
        d.kind = DecisionKind::deliver;
        return d;
    }
    const std::size_t n = ctx.candidates.size();
    std::vector<NodeId> ids(n);
    for (std::size_t j = 0; j < n; ++j)
    {
        ids[j] = ctx.candidates[j].id;
    }
    std::vector<NodeId> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    row.prune(sorted);
    if (n == 0)
    {
        return d;
    }
    row.ensure(sorted);

    std::vector<double> rewards(n);
    std::vector<double> residuals(n);
    std::vector<double> alphas(n);
    std::vector<double> gammas(n);
    std::vector<QEntry *> slots(n);
    bool all_min = true;
    for (std::size_t j = 0; j < n; ++j)
    {
        const Candidate &c = ctx.candidates[j];
        rewards[j] = reward(ctx, j, cfg.weights, cfg);
        all_min = all_min && rewards[j] == cfg.weights.r_min;
        residuals[j] = link_metric(c.residual_ld, cfg.link_cap);
        const auto [a, g] = adaptive_params(c.residual_ld, c.residual_best, cfg.gamma_default);
        alphas[j] = std::clamp(a, cfg.alpha_min, cfg.alpha_max);
        gammas[j] = g;
        slots[j] = &row.entries.at(c.id);
    }
    for (int k = 1; k <= cfg.k_max; ++k)
    {
        const std::size_t j = select_action(residuals, cfg.tau0, k, rng);
        const Candidate &c = ctx.candidates[j];
        QEntry &e = *slots[j];
        const double max_next = c.is_destination ? 0.0 : c.max_q;
        const double next = q_update_value(e.q, rewards[j], max_next, alphas[j], gammas[j], cfg.form);
        e.last_delta = std::fabs(next - e.q);
        e.q = next;
        e.alpha = alphas[j];
        e.gamma = gammas[j];
        d.iterations = k;
        double worst = 0.0;
        for (const QEntry *s : slots)
        {
            worst = std::max(worst, s->last_delta);
        }
        if (worst <= cfg.epsilon)
        {
            d.converged = true;
            break;
        }
    }
    if (all_min)
    {
        // Every candidate is a hole: the row keeps its values, the packet is carried.
        return d;
    }
    d.kind = DecisionKind::forward;
    d.next = *row.argmax();
    return d;
}

Decision baseline_greedy(const NodeContext &ctx)
{
    Decision d;
    if (ctx.destination_in_range)
    {
        d.kind = DecisionKind::deliver;
        return d;
    }
    const Candidate *best = nullptr;
    for (const Candidate &c : ctx.candidates)
    {
        if (!(c.d_jD < ctx.d_iD))
        {
            continue;
        }
        if (best == nullptr || c.d_jD < best->d_jD || (c.d_jD == best->d_jD && c.id < best->id))
        {
            best = &c;
        }
    }
    if (best != nullptr)
    {
        d.kind = DecisionKind::forward;
        d.next = best->id;
    }
    return d;
}

void write_q_dump(std::ostream &os, const std::vector<QTableRow> &rows, bool header)
{
    if (header)
    {
        os << "node,neighbor,q,alpha,gamma\n";
    }
    for (const auto &row : rows)
    {
        for (const auto &[id, e] : row.entries)
        {
            os << row.owner << ',' << id << ',' << e.q << ',' << e.alpha << ',' << e.gamma << '\n';
        }
    }
}

} // namespace tarraq
