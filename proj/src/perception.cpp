#include "tarraq/perception.hpp"

#include "tarraq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tarraq {

void SensingConfig::validate() const
{
    if (!(t_s_min > 0.0 && t_s_min < t_s_max))
    {
        throw std::invalid_argument("sensing config: need 0 < t_s_min < t_s_max");
    }
    if (!(tar >= 0.0))
    {
        throw std::invalid_argument("sensing config: tar must be non-negative");
    }
    if (!(delta >= 0.0 && delta <= 1.0))
    {
        throw std::invalid_argument("sensing config: delta outside [0, 1]");
    }
}

std::optional<SmoothedParam> dewma_update(const SmoothedParam &p, double sample)
{
    if (!(sample > 0.0) || !(p.est > 0.0))
    {
        return std::nullopt;
    }
    const double tau = std::min(p.est / sample, sample / p.est);
    return SmoothedParam{tau * p.est + (1.0 - tau) * sample, sample};
}

double sensing_delay_ratio(double x)
{
    if (x < 1e-2)
    {
        const double x2 = x * x;
        return 0.5 + x / 12.0 * (1.0 - x2 / 60.0 * (1.0 - x2 / 42.0));
    }
    return -1.0 / std::expm1(-x) - 1.0 / x;
}

double expected_sensing_delay(double eta_e, double t_s)
{
    if (!(eta_e > 0.0) || !(t_s > 0.0))
    {
        throw std::invalid_argument("expected_sensing_delay: rate and interval must be positive");
    }
    const double x = eta_e * t_s;
    if (x < 1e-6)
    {
        return t_s / 2.0 + eta_e * t_s * t_s / 12.0;
    }
    return t_s * sensing_delay_ratio(x);
}

double sensing_delay_cdf(double eta_e, double t_s, double t)
{
    if (t <= 0.0)
    {
        return 0.0;
    }
    if (t >= t_s)
    {
        return 1.0;
    }
    const double x = eta_e * t_s;
    return std::exp(-x) * std::expm1(eta_e * t) / -std::expm1(-x);
}

double sensing_root(double delta)
{
    if (!(delta > 0.5 && delta < 1.0))
    {
        throw std::domain_error("sensing_root: delta must lie in (0.5, 1)");
    }
    const double hi = 2.0 / (1.0 - delta) + 2.0;
    return numerics::bisect([delta](double x) { return sensing_delay_ratio(x) - delta; }, 0.0, hi, 1e-15);
}

IntervalResult resilient_interval(double eta_e, const SensingConfig &cfg)
{
    if (!(eta_e > 0.0))
    {
        throw std::invalid_argument("resilient_interval: event rate must be positive");
    }
    IntervalResult r;
    if (cfg.delta <= 0.5)
    {
        r.delta_infeasible = true;
        r.t_s = cfg.t_s_min;
        r.unclamped = cfg.t_s_min;
        return r;
    }
    if (cfg.delta >= 1.0)
    {
        r.delta_infeasible = true;
        r.t_s = cfg.t_s_max;
        r.unclamped = cfg.t_s_max;
        return r;
    }
    r.x = sensing_root(cfg.delta);
    r.unclamped = r.x / eta_e;
    r.t_s = std::clamp(r.unclamped, cfg.t_s_min, cfg.t_s_max);
    r.clamped = r.t_s != r.unclamped;
    return r;
}

std::optional<double> event_rate(double ncr, double tar)
{
    if (ncr < 0.0 || tar < 0.0)
    {
        throw std::invalid_argument("event_rate: rates must be non-negative");
    }
    if (ncr == 0.0 && tar == 0.0)
    {
        return std::nullopt;
    }
    return std::min(ncr, tar);
}

double local_ncr(const AnalyticScenario &smoothed)
{
    return change_rate(smoothed);
}

} // namespace tarraq
