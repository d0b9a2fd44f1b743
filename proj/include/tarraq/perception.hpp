#pragma once

#include "tarraq/analytics.hpp"

#include <optional>

namespace tarraq {

struct SmoothedParam
{
    double est{0.0};
    double last_sample{0.0};
};

struct SensingConfig
{
    double delta{0.55};
    double t_s_min{0.05};
    double t_s_max{5.0};
    double tar{1.0};

    void validate() const;
};

struct IntervalResult
{
    double t_s{0.0};
    double unclamped{0.0};
    double x{0.0};
    bool delta_infeasible{false};
    bool clamped{false};
};

/// Deviation-weighted smoothing step. Returns nullopt (state unchanged) for a non-positive sample.
std::optional<SmoothedParam> dewma_update(const SmoothedParam &p, double sample);

double expected_sensing_delay(double eta_e, double t_s);

/// CDF of the delay from an event to the next sensing tick.
double sensing_delay_cdf(double eta_e, double t_s, double t);

/// E_SD / T_S as a function of x = eta_e T_S.
double sensing_delay_ratio(double x);

/// Root x of sensing_delay_ratio(x) = delta, for delta in (0.5, 1).
double sensing_root(double delta);

IntervalResult resilient_interval(double eta_e, const SensingConfig &cfg);

/// min(ncr, tar), or nullopt when both are zero.
std::optional<double> event_rate(double ncr, double tar);

double local_ncr(const AnalyticScenario &smoothed);

} // namespace tarraq
