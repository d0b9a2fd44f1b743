#pragma once

#include "tarraq/config.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tarraq {

/// Runs fn(0..count-1) on up to `jobs` threads. Exceptions are rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> &fn);

/// Seed of one replication: base xor a hash of the grid key and replication index.
std::uint64_t derive_seed(std::uint64_t base, const std::string &key, std::uint64_t rep);

/// Fixed-precision number formatting used for every CSV cell.
std::string fmt_num(double x);

// ---- analytics ----

struct AnalyticsRow
{
    AnalyticsCase c;
    double eta_a_quadrature{0.0};
    // NaN where the closed form has no branch.
    double eta_a_closed_form{0.0};
    double eta_c{0.0};
    FitError nit_fit;
    FitError ncit_fit;
    double ncit_mass{0.0};
};

AnalyticsRow analyze_case(const AnalyticsCase &c, std::size_t grid_points,
                          DistributionCurve *nit = nullptr, DistributionCurve *ncit = nullptr);

/// Writes nit_<name>.csv, ncit_<name>.csv and analytics_summary.csv into out_dir.
std::vector<AnalyticsRow> run_analytics(const AnalyticsConfig &cfg, const std::string &out_dir, int jobs);

void write_analytics_summary(std::ostream &os, const std::vector<AnalyticsRow> &rows);

// ---- mobility Monte Carlo ----

/// Neighbor events seen by every node during one mobility-only run in a cube of side L.
struct EncounterLog
{
    std::vector<double> nit;
    std::vector<double> ncit;
    std::uint64_t arrivals{0};
    std::uint64_t departures{0};
    // Sum over nodes of the observed time.
    double node_seconds{0.0};
};

/// Exact sphere crossings of straight-line random waypoint legs (no time stepping).
EncounterLog simulate_encounters(const AnalyticsCase &c, double duration, double warmup, std::uint64_t seed);

/// Analytic reference for pooled samples: mixture over the central node's time-stationary speed law.
struct MixtureReference
{
    std::vector<double> t;
    std::vector<double> nit_cdf;
    std::vector<double> ncit_cdf;
    double eta_a{0.0};
    double eta_c{0.0};

    double nit_at(double x) const;
    double ncit_at(double x) const;
};

MixtureReference mixture_reference(const AnalyticsCase &c, int points, std::size_t grid_points, double t_max);

/// Kolmogorov-Smirnov distance between a sample and a CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)> &cdf);

struct ValidationRow
{
    std::string name;
    std::size_t nit_samples{0};
    std::size_t ncit_samples{0};
    double ks_nit{0.0};
    double ks_ncit{0.0};
    double eta_a_empirical{0.0};
    double eta_a_analytic{0.0};
    double eta_c_empirical{0.0};
    double eta_c_analytic{0.0};
    std::uint64_t arrivals{0};
    std::uint64_t departures{0};
    bool pass{false};

    double ratio_a() const { return eta_a_empirical / eta_a_analytic; }
    double ratio_c() const { return eta_c_empirical / eta_c_analytic; }
    /// |arrivals - departures| / max(arrivals, departures).
    double balance() const;
};

/// Pooled Monte Carlo over cfg.seeds runs per case. Writes validate_summary.csv and
/// per-case CDF comparison files when out_dir is non-empty.
std::vector<ValidationRow> run_validation(const ValidateConfig &cfg, std::uint64_t seed_base,
                                          const std::string &out_dir, int jobs);

void write_validation_summary(std::ostream &os, const std::vector<ValidationRow> &rows);

// ---- routing experiments ----

struct GridPoint
{
    Protocol protocol{Protocol::tarraq};
    double delta{0.55};
    double gamma_th_db{-3.0};
    double v_max{20.0};

    /// Key of the seed stream. Protocol and delta are left out so all protocols see the same scenarios.
    std::string seed_key() const;
};

struct RunRow
{
    std::uint64_t seed{0};
    GridPoint point;
    int replication{0};
    double pdr{0.0};
    double e2ed_ms{0.0};
    double hello_count{0.0};
    double hello_kbits{0.0};
    double energy_j{0.0};
};

struct Stat
{
    double mean{0.0};
    double half_width{0.0};
};

struct AggregateRow
{
    GridPoint point;
    int n{0};
    bool complete{true};
    Stat pdr;
    Stat e2ed_ms;
    Stat hello_count;
    Stat hello_kbits;
    Stat energy_j;
};

struct ExperimentResult
{
    std::vector<RunRow> rows;
    std::vector<AggregateRow> aggregate;
    std::vector<std::string> errors;

    bool complete() const { return errors.empty(); }
};

std::vector<GridPoint> expand_grid(const ExperimentConfig &x);

/// Configuration of one replication at a grid point.
SimConfig point_config(const SimConfig &base, const GridPoint &p, std::uint64_t seed);

double normal_quantile(double p);

Stat normal_ci(const std::vector<double> &xs, double level);

Stat bootstrap_ci(const std::vector<double> &xs, double level, int samples, std::uint64_t seed);

ExperimentResult run_experiment(const SimConfig &base, const ExperimentConfig &x, std::uint64_t seed_base,
                                int jobs, const std::function<void(const std::string &)> &log = {});

/// Header `seed,protocol,delta,gamma_th,v_max,pdr,e2ed_ms,hello_count,hello_kbits,energy_j`.
void write_raw_csv(std::ostream &os, const std::vector<RunRow> &rows);

void write_aggregate_csv(std::ostream &os, const std::vector<AggregateRow> &rows);

// ---- sensing interval table ----

struct SiRow
{
    double delta{0.0};
    double eta{0.0};
    double x{0.0};
    double t_s{0.0};
    double unclamped{0.0};
    bool clamped{false};
};

std::vector<SiRow> sweep_si(const SweepSiConfig &cfg, const SensingConfig &sensing);

void write_si_csv(std::ostream &os, const std::vector<SiRow> &rows);

} // namespace tarraq
