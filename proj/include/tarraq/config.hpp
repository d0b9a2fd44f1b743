#pragma once

#include "tarraq/sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tarraq {

/// One analytic configuration: node count in a cube of side L.
struct AnalyticsCase
{
    std::string name;
    double n_nodes{40.0};
    double L{400.0};
    double R{150.0};
    double v_l{5.0};
    double v_u{40.0};
    double v_c{0.0};

    AnalyticScenario scenario() const;
};

struct AnalyticsConfig
{
    std::vector<AnalyticsCase> cases;
    std::size_t grid_points{200};
};

struct ValidateConfig
{
    std::vector<AnalyticsCase> cases;
    double duration{1800.0};
    double warmup{100.0};
    int seeds{20};
    double ks_tol{0.03};
    double rate_tol{0.05};
    // Gauss-Legendre nodes for mixing over the central node's speed.
    int mixture_points{8};
    std::size_t grid_points{400};
};

struct ExperimentConfig
{
    std::string name{"experiment"};
    std::vector<Protocol> protocols{Protocol::tarraq};
    std::vector<double> deltas{0.55};
    // SINR thresholds in dB.
    std::vector<double> gamma_th_db{-3.0};
    std::vector<double> v_max{20.0};
    int replications{10};
    // "normal" or "bootstrap".
    std::string ci{"normal"};
    double ci_level{0.90};
    int bootstrap_samples{2000};
};

struct SweepSiConfig
{
    std::vector<double> deltas;
    std::vector<double> eta;
};

struct HarnessConfig
{
    SimConfig sim;
    AnalyticsConfig analytics;
    ValidateConfig validate;
    ExperimentConfig experiment;
    SweepSiConfig sweep_si;
};

double db_to_linear(double db);
double linear_to_db(double x);

/// Parses a JSON document. Unknown keys, wrong types and invalid values raise ConfigError.
HarnessConfig parse_config(const std::string &text);

HarnessConfig load_config(const std::string &path);

/// Defaults used when no file is given.
HarnessConfig default_config();

/// Copies the scenario's node count into the radio model.
void sync_radio(SimConfig &cfg);

} // namespace tarraq
