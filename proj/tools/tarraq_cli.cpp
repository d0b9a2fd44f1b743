#include "tarraq/config.hpp"
#include "tarraq/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kToleranceFailure = 1;
constexpr int kConfigError = 2;

struct Globals
{
    std::string config;
    std::string out{"out"};
    std::optional<std::uint64_t> seed;
    int jobs{1};
};

std::ofstream open_file(const std::string &dir, const std::string &name)
{
    std::filesystem::create_directories(dir);
    std::ofstream os(std::filesystem::path(dir) / name);
    if (!os)
    {
        throw std::runtime_error("cannot write " + name + " in " + dir);
    }
    return os;
}

tarraq::HarnessConfig load(const Globals &g)
{
    tarraq::HarnessConfig h = g.config.empty() ? tarraq::default_config() : tarraq::load_config(g.config);
    if (g.seed)
    {
        h.sim.seed = *g.seed;
    }
    return h;
}

int cmd_analytics(const Globals &g)
{
    const auto h = load(g);
    const auto rows = tarraq::run_analytics(h.analytics, g.out, g.jobs);
    tarraq::write_analytics_summary(std::cout, rows);
    return kOk;
}

int cmd_validate(const Globals &g)
{
    const auto h = load(g);
    const auto rows = tarraq::run_validation(h.validate, h.sim.seed, g.out, g.jobs);
    tarraq::write_validation_summary(std::cout, rows);
    bool ok = true;
    for (const auto &r : rows)
    {
        ok = ok && r.pass;
    }
    if (!ok)
    {
        std::cerr << "validate: tolerance exceeded (KS <= " << h.validate.ks_tol << ", rate ratio within "
                  << h.validate.rate_tol << ")\n";
    }
    return ok ? kOk : kToleranceFailure;
}

int cmd_simulate(const Globals &g)
{
    const auto h = load(g);
    const auto result = tarraq::run_experiment(h.sim, h.experiment, h.sim.seed, g.jobs,
                                               [](const std::string &msg) { std::cerr << "replication failed: " << msg << '\n'; });
    auto raw = open_file(g.out, h.experiment.name + "_raw.csv");
    tarraq::write_raw_csv(raw, result.rows);
    auto agg = open_file(g.out, h.experiment.name + "_aggregate.csv");
    tarraq::write_aggregate_csv(agg, result.aggregate);
    tarraq::write_aggregate_csv(std::cout, result.aggregate);
    if (!result.complete())
    {
        std::cerr << "simulate: " << result.errors.size() << " replication(s) failed; affected grid points are incomplete\n";
        return kToleranceFailure;
    }
    return kOk;
}

int cmd_sweep_si(const Globals &g)
{
    const auto h = load(g);
    const auto rows = tarraq::sweep_si(h.sweep_si, h.sim.sensing);
    auto os = open_file(g.out, "sweep_si.csv");
    tarraq::write_si_csv(os, rows);
    tarraq::write_si_csv(std::cout, rows);
    return kOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Topology-aware resilient routing: analytics, validation and routing experiments"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    auto *seed_opt = app.add_option("--seed", seed, "Base seed (overrides the config)");
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    auto *analytics = app.add_subcommand("analytics", "Emit NIT/NCIT curves and the rate summary");
    auto *validate = app.add_subcommand("validate", "Monte Carlo check of the NIT/NCIT distributions");
    auto *simulate = app.add_subcommand("simulate", "Run the routing experiment grid");
    auto *sweep = app.add_subcommand("sweep-si", "Tabulate the resilient sensing interval");
    for (auto *sub : {analytics, validate, simulate, sweep})
    {
        sub->fallthrough();
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    if (*seed_opt)
    {
        g.seed = seed;
    }

    try
    {
        if (*analytics)
        {
            return cmd_analytics(g);
        }
        if (*validate)
        {
            return cmd_validate(g);
        }
        if (*simulate)
        {
            return cmd_simulate(g);
        }
        return cmd_sweep_si(g);
    }
    catch (const tarraq::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kToleranceFailure;
    }
}
