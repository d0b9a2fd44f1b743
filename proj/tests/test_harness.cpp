#include "tarraq/harness.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace tarraq;

namespace {

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
        out.push_back(cell);
    }
    return out;
}

SimConfig tiny_sim()
{
    SimConfig cfg;
    cfg.n_nodes = 12;
    cfg.duration = 25.0;
    cfg.warmup = 5.0;
    return cfg;
}

ExperimentConfig tiny_experiment()
{
    ExperimentConfig x;
    x.protocols = {Protocol::tarraq, Protocol::greedy_fixed};
    x.deltas = {0.55};
    x.gamma_th_db = {-3.0, 0.0};
    x.v_max = {20.0};
    x.replications = 3;
    return x;
}

} // namespace

TEST_SUITE("harness")
{
    TEST_CASE("parallel for visits every index once")
    {
        std::vector<std::atomic<int>> hits(100);
        parallel_for(100, 3, [&](std::size_t i) { hits[i]++; });
        for (auto &h : hits)
        {
            CHECK(h.load() == 1);
        }
        CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                            if (i == 4)
                            {
                                throw std::runtime_error("boom");
                            }
                        }),
                        std::runtime_error);
    }

    TEST_CASE("seed derivation")
    {
        CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
        CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
        CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
        CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
        GridPoint p;
        GridPoint q = p;
        q.protocol = Protocol::greedy_fixed;
        q.delta = 0.65;
        CHECK(p.seed_key() == q.seed_key());
        q.v_max = 40;
        CHECK(p.seed_key() != q.seed_key());
    }

    TEST_CASE("number formatting round trips")
    {
        for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.123})
        {
            CHECK(std::stod(fmt_num(x)) == x);
        }
        CHECK(fmt_num(std::nan("")) == "nan");
    }

    TEST_CASE("confidence intervals")
    {
        CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-9));
        CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
        const std::vector<double> xs{1, 2, 3, 4, 5};
        const auto s = normal_ci(xs, 0.9);
        CHECK(s.mean == 3.0);
        CHECK(s.half_width == doctest::Approx(1.6448536269514722 * std::sqrt(2.5) / std::sqrt(5.0)).epsilon(1e-9));
        CHECK(normal_ci({7.0}, 0.9).half_width == 0.0);
        const auto b = bootstrap_ci(xs, 0.9, 4000, 3);
        CHECK(b.mean == 3.0);
        CHECK(b.half_width > 0.5);
        CHECK(b.half_width < 2.0);
        CHECK(bootstrap_ci(xs, 0.9, 500, 3).half_width == bootstrap_ci(xs, 0.9, 500, 3).half_width);
    }

    TEST_CASE("kolmogorov-smirnov distance")
    {
        std::vector<double> u;
        for (int i = 0; i < 1000; ++i)
        {
            u.push_back((i + 0.5) / 1000.0);
        }
        CHECK(ks_distance(u, [](double x) { return std::clamp(x, 0.0, 1.0); }) == doctest::Approx(0.0005));
        CHECK(ks_distance({0.5}, [](double x) { return std::clamp(x, 0.0, 1.0); }) == doctest::Approx(0.5));
    }

    TEST_CASE("grid expansion")
    {
        auto x = tiny_experiment();
        x.deltas = {0.55, 0.65};
        const auto g = expand_grid(x);
        CHECK(g.size() == 2 * 2 * 2);
        std::set<std::tuple<int, double, double, double>> seen;
        for (const auto &p : g)
        {
            seen.insert({static_cast<int>(p.protocol), p.delta, p.gamma_th_db, p.v_max});
        }
        CHECK(seen.size() == g.size());
    }

    TEST_CASE("point configuration")
    {
        GridPoint p;
        p.gamma_th_db = 0.0;
        p.v_max = 33.0;
        p.delta = 0.7;
        p.protocol = Protocol::greedy_resilient;
        const auto c = point_config(tiny_sim(), p, 42);
        CHECK(c.seed == 42);
        CHECK(c.radio.gamma_th == 1.0);
        CHECK(c.speeds.v_u == 33.0);
        CHECK(c.sensing.delta == 0.7);
        CHECK(c.protocol == Protocol::greedy_resilient);
    }

    TEST_CASE("sensing interval sweep")
    {
        SweepSiConfig cfg{{0.55, 0.6, 0.7, 0.8}, {0.5, 1.0, 2.0}};
        SensingConfig s;
        s.t_s_min = 1e-6;
        s.t_s_max = 1e6;
        const auto rows = sweep_si(cfg, s);
        REQUIRE(rows.size() == 12);
        std::map<double, std::vector<SiRow>> by_eta;
        for (const auto &r : rows)
        {
            by_eta[r.eta].push_back(r);
            if (r.delta == 0.55 && r.eta == 1.0)
            {
                CHECK(r.t_s == doctest::Approx(0.600).epsilon(1e-2));
            }
        }
        for (auto &[eta, rs] : by_eta)
        {
            std::sort(rs.begin(), rs.end(), [](const SiRow &a, const SiRow &b) { return a.delta < b.delta; });
            for (std::size_t i = 1; i < rs.size(); ++i)
            {
                CHECK(rs[i].t_s > rs[i - 1].t_s);
            }
            for (std::size_t i = 0; i < rs.size(); ++i)
            {
                CHECK(rs[i].t_s * eta == doctest::Approx(by_eta[1.0][i].t_s).epsilon(1e-14));
            }
        }
    }

    TEST_CASE("experiment output is reproducible and aggregates match")
    {
        const auto x = tiny_experiment();
        const auto a = run_experiment(tiny_sim(), x, 11, 2);
        const auto b = run_experiment(tiny_sim(), x, 11, 1);
        REQUIRE(a.complete());
        std::ostringstream ra;
        std::ostringstream rb;
        write_raw_csv(ra, a.rows);
        write_raw_csv(rb, b.rows);
        CHECK(ra.str() == rb.str());
        CHECK(a.rows.size() == expand_grid(x).size() * x.replications);
        CHECK(a.aggregate.size() == expand_grid(x).size());

        std::istringstream in(ra.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "seed,protocol,delta,gamma_th,v_max,pdr,e2ed_ms,hello_count,hello_kbits,energy_j");
        std::map<std::string, std::vector<double>> pdr;
        std::map<std::string, std::vector<double>> hello;
        while (std::getline(in, line))
        {
            const auto c = split(line);
            REQUIRE(c.size() == 10);
            const std::string key = c[1] + "," + c[2] + "," + c[3] + "," + c[4];
            pdr[key].push_back(std::stod(c[5]));
            hello[key].push_back(std::stod(c[7]));
        }
        CHECK(pdr.size() == a.aggregate.size());
        for (const auto &row : a.aggregate)
        {
            const std::string key = to_string(row.point.protocol) + "," + fmt_num(row.point.delta) + "," +
                                    fmt_num(row.point.gamma_th_db) + "," + fmt_num(row.point.v_max);
            REQUIRE(pdr.count(key) == 1);
            double sp = 0.0;
            double sh = 0.0;
            for (std::size_t i = 0; i < pdr[key].size(); ++i)
            {
                sp += pdr[key][i];
                sh += hello[key][i];
            }
            CHECK(std::fabs(sp / pdr[key].size() - row.pdr.mean) <= 1e-12);
            CHECK(std::fabs(sh / hello[key].size() - row.hello_count.mean) <= 1e-12);
            CHECK(row.n == x.replications);
        }
    }

    TEST_CASE("analytics summary is pure")
    {
        AnalyticsCase c;
        c.name = "t";
        c.v_c = 10.0;
        const auto r1 = analyze_case(c, 40);
        const auto r2 = analyze_case(c, 40);
        std::ostringstream a;
        std::ostringstream b;
        write_analytics_summary(a, {r1});
        write_analytics_summary(b, {r2});
        CHECK(a.str() == b.str());
        CHECK(r1.eta_c == 2.0 * r1.eta_a_quadrature);
        CHECK(std::fabs(r1.eta_a_closed_form - r1.eta_a_quadrature) / r1.eta_a_quadrature <= 1e-4);
    }

    TEST_CASE("encounter simulation balances arrivals and departures")
    {
        AnalyticsCase c;
        c.L = 400;
        c.R = 150;
        const auto log = simulate_encounters(c, 400.0, 50.0, 5);
        CHECK(log.arrivals > 0);
        const double diff = std::fabs(static_cast<double>(log.arrivals) - static_cast<double>(log.departures));
        CHECK(diff / static_cast<double>(log.arrivals) <= 0.02);
        CHECK(log.node_seconds == doctest::Approx(40.0 * 350.0));
        const auto again = simulate_encounters(c, 400.0, 50.0, 5);
        CHECK(again.nit == log.nit);
    }
}
