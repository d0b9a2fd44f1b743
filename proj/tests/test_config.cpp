#include "tarraq/config.hpp"

#include <doctest.h>

#include <cmath>

using namespace tarraq;

TEST_SUITE("config")
{
    TEST_CASE("decibel conversion")
    {
        CHECK(db_to_linear(0.0) == 1.0);
        CHECK(db_to_linear(-3.0) == doctest::Approx(0.501187).epsilon(1e-6));
        CHECK(linear_to_db(db_to_linear(-4.5)) == doctest::Approx(-4.5).epsilon(1e-12));
    }

    TEST_CASE("defaults")
    {
        const auto h = default_config();
        CHECK(h.analytics.cases.size() == 4);
        CHECK(h.validate.cases.size() == 4);
        CHECK(h.sim.radio.N == h.sim.n_nodes);
        CHECK_NOTHROW(h.sim.validate());
    }

    TEST_CASE("empty document keeps defaults")
    {
        const auto h = parse_config("{}");
        CHECK(h.sim.n_nodes == default_config().sim.n_nodes);
    }

    TEST_CASE("full document")
    {
        const auto h = parse_config(R"({
            "seed": 9,
            "scenario": {"box": [500, 400, 100], "n_nodes": 12, "v_min": 2, "v_max": 30, "duration": 60, "warmup": 5},
            "radio": {"gamma_th_db": -6, "alpha": 2},
            "traffic": {"session_rate": 0.5, "burst": 0.2, "packet_bytes": 512},
            "hello": {"fixed_si": 0.5, "reply": false},
            "protocol": {"name": "greedy-fixed", "delta": 0.7, "qrouting": {"tau0": 3, "update_form": "standard"}},
            "experiment": {"name": "x", "protocols": ["tarraq", "greedy-fixed"], "deltas": [0.55, 0.65],
                           "gamma_th_db": [-6, -3], "v_max": [10, 20], "replications": 3},
            "sweep_si": {"deltas": [0.6], "eta": [1, 2]}
        })");
        CHECK(h.sim.seed == 9);
        CHECK(h.sim.box == Vec3{500, 400, 100});
        CHECK(h.sim.n_nodes == 12);
        CHECK(h.sim.radio.N == 12);
        CHECK(h.sim.radio.L == 500);
        CHECK(h.sim.radio.gamma_th == doctest::Approx(db_to_linear(-6.0)));
        CHECK(h.sim.speeds.v_u == 30);
        CHECK(h.sim.packet_bytes == 512);
        CHECK(h.sim.hello_reply == false);
        CHECK(h.sim.protocol == Protocol::greedy_fixed);
        CHECK(h.sim.sensing.delta == 0.7);
        CHECK(h.sim.qrouting.tau0 == 3);
        CHECK(h.sim.qrouting.form == QUpdateForm::standard);
        CHECK(h.experiment.protocols.size() == 2);
        CHECK(h.experiment.replications == 3);
        CHECK(h.sweep_si.eta.size() == 2);
    }

    TEST_CASE("errors")
    {
        CHECK_THROWS_AS(parse_config("{"), ConfigError);
        CHECK_THROWS_AS(parse_config("[]"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"scenario": {"n_nodse": 3}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"scenario": {"n_nodes": "many"}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"scenario": {"v_min": 30, "v_max": 10}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"radio": {"phi": 1.5}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"radio": {"gamma_th": 1, "gamma_th_db": 0}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"protocol": {"name": "olsr"}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"experiment": {"replications": 0}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"analytics": {"cases": [{"name": "a", "R": 900, "L": 400}]}})"), ConfigError);
        CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), ConfigError);
    }
}
