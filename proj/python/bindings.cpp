#include "tarraq/analytics.hpp"
#include "tarraq/config.hpp"
#include "tarraq/kinematics.hpp"
#include "tarraq/perception.hpp"
#include "tarraq/qrouting.hpp"
#include "tarraq/sim.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <tuple>

namespace py = pybind11;
using namespace tarraq;

namespace {

std::tuple<double, double, double> tup(const Vec3 &v)
{
    return {v.x, v.y, v.z};
}

Vec3 vec(const std::tuple<double, double, double> &t)
{
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t)};
}

py::dict curve_dict(const DistributionCurve &c)
{
    py::dict d;
    d["t"] = c.t;
    d["cdf"] = c.cdf;
    d["pdf"] = c.pdf;
    d["rate"] = c.rate_param;
    const auto fit = fit_error(c);
    d["pdf_sup_err"] = fit.pdf_sup;
    d["cdf_sup_err"] = fit.cdf_sup;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "tarraq core: topology analytics, sensing interval, Q-routing and the packet simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<BranchError>(m, "BranchError", PyExc_ValueError);

    py::class_<AnalyticScenario>(m, "AnalyticScenario")
        .def(py::init([](double n_nodes, double L, double R, double v_l, double v_u, double v_c) {
                 auto s = AnalyticScenario::from_box(n_nodes, L, R, v_l, v_u, v_c);
                 s.validate();
                 return s;
             }),
             py::arg("n_nodes"), py::arg("L"), py::arg("R"), py::arg("v_l"), py::arg("v_u"), py::arg("v_c") = 0.0)
        .def_readwrite("rho", &AnalyticScenario::rho)
        .def_readwrite("R", &AnalyticScenario::R)
        .def_readwrite("v_l", &AnalyticScenario::v_l)
        .def_readwrite("v_u", &AnalyticScenario::v_u)
        .def_readwrite("v_c", &AnalyticScenario::v_c)
        .def_readwrite("L", &AnalyticScenario::L);

    m.def("arrival_rate_quadrature", [](const AnalyticScenario &s) { return arrival_rate_quadrature(s); });
    m.def("arrival_rate_closed_form", &arrival_rate_closed_form);
    m.def("change_rate", [](const AnalyticScenario &s) { return change_rate(s); });
    m.def("default_grid", &default_grid, py::arg("rate"), py::arg("n") = 200);
    m.def("nit_distribution", [](const AnalyticScenario &s, const std::vector<double> &g) {
        return curve_dict(nit_distribution(s, g));
    });
    m.def("ncit_distribution", [](const AnalyticScenario &s, const std::vector<double> &g) {
        return curve_dict(ncit_distribution(s, g));
    });

    m.def("relative_motion", [](double v_o, double v_c, double alpha, double beta) {
        const auto r = relative_motion(v_o, v_c, alpha, beta);
        py::dict d;
        d["v"] = r.v;
        d["alpha_v"] = r.alpha_v;
        d["beta_v"] = r.beta_v;
        d["co_moving"] = r.co_moving;
        return d;
    });
    m.def("whole_link_duration", [](double R, double v, double alpha_v, double beta_v, double theta_a, double psi_a) {
        RelativeMotion rel;
        rel.v = v;
        rel.alpha_v = alpha_v;
        rel.beta_v = beta_v;
        rel.co_moving = v == 0.0;
        return whole_link_duration(R, rel, theta_a, psi_a);
    });
    m.def("entrance_point", [](std::tuple<double, double, double> rel_pos, std::tuple<double, double, double> rel_vel,
                               double R) {
        const auto g = entrance_point({}, vec(rel_pos), vec(rel_vel), R);
        py::dict d;
        d["entrance"] = tup(g.entrance);
        d["whole_ld"] = g.whole_ld;
        d["chord_length"] = g.chord_length;
        d["elapsed_distance"] = g.elapsed_distance;
        return d;
    });
    m.def("swept_volume", &swept_volume);

    m.def("dewma_update", [](double est, double sample) {
        const auto r = dewma_update({est, 0.0}, sample);
        return r ? py::cast(r->est) : py::none();
    });
    m.def("expected_sensing_delay", &expected_sensing_delay);
    m.def("sensing_delay_cdf", &sensing_delay_cdf);
    m.def("sensing_root", &sensing_root);
    m.def(
        "resilient_interval",
        [](double eta_e, double delta, double t_s_min, double t_s_max) {
            SensingConfig cfg;
            cfg.delta = delta;
            cfg.t_s_min = t_s_min;
            cfg.t_s_max = t_s_max;
            const auto r = resilient_interval(eta_e, cfg);
            py::dict d;
            d["t_s"] = r.t_s;
            d["unclamped"] = r.unclamped;
            d["x"] = r.x;
            d["clamped"] = r.clamped;
            d["delta_infeasible"] = r.delta_infeasible;
            return d;
        },
        py::arg("eta_e"), py::arg("delta"), py::arg("t_s_min") = 0.05, py::arg("t_s_max") = 5.0);

    m.def("softmax_probabilities", &softmax_probabilities, py::arg("residuals"), py::arg("tau0"), py::arg("t") = 1);
    m.def(
        "q_update_value",
        [](double q, double r, double max_q_next, double alpha, double gamma, const std::string &form) {
            return q_update_value(q, r, max_q_next, alpha, gamma, parse_q_update_form(form));
        },
        py::arg("q"), py::arg("r"), py::arg("max_q_next"), py::arg("alpha"), py::arg("gamma"),
        py::arg("form") = "printed");
    m.def(
        "q_fixed_point",
        [](double r, double max_q_next, double gamma, const std::string &form) {
            return q_fixed_point(r, max_q_next, gamma, parse_q_update_form(form));
        },
        py::arg("r"), py::arg("max_q_next"), py::arg("gamma"), py::arg("form") = "printed");
    m.def("neighbor_metric", &neighbor_metric, py::arg("n_j"), py::arg("n_i"), py::arg("ncr_j"),
          py::arg("ncr_floor") = 0.01);
    m.def("distance_metric", &distance_metric, py::arg("d_ij"), py::arg("d_iD"), py::arg("d_jD"), py::arg("R"),
          py::arg("sigma") = 1.0);

    py::class_<RadioModel>(m, "RadioModel")
        .def(py::init<>())
        .def_readwrite("p_tx", &RadioModel::p_tx)
        .def_readwrite("gamma_th", &RadioModel::gamma_th)
        .def_readwrite("n0", &RadioModel::n0)
        .def_readwrite("alpha", &RadioModel::alpha)
        .def_readwrite("phi", &RadioModel::phi)
        .def_readwrite("epsilon", &RadioModel::epsilon)
        .def_readwrite("L", &RadioModel::L)
        .def_readwrite("N", &RadioModel::N)
        .def_readwrite("interference_gain", &RadioModel::interference_gain)
        .def_readwrite("e_elec", &RadioModel::e_elec)
        .def_readwrite("e_fs", &RadioModel::e_fs)
        .def("success_probability", &RadioModel::success_probability)
        .def("interference", &RadioModel::interference);
    m.def("effective_range", &effective_range);
    m.def("energy_tx_rx", [](double bits, double d, const RadioModel &rm) {
        const auto e = energy_tx_rx(bits, d, rm);
        return std::make_pair(e.e_tx, e.e_rx);
    });

    m.def(
        "run_simulation",
        [](const std::string &config_json, std::optional<std::uint64_t> seed) {
            auto cfg = parse_config(config_json).sim;
            if (seed)
            {
                cfg.seed = *seed;
            }
            RunMetrics r;
            {
                py::gil_scoped_release release;
                r = run_simulation(cfg);
            }
            py::dict d;
            d["generated"] = r.generated;
            d["delivered"] = r.delivered;
            d["pdr"] = r.pdr();
            d["e2ed_ms"] = r.e2ed_ms();
            d["hello_count"] = r.hello_count;
            d["hello_bits"] = r.hello_bits;
            d["energy_j"] = r.energy_total;
            d["dropped_cache"] = r.dropped_cache;
            d["dropped_ttl"] = r.dropped_ttl;
            d["hops"] = r.hops;
            return d;
        },
        py::arg("config_json") = "{}", py::arg("seed") = py::none());
}
